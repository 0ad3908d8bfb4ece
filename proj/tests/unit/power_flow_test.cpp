#include <doctest.h>

#include "../oracles/gs_power_flow.hpp"
#include "cosim/common/json_io.hpp"
#include "cosim/models/power_flow.hpp"

#include <cmath>

using namespace cosim;
using namespace cosim::models;

namespace {

// |S_calc - S_spec| recomputed from the returned voltages.
double residual(const network& n, const pf_result& r, const pf_conditions& c = {})
{
    const auto y = admittance_matrix(n);
    Eigen::VectorXcd v(n.buses.size());
    for (std::size_t i = 0; i < n.buses.size(); ++i) v(i) = r.voltage(i);
    Eigen::MatrixXcd yy = y;
    if (c.shunt_bus) yy(*c.shunt_bus, *c.shunt_bus) += c.shunt;
    Eigen::VectorXcd inj = yy * v;
    if (c.current_bus) inj(*c.current_bus) -= converter_current(c);
    const Eigen::VectorXcd s = v.cwiseProduct(inj.conjugate());
    double worst = 0.0;
    for (std::size_t i = 0; i < n.buses.size(); ++i) {
        const auto mis = s(i) - specified_injection(n, c, i, r.vm(i));
        if (n.buses[i].type != bus_type::slack) worst = std::max(worst, std::abs(mis.real()));
        if (n.buses[i].type == bus_type::pq) worst = std::max(worst, std::abs(mis.imag()));
    }
    return worst;
}

} // namespace

TEST_CASE("flat network stays flat")
{
    network n;
    n.buses = {{1, bus_type::slack, 1.0}, {2, bus_type::pq}, {3, bus_type::pq}};
    n.branches = {{1, 2, 0.01, 0.1, 0.0}, {2, 3, 0.02, 0.2, 0.0}};
    const auto r = solve_power_flow(n);
    for (int i = 0; i < 3; ++i) {
        CHECK(r.vm(i) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(r.va(i)) < 1e-14);
    }
}

TEST_CASE("9-bus case agrees with the Gauss-Seidel oracle")
{
    const auto n = ieee9_pcc();
    const auto r = solve_power_flow(n);
    const auto gs = oracle::gauss_seidel_pf(n);
    for (std::size_t i = 0; i < n.buses.size(); ++i) {
        CHECK(std::abs(r.vm(i) - gs.vm[i]) <= 1e-6);
        CHECK(std::abs(r.va(i) - gs.va[i]) <= 1e-6);
    }
    CHECK(residual(n, r) < 1e-8);
    CHECK(r.max_mismatch < 1e-8);
    // published operating point of the benchmark
    CHECK(r.vm(n.index_of(4)) == doctest::Approx(1.0258).epsilon(2e-4));
    CHECK(r.vm(n.index_of(8)) == doctest::Approx(1.0159).epsilon(2e-4));
    // the PCC bus carries no load, so it sits at the bus 8 voltage
    CHECK(r.vm(n.index_of(10)) == doctest::Approx(r.vm(n.index_of(8))).epsilon(1e-12));

    // branch flows balance at the slack: generator 1 output equals the 1-4 flow
    Eigen::VectorXcd v(n.buses.size());
    for (std::size_t i = 0; i < n.buses.size(); ++i) v(i) = r.voltage(i);
    const Eigen::VectorXcd ibus = admittance_matrix(n) * v;
    const auto s1 = r.voltage(0) * std::conj(ibus(0));
    CHECK(std::abs(r.flows.front().s_from - s1) < 1e-12);
}

TEST_CASE("bolted fault at a load bus")
{
    // A constant power load cannot be served at a bolted fault; loads are
    // constant impedance here.
    const auto n = ieee9_pcc();
    pf_conditions c;
    c.alpha_p = c.alpha_q = 2.0;
    c.shunt_bus = n.index_of(8);
    c.shunt = {1e4, 0.0};
    const auto r = solve_power_flow(n, c);
    CHECK(r.vm(n.index_of(8)) < 0.05);
    CHECK(residual(n, r, c) < 1e-8);
    const auto gs = oracle::gauss_seidel_pf(n, 8, {1e4, 0.0}, true);
    for (std::size_t i = 0; i < n.buses.size(); ++i) CHECK(std::abs(r.vm(i) - gs.vm[i]) <= 1e-6);
}

TEST_CASE("voltage dependent loads and converter current")
{
    const auto n = ieee9_pcc();
    const auto base = solve_power_flow(n);
    pf_conditions c;
    c.alpha_p = c.alpha_q = 2.0;
    c.v0.assign(base.vm.data(), base.vm.data() + base.vm.size());
    const auto same = solve_power_flow(n, c, &base);
    CHECK((same.vm - base.vm).cwiseAbs().maxCoeff() < 1e-9);

    const auto pcc = n.index_of(10);
    c.current_bus = pcc;
    c.i_q = 0.3;
    c.frame_angle = base.va(pcc);
    const auto boosted = solve_power_flow(n, c, &base);
    CHECK(boosted.vm(pcc) > base.vm(pcc));
    CHECK(residual(n, boosted, c) < 1e-8);
    // in its own voltage frame the source injects |V| (i_d + j i_q)
    c.i_d = 0.2;
    auto s1 = solve_power_flow(n, c, &base);
    for (int k = 0; k < 20; ++k) {
        c.frame_angle = s1.va(pcc);
        s1 = solve_power_flow(n, c, &s1);
    }
    const auto sv = s1.voltage(pcc) * std::conj(converter_current(c));
    CHECK(std::abs(s1.va(pcc) - c.frame_angle) < 1e-6);
    CHECK(sv.real() == doctest::Approx(s1.vm(pcc) * 0.2).epsilon(1e-6));
    c.i_d = 0.0;
    c.frame_angle = base.va(pcc);

    // reactive current also helps during a fault
    c.shunt_bus = n.index_of(8);
    c.shunt = {1e4, 0.0};
    c.i_q = 0.0;
    const auto f0 = solve_power_flow(n, c, &base);
    c.i_q = 0.4;
    const auto f1 = solve_power_flow(n, c, &base);
    CHECK(f1.vm(pcc) > f0.vm(pcc));
    CHECK(residual(n, f1, c) < 1e-8);
}

TEST_CASE("non-convergence is reported")
{
    auto n = ieee9_pcc();
    n.buses[n.index_of(5)].p_load = 50.0;
    CHECK_THROWS_AS(solve_power_flow(n), non_convergence);
}

TEST_CASE("fault locations")
{
    CHECK(fault_location::parse("bus:8").bus_id == 8);
    const auto f = fault_location::parse("branch:5-7@0.25");
    CHECK(f.where == fault_location::kind::branch);
    CHECK(f.from == 5);
    CHECK(f.to == 7);
    CHECK(f.position == 0.25);
    CHECK(f.str() == "branch:5-7@0.25");
    CHECK(fault_location::parse("branch:5-7").position == 0.5);
    CHECK_THROWS_AS(fault_location::parse("bus:x"), error);
    CHECK_THROWS_AS(fault_location::parse("branch:5-7@1.5"), error);
    CHECK_THROWS_AS(prepare_fault(ieee9_pcc(), fault_location::parse("branch:1-2@0.5")), error);

    // splitting a line without a fault leaves the solution unchanged
    // without line charging on the split branch the two sections are exactly the original series impedance
    auto plain = ieee9_pcc();
    for (auto& br : plain.branches)
        if (br.from == 5 && br.to == 7) br.b = 0.0;
    const auto base = solve_power_flow(plain);
    const auto [split, mid] = prepare_fault(plain, fault_location::parse("branch:7-5@0.3"));
    CHECK(mid == 11);
    const auto r = solve_power_flow(split);
    for (int id = 1; id <= 10; ++id)
        CHECK(std::abs(r.vm(split.index_of(id)) - base.vm(ieee9_pcc().index_of(id))) < 1e-9);
    // 0.3 of the way from bus 7: the section touching 7 has 0.3 of the impedance
    for (const auto& br : split.branches)
        if (br.from == 5 && br.to == mid) CHECK(br.x == doctest::Approx(0.161 * 0.7));
}

TEST_CASE("network JSON")
{
    const auto file = network_from_json(json_io::load_file(COSIM_DATA_DIR "/ieee9_pcc.json"));
    CHECK(to_json(file) == to_json(ieee9_pcc()));
    CHECK(to_json(network_from_json(to_json(file))) == to_json(file));

    auto bad = to_json(ieee9_pcc());
    bad["buses"][1]["type"] = "slack";
    CHECK_THROWS_AS(network_from_json(bad), error);
    bad = to_json(ieee9_pcc());
    bad["branches"].erase(9);
    CHECK_THROWS_WITH_AS(network_from_json(bad), "network is not connected", error);
    CHECK_THROWS_AS(load_network("builtin:nope"), error);
}
