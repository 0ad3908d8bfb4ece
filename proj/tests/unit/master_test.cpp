#include <doctest.h>

#include "cosim/master/run.hpp"
#include "test_federates.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace cosim;
using namespace cosim::master;
using cosim::testing::function_federate;
using cosim::testing::real_var;

namespace {

std::unique_ptr<function_federate> fn(std::vector<std::string> in, std::vector<std::string> out,
                                      function_federate::fn f, bool rollback = true)
{
    return std::make_unique<function_federate>(std::move(in), std::move(out), std::move(f), rollback);
}

// x = 0.5 y + 1 (federate a), y = 0.5 x (federate b)
void add_loop_pair(scenario& s, connection_mode back)
{
    s.add_federate("a", fn({"y"}, {"x"}, [](double, const auto& in) { return std::vector{0.5 * in[0] + 1.0}; }), 1.0);
    s.add_federate("b", fn({"x"}, {"y"}, [](double, const auto& in) { return std::vector{0.5 * in[0]}; }), 1.0);
    s.connect({"a", "x"}, {"b", "x"}, connection_mode::direct);
    s.connect({"b", "y"}, {"a", "y"}, back, 0.0);
}

// Emits an integer counter.
class int_source final : public federate::cs_federate {
public:
    int_source() : store_({"ints", federate::model_kind::cs, {{"n", 0, federate::data_type::integer, federate::causality::output, federate::variability::discrete, std::int64_t{0}}}, 0}) {}
    const federate::model_description& description() const override { return store_.description(); }
    void initialize(double, const federate::parameter_set& p) override { store_.reset(p); }
    void set_input(federate::value_ref, const federate::value&) override {}
    federate::value get_output(federate::value_ref r) const override { return store_.get(r); }
    federate::step_status update_outputs(double) override { return federate::step_status::ok; }
    federate::step_status do_step(double, double) override
    {
        store_.set(0, store_.integer(0) + 1);
        return federate::step_status::ok;
    }

private:
    federate::variable_store store_;
};

// Gaussian noise source seeded from the scenario seed.
class noise_source final : public federate::cs_federate {
public:
    explicit noise_source(std::uint64_t seed)
        : seed_(seed), store_({"noise", federate::model_kind::cs, {real_var("w", 0, federate::causality::output)}, 0})
    {
    }
    const federate::model_description& description() const override { return store_.description(); }
    void initialize(double, const federate::parameter_set& p) override
    {
        store_.reset(p);
        rng_.seed(seed_);
    }
    void set_input(federate::value_ref, const federate::value&) override {}
    federate::value get_output(federate::value_ref r) const override { return store_.get(r); }
    federate::step_status update_outputs(double) override { return federate::step_status::ok; }
    federate::step_status do_step(double, double) override
    {
        store_.set(0, std::normal_distribution<double>(0.0, 1.0)(rng_));
        return federate::step_status::ok;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 rng_;
    federate::variable_store store_;
};

} // namespace

TEST_CASE("connect checks endpoints")
{
    scenario s;
    s.add_federate("grid", fn({"I_in"}, {"V_pcc"}, [](double, const auto&) { return std::vector{1.0}; }), 1.0);
    s.add_federate("wtg", fn({"V_in"}, {"I_out"}, [](double, const auto&) { return std::vector{0.0}; }), 1.0);
    s.add_federate("ints", std::make_unique<int_source>(), 1.0);

    s.connect({"grid", "V_pcc"}, {"wtg", "V_in"});
    CHECK(s.connections().size() == 1);

    CHECK_THROWS_AS(s.connect({"ints", "n"}, {"grid", "I_in"}), type_mismatch);
    CHECK_THROWS_AS(s.connect({"wtg", "V_in"}, {"grid", "I_in"}), causality_error);
    CHECK_THROWS_AS(s.connect({"wtg", "I_out"}, {"grid", "V_pcc"}), causality_error);
    CHECK_THROWS_AS(s.connect({"wtg", "nope"}, {"grid", "I_in"}), causality_error);
    CHECK_THROWS_AS(s.connect({"grid", "V_pcc"}, {"wtg", "V_in"}), causality_error); // input already driven
    CHECK_THROWS_AS(s.connect({"ghost", "x"}, {"grid", "I_in"}), error);

    try {
        s.connect({"wtg", "I_out"}, {"grid", "I_in"}, connection_mode::direct);
        FAIL("expected cycle_error");
    } catch (const cycle_error& e) {
        CHECK(e.ids() == std::vector<std::string>{"grid", "wtg"});
        CHECK(std::string(e.what()).find("direct connection closes cycle through") != std::string::npos);
    }
    CHECK(s.connections().size() == 1);

    s.connect({"wtg", "I_out"}, {"grid", "I_in"}, connection_mode::iterative);
    const auto g = build_schedule(s);
    REQUIRE(g.loop_groups.size() == 1);
    CHECK(g.loop_groups[0] == std::vector<std::string>{"grid", "wtg"});
}

TEST_CASE("schedule order")
{
    SUBCASE("chain declared backwards")
    {
        scenario s;
        for (const auto* id : {"c", "b", "a"})
            s.add_federate(id, fn({"u"}, {"y"}, [](double, const auto& in) { return in; }), 1.0);
        s.connect({"b", "y"}, {"c", "u"});
        s.connect({"a", "y"}, {"b", "u"});
        const auto g = build_schedule(s);
        CHECK(g.order == std::vector<std::string>{"a", "b", "c"});
        CHECK(g.loop_groups.empty());
    }
    SUBCASE("independent federates sort by id, time_shifted edges do not constrain")
    {
        scenario s;
        for (const auto* id : {"z", "m", "k"})
            s.add_federate(id, fn({"u"}, {"y"}, [](double, const auto& in) { return in; }), 1.0);
        s.connect({"z", "y"}, {"k", "u"}, connection_mode::time_shifted, 0.0);
        s.connect({"k", "y"}, {"z", "u"}, connection_mode::direct);
        CHECK(build_schedule(s).order == std::vector<std::string>{"k", "m", "z"});
    }
    SUBCASE("loop members ordered by their direct edges, downstream after")
    {
        scenario s;
        for (const auto* id : {"ctrl", "wtg", "grid"})
            s.add_federate(id, fn({"u"}, {"y"}, [](double, const auto& in) { return in; }), 1.0);
        s.connect({"wtg", "y"}, {"grid", "u"}, connection_mode::direct);
        s.connect({"grid", "y"}, {"wtg", "u"}, connection_mode::iterative);
        s.connect({"grid", "y"}, {"ctrl", "u"}, connection_mode::direct);
        const auto g = build_schedule(s);
        CHECK(g.order == std::vector<std::string>{"wtg", "grid", "ctrl"});
        REQUIRE(g.units.size() == 2);
        CHECK(g.units[0].loop);
        CHECK(g.units[0].members == std::vector<std::string>{"wtg", "grid"});
    }
    SUBCASE("loop members must support rollback")
    {
        scenario s;
        s.add_federate("a", fn({"u"}, {"y"}, [](double, const auto& in) { return in; }, false), 1.0);
        s.add_federate("b", fn({"u"}, {"y"}, [](double, const auto& in) { return in; }), 1.0);
        s.connect({"a", "y"}, {"b", "u"});
        s.connect({"b", "y"}, {"a", "u"}, connection_mode::iterative);
        CHECK_THROWS_AS(build_schedule(s), error);
        scenario t;
        t.add_federate("a", fn({"u"}, {"y"}, [](double, const auto& in) { return in; }, false), 1.0);
        t.add_federate("b", fn({"u"}, {"y"}, [](double, const auto& in) { return in; }), 1.0);
        t.connect({"a", "y"}, {"b", "u"});
        t.connect({"b", "y"}, {"a", "u"}, connection_mode::time_shifted, 0.0);
        CHECK_NOTHROW(build_schedule(t));
    }
}

TEST_CASE("algebraic loop converges to the fixed point")
{
    scenario s;
    s.stop_time = 5.0;
    s.epsilon = 1e-9;
    add_loop_pair(s, connection_mode::iterative);
    const auto r = run(s);

    // Fixed point of x = 0.5 y + 1, y = 0.5 x.
    const double x_star = 1.0 / (1.0 - 0.25), y_star = 0.5 * x_star;
    REQUIRE(r.at("a", "x").size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(std::abs(r.at("a", "x").v[i] - x_star) < 1e-8);
        CHECK(std::abs(r.at("b", "y").v[i] - y_star) < 1e-8);
    }
    REQUIRE(r.loops.size() == 6);
    // From y = 0 the residual after pass p is 0.5 * 0.25^p: first below 1e-9 at p = 15.
    CHECK(r.loops[0].iterations == 15);
    for (const auto& l : r.loops) CHECK(l.iterations <= 15);
}

TEST_CASE("time_shifted loop follows the one-step recurrence")
{
    scenario ts;
    ts.stop_time = 12.0;
    add_loop_pair(ts, connection_mode::time_shifted);
    const auto r = run(ts);

    // y_{k} = 0.5 x_k, x_k = 0.5 y_{k-1} + 1, y_{-1} = 0
    double y = 0.0;
    const auto& x = r.at("a", "x").v;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double xk = 0.5 * y + 1.0;
        y = 0.5 * xk;
        CHECK(x[k] == doctest::Approx(xk).epsilon(1e-15));
    }
    CHECK(r.loops.empty());

    // Distance to the converged iterative answer shrinks by 0.25 per point.
    scenario it;
    it.stop_time = 12.0;
    it.epsilon = 1e-12;
    add_loop_pair(it, connection_mode::iterative);
    const double x_it = run(it).at("a", "x").v.back();
    for (std::size_t k = 1; k + 1 < 10; ++k) {
        const double ratio = std::abs(x[k + 1] - x_it) / std::abs(x[k] - x_it);
        CHECK(ratio == doctest::Approx(0.25).epsilon(1e-6));
    }
}

TEST_CASE("sampled source and sample counts")
{
    scenario s;
    s.stop_time = 3.0;
    s.add_federate("src", fn({}, {"y"}, [](double t, const auto&) { return std::vector{t * t}; }), 1.0);
    const auto r = run(s);
    const auto& y = r.at("src", "y");
    CHECK(y.t == std::vector<double>{0, 1, 2, 3});
    CHECK(y.v == std::vector<double>{0, 1, 4, 9});

    scenario m;
    m.stop_time = 2.0;
    auto fast = fn({}, {"y"}, [](double t, const auto&) { return std::vector{t}; });
    auto* fast_ptr = fast.get();
    m.add_federate("fast", std::move(fast), 0.2);
    m.add_federate("slow", fn({"u"}, {"y"}, [](double, const auto& in) { return in; }), 0.3);
    m.connect({"fast", "y"}, {"slow", "u"});
    CHECK(sync_interval(m) == doctest::Approx(0.6));
    const auto rm = run(m);
    for (const auto& [key, ts] : rm.series) CHECK(ts.size() == static_cast<std::size_t>(std::floor(2.0 / 0.6)) + 1);
    CHECK(fast_ptr->steps == 9);
    CHECK(rm.at("slow", "y").v.back() == doctest::Approx(1.8));

    scenario bad;
    bad.add_federate("x", fn({}, {"y"}, [](double, const auto&) { return std::vector{0.0}; }), 1e-10);
    CHECK_THROWS_AS(sync_interval(bad), error);
}

TEST_CASE("randomized linear loops match the direct solve")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 3;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j)
                if (i != j) row += std::abs(a(i, j) = u(rng));
            // Row sums of |a| at most 0.8 make the iteration a max-norm contraction.
            for (int j = 0; j < n; ++j) a(i, j) *= 0.8 / std::max(row, 0.8);
            b(i) = u(rng);
        }

        scenario s;
        s.stop_time = 2.0;
        s.epsilon = 1e-12;
        s.max_iterations = 200;
        for (int i = 0; i < n; ++i) {
            std::vector<std::string> ins;
            for (int j = 0; j < n; ++j)
                if (j != i) ins.push_back("x" + std::to_string(j));
            s.add_federate("f" + std::to_string(i),
                           fn(ins, {"x"},
                              [a, b, i, n](double, const std::vector<double>& in) {
                                  double v = b(i);
                                  for (int j = 0, k = 0; j < n; ++j)
                                      if (j != i) v += a(i, j) * in[k++];
                                  return std::vector{v};
                              }),
                           1.0);
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j)
                    s.connect({"f" + std::to_string(i), "x"}, {"f" + std::to_string(j), "x" + std::to_string(i)},
                              i < j ? connection_mode::direct : connection_mode::iterative, 0.0);

        const auto r = run(s);
        const Eigen::VectorXd x = (Eigen::MatrixXd::Identity(n, n) - a).partialPivLu().solve(b);
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(r.at("f" + std::to_string(i), "x").v.back() - x(i)) < 1e-10);
        for (const auto& l : r.loops)
            for (std::size_t p = 1; p < l.residuals.size(); ++p) CHECK(l.residuals[p] <= l.residuals[p - 1]);
    }
}

TEST_CASE("failures")
{
    SUBCASE("divergent loop")
    {
        scenario s;
        s.stop_time = 1.0;
        s.max_iterations = 5;
        s.add_federate("a", fn({"y"}, {"x"}, [](double, const auto& in) { return std::vector{2.0 * in[0] + 1.0}; }), 1.0);
        s.add_federate("b", fn({"x"}, {"y"}, [](double, const auto& in) { return std::vector{in[0]}; }), 1.0);
        s.connect({"a", "x"}, {"b", "x"});
        s.connect({"b", "y"}, {"a", "y"}, connection_mode::iterative);
        try {
            run(s);
            FAIL("expected convergence_failure");
        } catch (const convergence_failure& e) {
            CHECK(e.group() == std::vector<std::string>{"a", "b"});
            CHECK(e.time() == 0.0);
            CHECK(e.residual() >= s.epsilon);
        }
    }
    SUBCASE("federate exception carries instance and time")
    {
        scenario s;
        s.stop_time = 3.0;
        s.add_federate("boom", fn({}, {"y"}, [](double t, const auto&) {
                           if (t > 1.5) throw std::runtime_error("bad");
                           return std::vector{t};
                       }),
                       1.0);
        try {
            run(s);
            FAIL("expected federate_error");
        } catch (const federate_error& e) {
            CHECK(e.instance() == "boom");
            CHECK(e.time() == 1.0);
        }
    }
}

TEST_CASE("determinism and declaration order")
{
    auto build = [](std::vector<std::string> ids, std::uint64_t seed) {
        scenario s;
        s.stop_time = 1.0;
        s.seed = seed;
        for (const auto& id : ids) {
            if (id == "noise")
                s.add_federate(id, std::make_unique<noise_source>(derive_seed(seed, id)), 0.1);
            else if (id == "sum")
                s.add_federate(id, fn({"w", "z"}, {"y"}, [](double, const auto& in) { return std::vector{in[0] + in[1]}; }), 0.1);
            else
                s.add_federate(id, fn({"y"}, {"z"}, [](double, const auto& in) { return std::vector{0.5 * in[0]}; }), 0.1);
        }
        s.connect({"noise", "w"}, {"sum", "w"});
        s.connect({"sum", "y"}, {"half", "y"});
        s.connect({"half", "z"}, {"sum", "z"}, connection_mode::iterative);
        return run(s);
    };
    const auto r1 = build({"noise", "sum", "half"}, 42);
    const auto r2 = build({"noise", "sum", "half"}, 42);
    const auto r3 = build({"half", "noise", "sum"}, 42);
    const auto r4 = build({"sum", "half", "noise"}, 42);
    CHECK(r1 == r2);
    CHECK(r1 == r3);
    CHECK(r1 == r4);
    CHECK_FALSE(r1 == build({"noise", "sum", "half"}, 43));
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
}

TEST_CASE("csv export")
{
    scenario s;
    s.stop_time = 2.0;
    s.add_federate("src", fn({}, {"y", "z"}, [](double t, const auto&) { return std::vector{t / 3.0, 1.0}; }), 1.0);
    const auto r = run(s);
    const auto dir = std::filesystem::temp_directory_path() / "cosim_master_csv";
    std::filesystem::remove_all(dir);
    const auto files = export_csv(r, dir);
    REQUIRE(files.size() == 1);
    std::ifstream in(files[0]);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "t,y,z\n0.000000000,0,1\n1.000000000,0.33333333333333331,1\n2.000000000,0.66666666666666663,1\n");
    std::filesystem::remove_all(dir);
}
