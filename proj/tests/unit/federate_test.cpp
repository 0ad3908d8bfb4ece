#include <doctest.h>

#include "cosim/federate/attribute_map.hpp"
#include "cosim/federate/capsule.hpp"
#include "cosim/federate/integrators.hpp"
#include "test_federates.hpp"

#include <cmath>
#include <complex>
#include <set>

using namespace cosim;
using namespace cosim::federate;
using cosim::testing::linear_me;
using cosim::testing::real_var;

namespace {

// Global error of dx/dt = -x, x(0) = 1 at t = 1.
double decay_error(integrator_kind kind, double h)
{
    std::vector<double> x{1.0};
    const long n = std::lround(1.0 / h);
    integrate(kind, [](double, std::span<const double> s, std::span<double> d) { d[0] = -s[0]; }, 0.0, x, h, n);
    return std::abs(x[0] - std::exp(-1.0));
}

// Closed form of exp(A t) for a 2x2 matrix via Cayley-Hamilton:
// exp(At) = e^{st} [ c(t) I + g(t) (A - s I) ], s = tr/2, q^2 = s^2 - det.
using mat2 = std::array<std::array<double, 2>, 2>;
mat2 expm2(const mat2& a, double t)
{
    const double s = 0.5 * (a[0][0] + a[1][1]);
    const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    const std::complex<double> q = std::sqrt(std::complex<double>(s * s - det));
    std::complex<double> c, g;
    if (std::abs(q) < 1e-12) {
        c = 1.0;
        g = t;
    } else {
        c = std::cosh(q * t);
        g = std::sinh(q * t) / q;
    }
    const double es = std::exp(s * t);
    mat2 out{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out[i][j] = es * ((i == j ? c.real() : 0.0) + g.real() * (a[i][j] - (i == j ? s : 0.0)));
    return out;
}

model_description wtg_like_description()
{
    return {"wtg",
            model_kind::me,
            {real_var("i_max", 0, causality::parameter, 0.5, variability::constant),
             real_var("V_pcc", 1, causality::input), real_var("Q_ref", 2, causality::input),
             real_var("I_d", 3, causality::output), real_var("I_q", 4, causality::output),
             real_var("i_d_ref", 5, causality::local)},
            2};
}

} // namespace

TEST_CASE("to_attribute_map partitions by causality")
{
    model_description md{"m",
                         model_kind::cs,
                         {real_var("mu", 0, causality::parameter, 1.0, variability::constant),
                          real_var("vin", 1, causality::input), real_var("vout", 2, causality::output),
                          real_var("tmp", 3, causality::local)},
                         0};
    auto map = to_attribute_map(md);
    CHECK(map.params == std::vector<std::string>{"mu"});
    CHECK(map.attributes == std::vector<std::string>{"vin", "vout"});
    CHECK_FALSE(map.records.count("tmp"));

    CHECK(to_attribute_map(model_description{"empty", model_kind::cs, {}, 0}).records.empty());

    const auto wtg = to_attribute_map(wtg_like_description());
    CHECK(wtg.attributes == std::vector<std::string>{"V_pcc", "Q_ref", "I_d", "I_q"});
    CHECK(wtg.params == std::vector<std::string>{"i_max"});

    md.variables.push_back(real_var("vin", 7, causality::output));
    CHECK_THROWS_AS(to_attribute_map(md), duplicate_name);
}

TEST_CASE("select_accessor")
{
    const auto map = to_attribute_map(wtg_like_description());
    CHECK(select_accessor(map, "V_pcc") == accessor{1, data_type::real, causality::input});
    CHECK_THROWS_AS(select_accessor(map, "I_d", access::set), direction_error);
    CHECK_THROWS_AS(select_accessor(map, "V_pcc", access::get), direction_error);
    CHECK(select_accessor(map, "V_pcc", access::get, {"V_pcc"}).ref == 1);
    CHECK(select_accessor(map, "V_pcc", access::set).ref == 1);
    CHECK_THROWS_AS(select_accessor(map, "nonexistent"), unknown_variable);
}

TEST_CASE("model description validation and JSON")
{
    auto md = wtg_like_description();
    CHECK(validate(md).empty());
    const auto back = model_description_from_json(to_json(md));
    CHECK(to_json(back) == to_json(md));

    md.variables[1].ref = 0;
    md.variables[2].causality = causality::parameter; // continuous parameter
    const auto r = validate(md);
    REQUIRE(r.size() == 2);
    std::set<std::string> codes{r[0].code, r[1].code};
    CHECK(codes == std::set<std::string>{"duplicate_value_ref", "parameter_variability"});

    CHECK_THROWS_AS(model_description_from_json(nlohmann::json{{"model_name", "x"}, {"kind", "XX"}, {"variables", nlohmann::json::array()}}),
                    schema_error);
}

TEST_CASE("variable_store types and parameters")
{
    variable_store s(wtg_like_description());
    CHECK(s.real(0) == 0.5);
    s.reset({{"i_max", std::int64_t{2}}});
    CHECK(s.real(0) == 2.0);
    CHECK_THROWS_AS(s.reset({{"V_pcc", 1.0}}), direction_error);
    CHECK_THROWS_AS(s.reset({{"nope", 1.0}}), unknown_variable);
    CHECK_THROWS_AS(s.set_input(3, 1.0), direction_error);
    CHECK_THROWS_AS(s.set(1, std::string("x")), error);
}

TEST_CASE("single integrator steps")
{
    std::vector<double> x{1.0};
    auto decay = [](double, std::span<const double> s, std::span<double> d) { d[0] = -s[0]; };
    integrate_step(integrator_kind::rk4, decay, 0.0, x, 0.1);
    CHECK(std::abs(x[0] - 0.9048374) <= 1e-6);
    CHECK(std::abs(x[0] - std::exp(-0.1)) <= 1e-6);

    x = {1.0};
    integrate_step(integrator_kind::euler, decay, 0.0, x, 0.1);
    CHECK(x[0] == 0.9);

    for (auto kind : {integrator_kind::euler, integrator_kind::rk4}) {
        x = {3.25};
        integrate(kind, [](double, std::span<const double>, std::span<double> d) { d[0] = 0.0; }, 0.0, x, 0.01, 10);
        CHECK(x[0] == 3.25);
    }

    x = {1.0};
    CHECK_THROWS_AS(integrate_step(integrator_kind::rk4,
                                   [](double, std::span<const double>, std::span<double> d) { d[0] = NAN; }, 0.0, x, 0.1),
                    solver_failure);
}

TEST_CASE("convergence order")
{
    for (int k = 0; k < 3; ++k) {
        const double h = 0.1 / std::pow(2.0, k);
        const double rk = decay_error(integrator_kind::rk4, h) / decay_error(integrator_kind::rk4, h / 2);
        const double eu = decay_error(integrator_kind::euler, h) / decay_error(integrator_kind::euler, h / 2);
        CHECK(rk >= 12.0);
        CHECK(rk <= 20.0);
        CHECK(eu >= 1.8);
        CHECK(eu <= 2.2);
    }
}

TEST_CASE("capsule steps the inner model")
{
    SUBCASE("decay, one rk4 substep")
    {
        me_capsule c(std::make_unique<linear_me>(std::vector<std::vector<double>>{{-1.0}}, std::vector<double>{0.0},
                                                 std::vector<double>{1.0}),
                     integrator_kind::rk4, 0.1, 0.1);
        c.initialize(0.0, {});
        CHECK(std::get<double>(c.get_output(1)) == 1.0);
        REQUIRE(c.do_step(0.0, 0.1) == step_status::ok);
        CHECK(std::abs(std::get<double>(c.get_output(1)) - 0.9048374) <= 1e-6);
        CHECK(c.time() == doctest::Approx(0.1));
    }
    SUBCASE("step size must be a multiple of the internal step")
    {
        auto inner = [] {
            return std::make_unique<linear_me>(std::vector<std::vector<double>>{{-1.0}}, std::vector<double>{0.0},
                                               std::vector<double>{1.0});
        };
        CHECK_THROWS_AS(me_capsule(inner(), integrator_kind::rk4, 0.03, 0.1), error);
        me_capsule c(inner(), integrator_kind::euler, 0.01, 0.1);
        c.initialize(0.0, {});
        CHECK(c.do_step(0.0, 0.105) == step_status::error);
        CHECK(c.do_step(0.0, 0.0) == step_status::error);
        CHECK(c.do_step(0.0, 0.2) == step_status::ok);
    }
    SUBCASE("non-finite derivative leaves the state untouched")
    {
        me_capsule c(std::make_unique<linear_me>(std::vector<std::vector<double>>{{1.0}}, std::vector<double>{1.0},
                                                 std::vector<double>{1.0}),
                     integrator_kind::rk4, 0.1, 0.1);
        c.initialize(0.0, {});
        c.set_input(0, INFINITY);
        CHECK(c.do_step(0.0, 0.1) == step_status::error);
        CHECK(c.last_error().find("solver failure") != std::string::npos);
        CHECK(std::get<double>(c.get_output(1)) == 1.0);
    }
}

TEST_CASE("capsule matches the matrix exponential on a linear system")
{
    const mat2 a{{{-1.0, 2.0}, {-3.0, -4.0}}};
    const std::array<double, 2> b{0.5, 1.0};
    const std::array<double, 2> x0{1.0, -0.5};
    const double u = 0.8, dt = 0.05;

    me_capsule c(std::make_unique<linear_me>(std::vector<std::vector<double>>{{a[0][0], a[0][1]}, {a[1][0], a[1][1]}},
                                             std::vector<double>{b[0], b[1]}, std::vector<double>{x0[0], x0[1]}),
                 integrator_kind::rk4, dt / 100, dt);
    c.initialize(0.0, {});
    c.set_input(0, u);

    // x(t) = e^{At} x0 + A^{-1} (e^{At} - I) b u
    const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    const mat2 ainv{{{a[1][1] / det, -a[0][1] / det}, {-a[1][0] / det, a[0][0] / det}}};
    double worst = 0.0;
    for (int k = 1; k <= 40; ++k) {
        REQUIRE(c.do_step((k - 1) * dt, dt) == step_status::ok);
        const mat2 e = expm2(a, k * dt);
        std::array<double, 2> forced{};
        for (int i = 0; i < 2; ++i)
            forced[i] = (e[i][0] - (i == 0)) * b[0] * u + (e[i][1] - (i == 1)) * b[1] * u;
        for (int i = 0; i < 2; ++i) {
            const double exact = e[i][0] * x0[0] + e[i][1] * x0[1] + ainv[i][0] * forced[0] + ainv[i][1] * forced[1];
            const double got = std::get<double>(c.get_output(static_cast<value_ref>(i + 1)));
            worst = std::max(worst, std::abs(got - exact) / std::max(std::abs(exact), 1e-12));
        }
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("capsule holds inputs and latches outputs")
{
    auto make = [] {
        return me_capsule(std::make_unique<linear_me>(std::vector<std::vector<double>>{{-2.0}},
                                                      std::vector<double>{2.0}, std::vector<double>{0.0}),
                          integrator_kind::rk4, 0.01, 0.1);
    };
    auto a = make();
    a.initialize(0.0, {});
    a.set_input(0, 1.0);
    REQUIRE(a.do_step(0.0, 0.1) == step_status::ok);
    const auto out = a.get_output(1);
    a.set_input(0, -5.0); // between steps
    CHECK(a.get_output(1) == out);

    // rollback reproduces the step bit for bit
    auto b = make();
    b.initialize(0.0, {});
    const auto snap = b.save_state();
    b.set_input(0, 3.0);
    REQUIRE(b.do_step(0.0, 0.1) == step_status::ok);
    b.restore_state(snap);
    b.set_input(0, 1.0);
    REQUIRE(b.do_step(0.0, 0.1) == step_status::ok);
    CHECK(b.get_output(1) == out);
}
