#include "cosim/federate/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cosim::federate {

namespace {

void eval(const rhs_function& f, double t, std::span<const double> x, std::span<double> dx)
{
    f(t, x, dx);
    if (!std::all_of(dx.begin(), dx.end(), [](double d) { return std::isfinite(d); }))
        throw solver_failure("non-finite derivative at t=" + std::to_string(t));
}

} // namespace

std::string_view to_string(integrator_kind k)
{
    return k == integrator_kind::euler ? "euler" : "rk4";
}

std::optional<integrator_kind> parse_integrator(std::string_view s)
{
    if (s == "euler") return integrator_kind::euler;
    if (s == "rk4") return integrator_kind::rk4;
    return std::nullopt;
}

void integrate_step(integrator_kind kind, const rhs_function& f, double t, std::span<double> x, double h)
{
    const std::size_t n = x.size();
    if (kind == integrator_kind::euler) {
        std::vector<double> k1(n);
        eval(f, t, x, k1);
        for (std::size_t i = 0; i < n; ++i) x[i] += h * k1[i];
        return;
    }

    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    eval(f, t, x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    eval(f, t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    eval(f, t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    eval(f, t + h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

void integrate(integrator_kind kind, const rhs_function& f, double t, std::span<double> x, double h, long steps)
{
    for (long s = 0; s < steps; ++s) integrate_step(kind, f, t + static_cast<double>(s) * h, x, h);
}

} // namespace cosim::federate
