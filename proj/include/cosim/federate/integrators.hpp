#pragma once

#include "cosim/common/error.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string_view>

namespace cosim::federate {

enum class integrator_kind { euler, rk4 };

std::string_view to_string(integrator_kind k);
std::optional<integrator_kind> parse_integrator(std::string_view s);

class solver_failure : public error {
public:
    using error::error;
};

/// dx/dt = f(t, x), written into `dxdt`.
using rhs_function = std::function<void(double t, std::span<const double> x, std::span<double> dxdt)>;

/// One explicit step of size h, in place. Throws solver_failure when a
/// derivative evaluation is not finite.
void integrate_step(integrator_kind kind, const rhs_function& f, double t, std::span<double> x, double h);

/// `steps` fixed steps of size h starting at t.
void integrate(integrator_kind kind, const rhs_function& f, double t, std::span<double> x, double h, long steps);

} // namespace cosim::federate
