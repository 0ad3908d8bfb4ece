#include "cosim/federate/capsule.hpp"

#include <cmath>

namespace cosim::federate {

namespace {

// Number of internal steps in dt, or -1 when dt is not a multiple of h.
long substeps(double dt, double h)
{
    const double ratio = dt / h;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) return -1;
    return static_cast<long>(n);
}

} // namespace

me_capsule::me_capsule(std::unique_ptr<me_federate> inner, integrator_kind integrator, double internal_step,
                       double communication_step)
    : inner_(std::move(inner)), integrator_(integrator), internal_step_(internal_step)
{
    if (!inner_) throw error("me_capsule: no inner model");
    if (!(internal_step > 0.0)) throw error("me_capsule: internal step must be positive");
    if (substeps(communication_step, internal_step) < 0)
        throw error("me_capsule: communication step " + std::to_string(communication_step) +
                    " is not an integer multiple of internal step " + std::to_string(internal_step));
    description_ = inner_->description();
    description_.kind = model_kind::cs;
}

void me_capsule::initialize(double start_time, const parameter_set& params)
{
    inner_->initialize(start_time, params);
    inner_->set_time(start_time);
    time_ = start_time;
    last_error_.clear();
    latch_outputs();
}

void me_capsule::set_input(value_ref ref, const value& v) { inner_->set_input(ref, v); }

value me_capsule::get_output(value_ref ref) const
{
    auto it = outputs_.find(ref);
    if (it == outputs_.end()) throw error(description_.model_name + ": no output with value reference " + std::to_string(ref));
    return it->second;
}

void me_capsule::latch_outputs()
{
    outputs_.clear();
    for (const auto* v : description_.with_causality(causality::output)) outputs_[v->ref] = inner_->get_output(v->ref);
}

step_status me_capsule::update_outputs(double t)
{
    inner_->set_time(t);
    time_ = t;
    latch_outputs();
    return step_status::ok;
}

step_status me_capsule::do_step(double t, double dt)
{
    if (!(dt > 0.0)) {
        last_error_ = "step size must be positive";
        return step_status::error;
    }
    const long n = substeps(dt, internal_step_);
    if (n < 0) {
        last_error_ = "step size " + std::to_string(dt) + " is not a multiple of the internal step";
        return step_status::error;
    }

    const auto x0 = inner_->get_continuous_states();
    auto x = x0;
    const rhs_function rhs = [this](double tau, std::span<const double> xs, std::span<double> dx) {
        inner_->set_time(tau);
        inner_->set_continuous_states(xs);
        const auto d = inner_->get_derivatives();
        std::copy(d.begin(), d.end(), dx.begin());
    };
    try {
        integrate(integrator_, rhs, t, x, internal_step_, n);
    } catch (const solver_failure& e) {
        last_error_ = std::string("solver failure: ") + e.what();
        inner_->set_time(time_);
        inner_->set_continuous_states(x0);
        return step_status::error;
    }
    time_ = t + dt;
    inner_->set_time(time_);
    inner_->set_continuous_states(x);
    latch_outputs();
    return step_status::ok;
}

std::any me_capsule::save_state() const
{
    return state{time_, inner_->get_continuous_states(), outputs_};
}

void me_capsule::restore_state(const std::any& s)
{
    const auto& st = std::any_cast<const state&>(s);
    time_ = st.time;
    inner_->set_time(st.time);
    inner_->set_continuous_states(st.x);
    outputs_ = st.outputs;
}

} // namespace cosim::federate
