#pragma once

#include "cosim/federate/integrators.hpp"
#include "cosim/federate/interfaces.hpp"

#include <memory>

namespace cosim::federate {

/// Presents a model-exchange federate through the stepping interface by
/// integrating its states with a fixed-step solver inside do_step().
///
/// Inputs are held constant over a step and outputs are latched at its end,
/// so writing an input between steps never changes the previous step's outputs. The communication step must be an
/// integer multiple of the internal step; this is checked on construction and
/// again for every do_step() call.
class me_capsule final : public cs_federate {
public:
    me_capsule(std::unique_ptr<me_federate> inner, integrator_kind integrator, double internal_step,
               double communication_step);

    const model_description& description() const override { return description_; }

    void initialize(double start_time, const parameter_set& params) override;
    void set_input(value_ref ref, const value& v) override;
    value get_output(value_ref ref) const override;
    step_status update_outputs(double t) override;
    step_status do_step(double t, double dt) override;
    std::string last_error() const override { return last_error_; }

    bool supports_rollback() const override { return true; }
    std::any save_state() const override;
    void restore_state(const std::any& state) override;

    double time() const noexcept { return time_; }
    const me_federate& inner() const noexcept { return *inner_; }
    integrator_kind integrator() const noexcept { return integrator_; }
    double internal_step() const noexcept { return internal_step_; }

private:
    struct state {
        double time;
        std::vector<double> x;
        std::map<value_ref, value> outputs;
    };

    std::unique_ptr<me_federate> inner_;
    model_description description_;
    integrator_kind integrator_;
    double internal_step_;
    void latch_outputs();

    double time_ = 0.0;
    std::map<value_ref, value> outputs_; // latched at the end of each step
    std::string last_error_;
};

} // namespace cosim::federate
