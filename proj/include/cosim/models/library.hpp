#pragma once

#include "cosim/master/plan.hpp"
#include "cosim/master/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cosim::models {

/// Names of the built-in models ("grid", "wtg", "frt_fsm", "qv_controller",
/// "comm_delay", "fault_schedule", "equivalent").
const std::vector<std::string>& model_names();

bool is_model(const std::string& name);

/// Port and parameter declaration of a built-in model. For "equivalent" the
/// description comes from the plan.
federate::model_description describe(const master::federate_plan& f);
federate::model_description describe(const std::string& model);

/// Where a model variable sits in a system configuration: the terminal
/// `terminal` of a component of type `type_label`, carrying `quantity`.
/// Outputs and inputs tagged on terminals that share a connection point and
/// carry the same quantity are wired together.
struct port_tag {
    std::string variable;
    std::string type_label;
    std::string terminal;
    std::string quantity;
};

const std::vector<port_tag>& port_tags(const std::string& model);

/// Parameter of `model` fed by attribute `attribute` of a component of type
/// `type_label`. Attributes named like a model parameter map to it directly.
std::optional<std::string> parameter_for(const std::string& model, const std::string& type_label,
                                         const std::string& attribute);

/// Instantiates every federate of the plan and wires its connections.
/// Stochastic models without an explicit seed parameter get
/// derive_seed(plan seed, instance id).
master::scenario build_scenario(const master::scenario_plan& plan);

} // namespace cosim::models
