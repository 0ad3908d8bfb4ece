#pragma once

#include "cosim/federate/integrators.hpp"
#include "cosim/federate/model_description.hpp"
#include "cosim/master/scenario.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace cosim::master {

/// One federate instance of a plan. `model` names a library model.
struct federate_plan {
    std::string id;
    std::string model;
    double step_size = 0.0;
    parameter_set params;
    /// Model-exchange federates only.
    std::optional<federate::integrator_kind> integrator;
    std::optional<double> internal_step;
    /// Port list of an "equivalent" (source/sink stand-in).
    std::optional<federate::model_description> description;

    friend bool operator==(const federate_plan&, const federate_plan&) = default;
};

struct connection_plan {
    endpoint source;
    endpoint target;
    connection_mode mode = connection_mode::direct;
    std::optional<value> initial;

    friend bool operator==(const connection_plan&, const connection_plan&) = default;
};

/// Serializable description from which a scenario is built.
struct scenario_plan {
    double stop_time = 0.0;
    std::uint64_t seed = 0;
    double epsilon = 1e-6;
    int max_iterations = 50;
    std::vector<federate_plan> federates;
    std::vector<connection_plan> connections;

    const federate_plan* find(const std::string& id) const;
    federate_plan* find(const std::string& id);

    friend bool operator==(const scenario_plan&, const scenario_plan&) = default;
};

nlohmann::json to_json(const scenario_plan& p);
scenario_plan scenario_plan_from_json(const nlohmann::json& j, const std::string& path = "");

/// Untyped JSON scalar to a value: booleans, integers, reals, strings.
value scalar_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json scalar_to_json(const value& v);

} // namespace cosim::master
