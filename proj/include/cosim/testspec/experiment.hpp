#pragma once

#include "cosim/master/plan.hpp"
#include "cosim/sysconfig/operations.hpp"
#include "cosim/testspec/documents.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cosim::testspec {

/// SuT components the research infrastructure cannot host.
class infeasible_mapping : public error {
public:
    explicit infeasible_mapping(std::vector<std::string> core);
    const std::vector<std::string>& core() const noexcept { return core_; }

private:
    std::vector<std::string> core_;
};

/// Id of the aggregated stand-in for non-SuT components without a host.
inline constexpr const char* equivalent_id = "equivalent";

struct experiment {
    std::string id;
    std::string test_spec; // path as written
    /// Test-system component -> RI component, for hosted components.
    sysconfig::mapping_result mapping;
    /// Test-system component -> federate instance representing it.
    std::map<std::string, std::string> representation;
    master::scenario_plan plan;
    /// Output name -> recorded federate variable.
    std::map<std::string, master::endpoint> observe;
    /// Input name -> federate parameter (`instance.parameter`).
    std::map<std::string, master::endpoint> bindings;
    std::map<std::string, scalar> assessment;

    std::shared_ptr<const test_specification> spec;

    friend bool operator==(const experiment& a, const experiment& b);
};

struct compile_options {
    double step_size = 0.01;
    /// Internal integration step of model-exchange federates.
    double internal_step = 0.001;
    std::uint64_t seed = 0;
    /// Default: the latest wait_until time of the test design.
    std::optional<double> stop_time;
};

/// Maps the test system onto the RI and derives the scenario plan. Throws
/// infeasible_mapping, and cosim::error when the specification does not
/// validate or a port cannot be wired.
experiment compile_experiment(const test_specification& spec, const sysconfig::container& ri,
                              const compile_options& opt = {});

validation_report validate_experiment(const experiment& exp);

experiment parse_experiment(const nlohmann::json& doc, const std::filesystem::path& base_dir);
experiment load_experiment(const std::filesystem::path& file);
nlohmann::json to_json(const experiment& exp);

/// Document check used by the CLI and the fixture corpus: dispatches on the
/// document kind (system configuration, test case, test spec, experiment)
/// and collects schema, reference and validation diagnostics.
validation_report check_document(const std::filesystem::path& file);

} // namespace cosim::testspec
