#pragma once

#include "cosim/common/error.hpp"

#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

// Test workflow: seven stages in fixed order; the
// pre-assessment may send the campaign back to the test specification.
namespace cosim::testspec {

enum class stage {
    test_case,
    ri_capabilities,
    test_spec,
    experiment_spec,
    execution,
    pre_assessment,
    evaluation,
};

enum class workflow_event { proceed, loop_back };

std::string_view to_string(stage s);
std::string_view to_string(workflow_event e);
std::optional<stage> parse_stage(std::string_view s);
std::optional<workflow_event> parse_workflow_event(std::string_view s);

class illegal_transition : public error {
public:
    illegal_transition(stage from, workflow_event e);
    stage from() const noexcept { return from_; }
    workflow_event event() const noexcept { return event_; }

private:
    stage from_;
    workflow_event event_;
};

struct transition {
    stage from;
    workflow_event event;
    stage to;

    friend bool operator==(const transition&, const transition&) = default;
};

struct workflow_state {
    stage current = stage::test_case;
    std::vector<transition> history;

    friend bool operator==(const workflow_state&, const workflow_state&) = default;
};

/// Throws illegal_transition: proceed from evaluation, loop_back anywhere
/// but the pre-assessment.
workflow_state advance_workflow(const workflow_state& s, workflow_event e);

nlohmann::json to_json(const workflow_state& s);
workflow_state workflow_state_from_json(const nlohmann::json& j);

} // namespace cosim::testspec
