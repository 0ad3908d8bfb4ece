#include "cosim/testspec/workflow.hpp"

#include "cosim/common/json_io.hpp"

#include <array>
#include <string>

namespace cosim::testspec {

namespace jio = cosim::json_io;
using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 7> stage_names{
    "test_case", "ri_capabilities", "test_spec", "experiment_spec", "execution", "pre_assessment", "evaluation"};
constexpr std::array<std::string_view, 2> event_names{"proceed", "loop_back"};

} // namespace

std::string_view to_string(stage s) { return stage_names[static_cast<std::size_t>(s)]; }
std::string_view to_string(workflow_event e) { return event_names[static_cast<std::size_t>(e)]; }

std::optional<stage> parse_stage(std::string_view s)
{
    for (std::size_t i = 0; i < stage_names.size(); ++i)
        if (stage_names[i] == s) return static_cast<stage>(i);
    return std::nullopt;
}

std::optional<workflow_event> parse_workflow_event(std::string_view s)
{
    for (std::size_t i = 0; i < event_names.size(); ++i)
        if (event_names[i] == s) return static_cast<workflow_event>(i);
    return std::nullopt;
}

illegal_transition::illegal_transition(stage from, workflow_event e)
    : error("illegal transition: " + std::string(to_string(e)) + " at stage " + std::string(to_string(from))),
      from_(from),
      event_(e)
{
}

workflow_state advance_workflow(const workflow_state& s, workflow_event e)
{
    stage next;
    if (e == workflow_event::proceed) {
        if (s.current == stage::evaluation) throw illegal_transition(s.current, e);
        next = static_cast<stage>(static_cast<int>(s.current) + 1);
    } else {
        if (s.current != stage::pre_assessment) throw illegal_transition(s.current, e);
        next = stage::test_spec;
    }
    auto out = s;
    out.history.push_back({s.current, e, next});
    out.current = next;
    return out;
}

json to_json(const workflow_state& s)
{
    json h = json::array();
    for (const auto& t : s.history) h.push_back({{"from", to_string(t.from)}, {"event", to_string(t.event)}, {"to", to_string(t.to)}});
    return {{"stage", to_string(s.current)}, {"history", h}};
}

workflow_state workflow_state_from_json(const json& j)
{
    jio::check_keys(j, {"stage", "history"}, "");
    auto stage_at = [](const json& obj, const char* key, const std::string& path) {
        const auto name = jio::get_string(obj, key, path);
        auto st = parse_stage(name);
        if (!st) throw schema_error(path + "/" + key, "unknown stage '" + name + "'");
        return *st;
    };
    workflow_state s;
    s.current = stage_at(j, "stage", "");
    if (j.contains("history")) {
        const auto& h = j.at("history");
        jio::require_array(h, "/history");
        for (std::size_t i = 0; i < h.size(); ++i) {
            const auto p = "/history/" + std::to_string(i);
            jio::check_keys(h[i], {"from", "event", "to"}, p);
            const auto ev = jio::get_string(h[i], "event", p);
            auto e = parse_workflow_event(ev);
            if (!e) throw schema_error(p + "/event", "unknown event '" + ev + "'");
            s.history.push_back({stage_at(h[i], "from", p), *e, stage_at(h[i], "to", p)});
        }
    }
    return s;
}

} // namespace cosim::testspec
