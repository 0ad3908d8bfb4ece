#include "cosim/models/library.hpp"

#include "cosim/models/federates.hpp"

#include <algorithm>
#include <map>

namespace cosim::models {

const std::vector<std::string>& model_names()
{
    static const std::vector<std::string> names{"comm_delay", "equivalent", "fault_schedule", "frt_fsm",
                                                "grid",       "qv_controller", "wtg"};
    return names;
}

bool is_model(const std::string& name)
{
    const auto& n = model_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

namespace {

const std::map<std::string, std::vector<port_tag>>& tag_table()
{
    static const std::map<std::string, std::vector<port_tag>> t{
        {"grid",
         {{"U_pcc", "transmission grid", "pcc", "U"},
          {"U_pcc", "collection grid", "lv", "U"},
          {"U_pcc", "collection grid", "meas", "U"},
          {"theta_pcc", "transmission grid", "pcc", "theta"},
          {"P_pcc", "transmission grid", "pcc", "P"},
          {"Q_pcc", "transmission grid", "pcc", "Q"},
          {"i_d", "collection grid", "lv", "i_d"},
          {"i_q", "collection grid", "lv", "i_q"}}},
        {"wtg",
         {{"I_d", "grid-side converter", "ac", "i_d"},
          {"I_q", "grid-side converter", "ac", "i_q"},
          {"chopper_on", "grid-side converter", "dc", "chopper"},
          {"V_pcc", "grid-side converter", "ac", "U"},
          {"Q_ref", "vector control", "qref", "Q"},
          {"frt_state", "vector control", "frt", "state"},
          {"i_q_boost", "vector control", "frt", "i_q_boost"}}},
        {"frt_fsm",
         {{"U", "FRT control", "meas", "U"},
          {"state", "FRT control", "cmd", "state"},
          {"i_q_boost", "FRT control", "cmd", "i_q_boost"},
          {"trip", "FRT control", "cmd", "trip"}}},
        {"qv_controller",
         {{"U", "WPP controller", "meas", "U"},
          {"frt_state", "WPP controller", "frt", "state"},
          {"Q_ref", "WPP controller", "qref", "Q"}}},
        {"comm_delay", {{"in", "communication network", "in", "Q"}, {"out", "communication network", "out", "Q"}}},
    };
    return t;
}

std::unique_ptr<federate::cs_federate> make_cs(const master::federate_plan& f)
{
    if (f.model == "grid") return std::make_unique<grid_federate>();
    if (f.model == "frt_fsm") return std::make_unique<frt_fsm>();
    if (f.model == "qv_controller") return std::make_unique<qv_controller>();
    if (f.model == "comm_delay") return std::make_unique<comm_delay>();
    if (f.model == "fault_schedule") return std::make_unique<fault_schedule>();
    if (f.model == "equivalent") {
        if (!f.description) throw error("equivalent '" + f.id + "' needs a port description");
        return std::make_unique<equivalent>(*f.description);
    }
    return nullptr;
}

} // namespace

const std::vector<port_tag>& port_tags(const std::string& model)
{
    static const std::vector<port_tag> none;
    auto it = tag_table().find(model);
    return it == tag_table().end() ? none : it->second;
}

std::optional<std::string> parameter_for(const std::string& model, const std::string& type_label,
                                         const std::string& attribute)
{
    if (model == "grid" && type_label == "collection grid") {
        if (attribute == "r_eq") return "pcc_r";
        if (attribute == "x_eq") return "pcc_x";
    }
    if (model == "equivalent" || !is_model(model)) return std::nullopt;
    const auto md = describe(model);
    const auto* v = md.find(attribute);
    if (v && v->causality == federate::causality::parameter) return attribute;
    return std::nullopt;
}

federate::model_description describe(const master::federate_plan& f)
{
    if (f.model == "wtg") return wtg_model().description();
    if (auto cs = make_cs(f)) return cs->description();
    throw error("unknown model '" + f.model + "'");
}

federate::model_description describe(const std::string& model)
{
    master::federate_plan f;
    f.model = model;
    if (model == "equivalent") {
        f.description.emplace();
        f.description->model_name = "equivalent";
    }
    return describe(f);
}

master::scenario build_scenario(const master::scenario_plan& plan)
{
    master::scenario s;
    s.stop_time = plan.stop_time;
    s.seed = plan.seed;
    s.epsilon = plan.epsilon;
    s.max_iterations = plan.max_iterations;
    for (const auto& f : plan.federates) {
        auto params = f.params;
        if (f.model == "comm_delay" && !params.count("seed"))
            params["seed"] = static_cast<std::int64_t>(master::derive_seed(plan.seed, f.id));
        if (f.model == "wtg") {
            s.add_federate(f.id, std::make_unique<wtg_model>(), f.step_size, std::move(params),
                           f.integrator.value_or(federate::integrator_kind::rk4), f.internal_step);
            continue;
        }
        auto cs = make_cs(f);
        if (!cs) throw error("unknown model '" + f.model + "' for federate '" + f.id + "'");
        s.add_federate(f.id, std::move(cs), f.step_size, std::move(params));
    }
    for (const auto& c : plan.connections) s.connect(c.source, c.target, c.mode, c.initial);
    return s;
}

} // namespace cosim::models
