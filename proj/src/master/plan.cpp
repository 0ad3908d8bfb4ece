#include "cosim/master/plan.hpp"

#include "cosim/common/json_io.hpp"

#include <algorithm>

namespace cosim::master {

namespace jio = cosim::json_io;
using nlohmann::json;

const federate_plan* scenario_plan::find(const std::string& id) const
{
    auto it = std::find_if(federates.begin(), federates.end(), [&](const auto& f) { return f.id == id; });
    return it == federates.end() ? nullptr : &*it;
}

federate_plan* scenario_plan::find(const std::string& id)
{
    return const_cast<federate_plan*>(std::as_const(*this).find(id));
}

value scalar_from_json(const json& j, const std::string& path)
{
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    throw schema_error(path, "expected a scalar");
}

json scalar_to_json(const value& v)
{
    return std::visit([](const auto& x) { return json(x); }, v);
}

json to_json(const scenario_plan& p)
{
    json feds = json::array();
    for (const auto& f : p.federates) {
        json params = json::object();
        for (const auto& [k, v] : f.params) params[k] = scalar_to_json(v);
        json j{{"id", f.id}, {"model", f.model}, {"step_size", f.step_size}, {"params", params}};
        if (f.integrator) j["integrator"] = std::string(federate::to_string(*f.integrator));
        if (f.internal_step) j["internal_step"] = *f.internal_step;
        if (f.description) j["description"] = federate::to_json(*f.description);
        feds.push_back(std::move(j));
    }
    json conns = json::array();
    for (const auto& c : p.connections) {
        json j{{"source", c.source.str()}, {"target", c.target.str()}, {"mode", std::string(to_string(c.mode))}};
        if (c.initial) j["initial"] = scalar_to_json(*c.initial);
        conns.push_back(std::move(j));
    }
    return {{"stop_time", p.stop_time},   {"seed", p.seed},   {"epsilon", p.epsilon},
            {"max_iterations", p.max_iterations}, {"federates", feds}, {"connections", conns}};
}

scenario_plan scenario_plan_from_json(const json& j, const std::string& path)
{
    jio::require_object(j, path);
    jio::check_keys(j, {"stop_time", "seed", "epsilon", "max_iterations", "federates", "connections"}, path);
    scenario_plan p;
    p.stop_time = jio::get_number(j, "stop_time", path);
    if (!(p.stop_time >= 0.0)) throw schema_error(path + "/stop_time", "must not be negative");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw schema_error(path + "/seed", "expected non-negative integer");
        p.seed = j["seed"].get<std::uint64_t>();
    }
    p.epsilon = jio::opt_number(j, "epsilon", path, 1e-6);
    if (!(p.epsilon > 0.0)) throw schema_error(path + "/epsilon", "must be positive");
    if (j.contains("max_iterations")) {
        if (!j["max_iterations"].is_number_integer() || j["max_iterations"].get<int>() < 1)
            throw schema_error(path + "/max_iterations", "expected positive integer");
        p.max_iterations = j["max_iterations"].get<int>();
    }

    const auto& feds = jio::require(j, "federates", path);
    jio::require_array(feds, path + "/federates");
    for (std::size_t i = 0; i < feds.size(); ++i) {
        const auto fp = path + "/federates/" + std::to_string(i);
        const auto& fj = feds[i];
        jio::require_object(fj, fp);
        jio::check_keys(fj, {"id", "model", "step_size", "params", "integrator", "internal_step", "description"}, fp);
        federate_plan f;
        f.id = jio::get_string(fj, "id", fp);
        f.model = jio::get_string(fj, "model", fp);
        f.step_size = jio::get_number(fj, "step_size", fp);
        if (!(f.step_size > 0.0)) throw schema_error(fp + "/step_size", "must be positive");
        if (fj.contains("params")) {
            jio::require_object(fj["params"], fp + "/params");
            for (const auto& [k, v] : fj["params"].items()) f.params[k] = scalar_from_json(v, fp + "/params/" + k);
        }
        if (fj.contains("integrator")) {
            const auto s = jio::get_string(fj, "integrator", fp);
            f.integrator = federate::parse_integrator(s);
            if (!f.integrator) throw schema_error(fp + "/integrator", "unknown integrator '" + s + "'");
        }
        if (fj.contains("internal_step")) {
            f.internal_step = jio::get_number(fj, "internal_step", fp);
            if (!(*f.internal_step > 0.0)) throw schema_error(fp + "/internal_step", "must be positive");
        }
        if (fj.contains("description"))
            f.description = federate::model_description_from_json(fj["description"], fp + "/description");
        if (p.find(f.id)) throw schema_error(fp + "/id", "duplicate federate id '" + f.id + "'");
        p.federates.push_back(std::move(f));
    }

    const auto& conns = jio::require(j, "connections", path);
    jio::require_array(conns, path + "/connections");
    for (std::size_t i = 0; i < conns.size(); ++i) {
        const auto cp = path + "/connections/" + std::to_string(i);
        const auto& cj = conns[i];
        jio::require_object(cj, cp);
        jio::check_keys(cj, {"source", "target", "mode", "initial"}, cp);
        connection_plan c;
        try {
            c.source = endpoint::parse(jio::get_string(cj, "source", cp));
            c.target = endpoint::parse(jio::get_string(cj, "target", cp));
            c.mode = parse_connection_mode(jio::opt_string(cj, "mode", cp, "direct"));
        } catch (const schema_error&) {
            throw;
        } catch (const error& e) {
            throw schema_error(cp, e.what());
        }
        if (cj.contains("initial")) c.initial = scalar_from_json(cj["initial"], cp + "/initial");
        p.connections.push_back(std::move(c));
    }
    return p;
}

} // namespace cosim::master
