#include "cosim/testspec/experiment.hpp"

#include "cosim/common/json_io.hpp"
#include "cosim/master/schedule.hpp"
#include "cosim/models/library.hpp"
#include "cosim/sysconfig/io.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace cosim::testspec {

using nlohmann::json;
namespace jio = cosim::json_io;
namespace fs = std::filesystem;
using federate::causality;
using federate::model_description;
using federate::variable;
using master::connection_mode;
using master::endpoint;

namespace {

std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
}

federate::value to_value(const scalar& s)
{
    return std::visit([](const auto& x) -> federate::value { return x; }, s);
}

std::pair<std::string, std::string> split_ref(const std::string& ref)
{
    const auto dot = ref.find('.');
    if (dot == std::string::npos) return {ref, ""};
    return {ref.substr(0, dot), ref.substr(dot + 1)};
}

const std::string* attribute_string(const sysconfig::component& c, const std::string& key)
{
    auto it = c.attributes.find(key);
    if (it == c.attributes.end()) return nullptr;
    return std::get_if<std::string>(&it->second);
}

struct edge {
    endpoint source;
    endpoint target;
    connection_mode mode = connection_mode::direct;
    std::optional<federate::value> initial;
};

// Strongly connected instance sets (size > 1) over the direct edges.
std::vector<std::vector<std::string>> direct_cycles(const std::vector<edge>& edges)
{
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : edges) {
        adj[e.source.instance];
        adj[e.target.instance];
        if (e.mode == connection_mode::direct) adj[e.source.instance].push_back(e.target.instance);
    }
    std::map<std::string, int> index, low;
    std::vector<std::string> stack;
    std::set<std::string> on_stack;
    std::vector<std::vector<std::string>> out;
    int counter = 0;
    std::function<void(const std::string&)> visit = [&](const std::string& v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack.insert(v);
        for (const auto& w : adj[v]) {
            if (!index.count(w)) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack.count(w)) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::string> scc;
            std::string w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack.erase(w);
                scc.push_back(w);
            } while (w != v);
            if (scc.size() > 1) {
                std::sort(scc.begin(), scc.end());
                out.push_back(std::move(scc));
            }
        }
    };
    for (const auto& [v, _] : adj)
        if (!index.count(v)) visit(v);
    std::sort(out.begin(), out.end());
    return out;
}

std::map<std::string, std::string> scc_of(const std::vector<std::vector<std::string>>& sccs)
{
    std::map<std::string, std::string> m;
    for (const auto& s : sccs)
        for (const auto& id : s) m[id] = s.front();
    return m;
}

// Cycle resolution: sampled controller outputs feeding a model-exchange
// federate are delayed by one step; the remaining loops iterate on the
// continuous outputs; whatever is still cyclic iterates into the smallest id.
void resolve_cycles(std::vector<edge>& edges, const std::map<std::string, model_description>& md)
{
    auto var_of = [&](const endpoint& e) { return md.at(e.instance).find(e.variable); };
    auto kind_of = [&](const std::string& id) { return md.at(id).kind; };

    for (auto& e : edges)
        if (e.target.instance == equivalent_id && e.mode == connection_mode::direct) {
            e.mode = connection_mode::time_shifted;
            e.initial = var_of(e.source)->start;
        }

    auto in_same = [](const std::map<std::string, std::string>& m, const edge& e) {
        auto a = m.find(e.source.instance), b = m.find(e.target.instance);
        return a != m.end() && b != m.end() && a->second == b->second;
    };

    auto comp = scc_of(direct_cycles(edges));
    for (auto& e : edges) {
        if (e.mode != connection_mode::direct || !in_same(comp, e)) continue;
        const auto* v = var_of(e.source);
        if (v->variability != federate::variability::continuous && kind_of(e.target.instance) == federate::model_kind::me) {
            e.mode = connection_mode::time_shifted;
            e.initial = v->start;
        }
    }
    comp = scc_of(direct_cycles(edges));
    for (auto& e : edges)
        if (e.mode == connection_mode::direct && in_same(comp, e) &&
            kind_of(e.source.instance) == federate::model_kind::me)
            e.mode = connection_mode::iterative;

    for (auto sccs = direct_cycles(edges); !sccs.empty(); sccs = direct_cycles(edges)) {
        const auto& scc = sccs.front();
        const std::set<std::string> members(scc.begin(), scc.end());
        for (auto& e : edges)
            if (e.mode == connection_mode::direct && e.target.instance == scc.front() &&
                members.count(e.source.instance))
                e.mode = connection_mode::iterative;
    }
}

json mapping_json(const sysconfig::mapping_result& m)
{
    return {{"feasible", m.feasible}, {"assignment", m.assignment}, {"unsatisfiable", m.unsatisfiable}};
}

std::map<std::string, std::string> string_map(const json& j, const std::string& path)
{
    jio::require_object(j, path);
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_string()) throw schema_error(path + "/" + k, "expected string");
        out[k] = v.get<std::string>();
    }
    return out;
}

std::map<std::string, endpoint> endpoint_map(const json& j, const std::string& path)
{
    std::map<std::string, endpoint> out;
    for (const auto& [k, v] : string_map(j, path)) {
        try {
            out[k] = endpoint::parse(v);
        } catch (const error& e) {
            throw schema_error(path + "/" + k, e.what());
        }
    }
    return out;
}

json endpoint_map_json(const std::map<std::string, endpoint>& m)
{
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = v.str();
    return j;
}

} // namespace

infeasible_mapping::infeasible_mapping(std::vector<std::string> core)
    : error("infeasible mapping: no RI capability for " + join(core)), core_(std::move(core))
{
}

bool operator==(const experiment& a, const experiment& b)
{
    const bool specs = (!a.spec || !b.spec) ? (!a.spec && !b.spec) : *a.spec == *b.spec;
    return a.id == b.id && a.test_spec == b.test_spec && a.mapping == b.mapping &&
           a.representation == b.representation && a.plan == b.plan && a.observe == b.observe &&
           a.bindings == b.bindings && a.assessment == b.assessment && specs;
}

experiment compile_experiment(const test_specification& spec, const sysconfig::container& ri,
                              const compile_options& opt)
{
    for (const auto& d : validate_test_specification(spec))
        if (d.level == severity::error) throw error("test specification does not validate: " + format_diagnostic(d));
    const auto& ts = *spec.ts;
    const std::set<std::string> sut(spec.tc->sut.begin(), spec.tc->sut.end());

    auto mapping = sysconfig::map_to_ri(ts, ri);
    std::vector<std::string> core;
    for (const auto& id : mapping.unsatisfiable)
        if (sut.count(id)) core.push_back(id);
    if (!core.empty()) throw infeasible_mapping(core);

    experiment exp;
    exp.id = spec.id + ".experiment";
    exp.spec = std::make_shared<const test_specification>(spec);

    // federate instances: RI components sharing a `federate` attribute form one instance
    struct instance {
        std::string model;
        std::vector<const sysconfig::component*> components;
    };
    std::map<std::string, instance> instances;
    bool needs_equivalent = false;
    for (const auto& c : ts.components) {
        auto it = mapping.assignment.find(c.id);
        if (it == mapping.assignment.end()) {
            exp.representation[c.id] = equivalent_id;
            needs_equivalent = true;
            continue;
        }
        const auto* host = ri.find_component(it->second);
        const auto* model = attribute_string(*host, "model");
        if (!model) throw error("RI component '" + host->id + "' has no model attribute");
        if (!models::is_model(*model)) throw error("RI component '" + host->id + "' names unknown model '" + *model + "'");
        const auto* fed = attribute_string(*host, "federate");
        const std::string id = fed ? *fed : host->id;
        if (id == equivalent_id) throw error("federate id '" + id + "' is reserved");
        auto& inst = instances[id];
        if (!inst.model.empty() && inst.model != *model)
            throw error("federate '" + id + "' is assigned models '" + inst.model + "' and '" + *model + "'");
        inst.model = *model;
        inst.components.push_back(&c);
        exp.representation[c.id] = id;
    }
    exp.mapping = mapping;
    exp.mapping.unsatisfiable.clear();
    exp.mapping.feasible = true;

    std::map<std::string, model_description> md;
    auto& plan = exp.plan;
    plan.seed = opt.seed;
    for (const auto& [id, inst] : instances) {
        master::federate_plan f;
        f.id = id;
        f.model = inst.model;
        f.step_size = opt.step_size;
        const auto d = models::describe(inst.model);
        if (d.kind == federate::model_kind::me) {
            f.integrator = federate::integrator_kind::rk4;
            f.internal_step = opt.internal_step;
        }
        for (const auto* c : inst.components)
            for (const auto& [attr, v] : c->attributes) {
                const auto p = models::parameter_for(inst.model, c->type_label, attr);
                if (!p) continue;
                const auto val = federate::coerce(to_value(v), d.find(*p)->type);
                auto [it, fresh] = f.params.emplace(*p, val);
                if (!fresh && it->second != val)
                    throw error("conflicting values for parameter '" + *p + "' of federate '" + id + "'");
            }
        md[id] = d;
        plan.federates.push_back(std::move(f));
    }

    // data flow along the connection points
    model_description eq;
    eq.model_name = "equivalent";
    auto eq_port = [&](const std::string& name, const variable& like, causality c) {
        if (eq.find(name)) return;
        variable v;
        v.name = name;
        v.ref = static_cast<federate::value_ref>(eq.variables.size());
        v.type = like.type;
        v.causality = c;
        v.variability = federate::variability::discrete;
        v.start = like.start ? like.start : std::optional(federate::default_value(like.type));
        eq.variables.push_back(std::move(v));
    };
    auto tagged = [&](const std::string& inst, const sysconfig::component& c, const std::string& term, causality cz) {
        std::vector<std::pair<const variable*, std::string>> out;
        for (const auto& tag : models::port_tags(instances.at(inst).model)) {
            if (tag.type_label != c.type_label || tag.terminal != term) continue;
            const auto* v = md.at(inst).find(tag.variable);
            if (v && v->causality == cz) out.emplace_back(v, tag.quantity);
        }
        return out;
    };

    std::vector<edge> edges;
    std::map<endpoint, endpoint> driver;
    auto add_edge = [&](endpoint s, endpoint t) {
        auto [it, fresh] = driver.emplace(t, s);
        if (!fresh) {
            if (it->second != s)
                throw error("input " + t.str() + " is driven by both " + it->second.str() + " and " + s.str());
            return;
        }
        edges.push_back({std::move(s), std::move(t), connection_mode::direct, std::nullopt});
    };
    for (const auto& cp : ts.connection_points)
        for (const auto& a : cp.attached)
            for (const auto& b : cp.attached) {
                if (a == b) continue;
                const auto [ca_id, ta] = split_ref(a);
                const auto [cb_id, tb] = split_ref(b);
                const auto& ia = exp.representation.at(ca_id);
                const auto& ib = exp.representation.at(cb_id);
                if (ia == ib) continue;
                const auto& ca = *ts.find_component(ca_id);
                const auto& cb = *ts.find_component(cb_id);
                const auto dir_a = ca.find_terminal(ta)->dir, dir_b = cb.find_terminal(tb)->dir;
                if (ia == equivalent_id) {
                    // a stand-in only drives through terminals that can emit
                    if (dir_a == sysconfig::direction::in) continue;
                    for (const auto& [in, q] : tagged(ib, cb, tb, causality::input)) {
                        const auto name = ca_id + "_" + ta + "_" + q;
                        eq_port(name, *in, causality::output);
                        add_edge({equivalent_id, name}, {ib, in->name});
                    }
                } else if (ib == equivalent_id) {
                    if (dir_b == sysconfig::direction::out) continue;
                    for (const auto& [out, q] : tagged(ia, ca, ta, causality::output)) {
                        const auto name = cb_id + "_" + tb + "_" + q;
                        eq_port(name, *out, causality::input);
                        add_edge({ia, out->name}, {equivalent_id, name});
                    }
                } else {
                    for (const auto& [out, q] : tagged(ia, ca, ta, causality::output))
                        for (const auto& [in, q2] : tagged(ib, cb, tb, causality::input))
                            if (q == q2) add_edge({ia, out->name}, {ib, in->name});
                }
            }

    if (needs_equivalent) {
        master::federate_plan f;
        f.id = equivalent_id;
        f.model = "equivalent";
        f.step_size = opt.step_size;
        f.description = eq;
        md[equivalent_id] = eq;
        plan.federates.push_back(std::move(f));
        std::sort(plan.federates.begin(), plan.federates.end(),
                  [](const auto& x, const auto& y) { return x.id < y.id; });
    }

    resolve_cycles(edges, md);
    std::sort(edges.begin(), edges.end(), [](const edge& x, const edge& y) {
        return std::tie(x.source, x.target) < std::tie(y.source, y.target);
    });
    for (auto& e : edges) plan.connections.push_back({e.source, e.target, e.mode, e.initial});

    // stop time from the test design
    if (opt.stop_time) plan.stop_time = *opt.stop_time;
    else
        for (const auto& st : spec.test_design) {
            if (st.action != step_action::wait_until) continue;
            auto it = st.args.find("t");
            if (it != st.args.end())
                if (auto t = as_number(it->second)) plan.stop_time = std::max(plan.stop_time, *t);
        }
    if (plan.stop_time <= 0.0) throw error("no stop time: the test design has no wait_until step with a time");

    for (const auto& out : spec.outputs) {
        const auto [cid, member] = split_ref(out.signal);
        const auto& inst = exp.representation.at(cid);
        if (inst == equivalent_id)
            throw error("output '" + out.name + "' observes '" + cid + "', which is represented by an equivalent");
        const auto& c = *ts.find_component(cid);
        if (!c.find_terminal(member))
            throw error("output '" + out.name + "' names the static attribute '" + out.signal + "'");
        std::optional<endpoint> found;
        for (const auto& [v, q] : tagged(inst, c, member, causality::output))
            if (q == out.quantity) found = endpoint{inst, v->name};
        if (!found)
            throw error("output '" + out.name + "': no variable of federate '" + inst + "' carries " + out.quantity +
                        " at " + out.signal);
        exp.observe[out.name] = *found;
    }
    for (const auto& in : spec.inputs) {
        const auto [cid, attr] = split_ref(in.target);
        const auto& inst = exp.representation.at(cid);
        std::optional<std::string> p;
        if (inst != equivalent_id) p = models::parameter_for(instances.at(inst).model, ts.find_component(cid)->type_label, attr);
        if (!p) throw error("input '" + in.name + "' (" + in.target + ") is not a federate parameter");
        exp.bindings[in.name] = {inst, *p};
    }

    exp.assessment = assessment_defaults();
    for (const auto& [k, v] : spec.assessment) exp.assessment[k] = v;

    for (const auto& d : validate_experiment(exp))
        if (d.level == severity::error) throw error("compiled experiment does not validate: " + format_diagnostic(d));
    return exp;
}

validation_report validate_experiment(const experiment& exp)
{
    validation_report r;
    auto add = [&](const std::string& obj, const std::string& code, const std::string& msg) {
        r.push_back({severity::error, obj, code, msg});
    };
    if (!exp.spec) {
        add(exp.id, "dangling_reference", "experiment without a test specification");
        return r;
    }
    const auto& spec = *exp.spec;
    const auto& ts = *spec.ts;
    const auto& plan = exp.plan;

    bool models_known = true;
    std::map<std::string, model_description> md;
    for (const auto& f : plan.federates) {
        if (!models::is_model(f.model)) {
            add(f.id, "unknown_model", "unknown model '" + f.model + "'");
            models_known = false;
            continue;
        }
        if (f.model == "equivalent" && !f.description) {
            add(f.id, "scenario", "equivalent without port description");
            models_known = false;
            continue;
        }
        md[f.id] = models::describe(f);
    }

    const std::set<std::string> sut(spec.tc->sut.begin(), spec.tc->sut.end());
    std::set<std::string> used;
    for (const auto& c : ts.components) {
        auto it = exp.representation.find(c.id);
        if (it == exp.representation.end()) {
            add(c.id, sut.count(c.id) ? "sut_not_represented" : "unrepresented_component",
                "component has no federate instance");
            continue;
        }
        used.insert(it->second);
        if (!plan.find(it->second)) add(c.id, "unknown_instance", "instance '" + it->second + "' is not in the plan");
        else if (sut.count(c.id) && plan.find(it->second)->model == "equivalent")
            add(c.id, "sut_as_equivalent", "SuT component represented by a simple equivalent");
    }
    for (const auto& [cid, _] : exp.representation)
        if (!ts.find_component(cid)) add(cid, "dangling_reference", "not a test-system component");
    for (const auto& f : plan.federates)
        if (!used.count(f.id)) add(f.id, "orphan_federate", "federate represents no test-system component");

    // every connection must follow a connection point between the represented components
    for (const auto& c : plan.connections) {
        if (c.source.instance == equivalent_id || c.target.instance == equivalent_id) continue;
        bool backed = false;
        for (const auto& cp : ts.connection_points) {
            bool src = false, dst = false;
            for (const auto& a : cp.attached) {
                auto it = exp.representation.find(split_ref(a).first);
                if (it == exp.representation.end()) continue;
                src = src || it->second == c.source.instance;
                dst = dst || it->second == c.target.instance;
            }
            backed = backed || (src && dst);
        }
        if (!backed)
            add(c.source.str() + "->" + c.target.str(), "unbacked_connection",
                "no connection point joins the represented components");
    }

    if (plan.stop_time <= 0.0) add(exp.id, "stop_time", "stop time must be positive");
    if (models_known) {
        try {
            auto s = models::build_scenario(plan);
            master::build_schedule(s);
        } catch (const error& e) {
            add(exp.id, "scenario", e.what());
        }
    }

    auto port = [&](const endpoint& e, causality c) -> bool {
        auto it = md.find(e.instance);
        if (it == md.end()) return false;
        const auto* v = it->second.find(e.variable);
        return v && v->causality == c;
    };
    for (const auto& out : spec.outputs) {
        auto it = exp.observe.find(out.name);
        if (it == exp.observe.end()) add(out.name, "unobserved_output", "output has no recorded variable");
        else if (!port(it->second, causality::output))
            add(out.name, "unknown_observable", it->second.str() + " is not a federate output");
    }
    for (const auto& in : spec.inputs) {
        auto it = exp.bindings.find(in.name);
        if (it == exp.bindings.end()) add(in.name, "unbound_input", "input is not bound to a parameter");
        else if (!port(it->second, causality::parameter))
            add(in.name, "unbound_input", it->second.str() + " is not a federate parameter");
    }
    for (const auto& [k, v] : exp.assessment) {
        auto it = assessment_defaults().find(k);
        if (it == assessment_defaults().end()) add(k, "unknown_assessment_key", "unknown assessment parameter");
        else if (it->second.index() != v.index()) add(k, "unknown_assessment_key", "wrong value type");
    }
    sort_report(r);
    return r;
}

experiment parse_experiment(const json& doc, const fs::path& base_dir)
{
    jio::require_object(doc, "");
    const auto kind = jio::get_string(doc, "document", "");
    if (kind != "experiment") throw schema_error("/document", "expected \"experiment\", got \"" + kind + "\"");
    jio::check_keys(doc,
                    {"document", "id", "test_spec", "mapping", "representation", "scenario_plan", "observe",
                     "bindings", "assessment"},
                    "");
    experiment exp;
    exp.id = jio::get_string(doc, "id", "");
    exp.test_spec = jio::get_string(doc, "test_spec", "");

    const auto& m = jio::require(doc, "mapping", "");
    jio::check_keys(m, {"feasible", "assignment", "unsatisfiable"}, "/mapping");
    const auto& feasible = jio::require(m, "feasible", "/mapping");
    if (!feasible.is_boolean()) throw schema_error("/mapping/feasible", "expected boolean");
    exp.mapping.feasible = feasible.get<bool>();
    exp.mapping.assignment = string_map(jio::require(m, "assignment", "/mapping"), "/mapping/assignment");
    exp.mapping.unsatisfiable = jio::get_string_list(m, "unsatisfiable", "/mapping");

    exp.representation = string_map(jio::require(doc, "representation", ""), "/representation");
    exp.plan = master::scenario_plan_from_json(jio::require(doc, "scenario_plan", ""), "/scenario_plan");
    exp.observe = endpoint_map(jio::require(doc, "observe", ""), "/observe");
    exp.bindings = endpoint_map(jio::require(doc, "bindings", ""), "/bindings");
    const auto& a = jio::require(doc, "assessment", "");
    jio::require_object(a, "/assessment");
    for (const auto& [k, v] : a.items()) exp.assessment.emplace(k, scalar_from_json(v, "/assessment/" + k));

    try {
        exp.spec = std::make_shared<const test_specification>(
            load_test_specification((base_dir / exp.test_spec).lexically_normal()));
    } catch (const io_error&) {
        throw dangling_reference(exp.test_spec, "cannot open the referenced test specification");
    }
    return exp;
}

experiment load_experiment(const fs::path& file)
{
    return parse_experiment(jio::load_file(file), file.parent_path());
}

json to_json(const experiment& exp)
{
    json a = json::object();
    for (const auto& [k, v] : exp.assessment) a[k] = cosim::to_json(v);
    return {{"document", "experiment"},
            {"id", exp.id},
            {"test_spec", exp.test_spec},
            {"mapping", mapping_json(exp.mapping)},
            {"representation", exp.representation},
            {"scenario_plan", master::to_json(exp.plan)},
            {"observe", endpoint_map_json(exp.observe)},
            {"bindings", endpoint_map_json(exp.bindings)},
            {"assessment", a}};
}

validation_report check_document(const fs::path& file)
{
    validation_report r;
    try {
        const auto doc = jio::load_file(file);
        const auto base = file.parent_path();
        if (doc.is_object() && doc.contains("sc_type")) {
            r = sysconfig::validate(sysconfig::container_from_json(doc));
        } else {
            jio::require_object(doc, "");
            const auto kind = jio::get_string(doc, "document", "");
            if (kind == "test_case") r = check_test_case(read_test_case(doc, base));
            else if (kind == "test_spec") r = validate_test_specification(parse_test_specification(doc, base));
            else if (kind == "experiment") r = validate_experiment(parse_experiment(doc, base));
            else throw schema_error("/document", "unknown document kind '" + kind + "'");
        }
    } catch (const error& e) {
        r.push_back(diagnostic_from(e));
    }
    sort_report(r);
    return r;
}

} // namespace cosim::testspec
