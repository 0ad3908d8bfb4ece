#include "cosim/testspec/documents.hpp"

#include "cosim/common/json_io.hpp"
#include "cosim/models/frt.hpp"
#include "cosim/sysconfig/expression.hpp"
#include "cosim/sysconfig/io.hpp"
#include "cosim/sysconfig/operations.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace cosim::testspec {

using nlohmann::json;
namespace jio = cosim::json_io;
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 3> objective_names{"validation", "verification", "characterization"};
constexpr std::array<std::string_view, 5> action_names{"set_parameter", "apply_event", "wait_until", "assess",
                                                       "sweep"};

std::string at(const std::string& path, const char* key, std::size_t i)
{
    return path + "/" + key + "/" + std::to_string(i);
}

const json& list(const json& j, const char* key, const std::string& path, bool required = true)
{
    static const json empty = json::array();
    if (!required && !j.contains(key)) return empty;
    const auto& v = jio::require(j, key, path);
    jio::require_array(v, path + "/" + key);
    return v;
}

void check_kind(const json& doc, const char* kind)
{
    jio::require_object(doc, "");
    const auto k = jio::get_string(doc, "document", "");
    if (k != kind) throw schema_error("/document", "expected \"" + std::string(kind) + "\", got \"" + k + "\"");
}

std::map<std::string, scalar> scalar_map(const json& j, const std::string& path)
{
    jio::require_object(j, path);
    std::map<std::string, scalar> out;
    for (const auto& [k, v] : j.items()) out.emplace(k, scalar_from_json(v, path + "/" + k));
    return out;
}

json scalar_map_json(const std::map<std::string, scalar>& m)
{
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = cosim::to_json(v);
    return j;
}

template <class T>
bool same_target(const std::shared_ptr<T>& a, const std::shared_ptr<T>& b)
{
    if (!a || !b) return !a && !b;
    return *a == *b;
}

fs::path resolve(const fs::path& base_dir, const std::string& ref)
{
    return (base_dir / ref).lexically_normal();
}

std::shared_ptr<const sysconfig::container> load_ref(const fs::path& base_dir, const std::string& ref)
{
    try {
        return std::make_shared<const sysconfig::container>(sysconfig::load_container(resolve(base_dir, ref)));
    } catch (const io_error&) {
        throw dangling_reference(ref, "cannot open the referenced configuration");
    }
}

// invariant codes and the rule they stand for
const std::map<std::string, std::string>& rules()
{
    static const std::map<std::string, std::string> r{
        {"oui_subset_sut", "oui ⊆ sut"},
        {"fui_subset_fut", "fui ⊆ fut"},
        {"dui_on_sut", "dui on SuT terminals"},
        {"unique_function_ids", "function ids unique within a use case"},
        {"generic_config_type", "generic_config is a TC-GSC"},
        {"sut_nonempty", "sut non-empty"},
        {"poi_nonempty", "at least one objective"},
        {"criterion_metric", "criterion metric is an expression"},
        {"unique_criterion_ids", "criterion ids unique"},
    };
    return r;
}

} // namespace

std::string_view to_string(objective_kind k) { return objective_names[static_cast<std::size_t>(k)]; }

std::optional<objective_kind> parse_objective_kind(std::string_view s)
{
    for (std::size_t i = 0; i < objective_names.size(); ++i)
        if (objective_names[i] == s) return static_cast<objective_kind>(i);
    return std::nullopt;
}

std::string_view to_string(step_action a) { return action_names[static_cast<std::size_t>(a)]; }

std::optional<step_action> parse_step_action(std::string_view s)
{
    for (std::size_t i = 0; i < action_names.size(); ++i)
        if (action_names[i] == s) return static_cast<step_action>(i);
    return std::nullopt;
}

bool operator==(const test_case& a, const test_case& b)
{
    return a.id == b.id && a.name == b.name && a.generic_config == b.generic_config && a.use_cases == b.use_cases &&
           a.sut == b.sut && a.oui == b.oui && a.dui == b.dui && a.fut == b.fut && a.fui == b.fui &&
           a.poi == b.poi && a.criteria == b.criteria && same_target(a.gsc, b.gsc);
}

bool operator==(const test_specification& a, const test_specification& b)
{
    return a.id == b.id && a.test_case == b.test_case && a.test_system == b.test_system && a.inputs == b.inputs &&
           a.outputs == b.outputs && a.test_design == b.test_design && a.assessment == b.assessment &&
           same_target(a.tc, b.tc) && same_target(a.ts, b.ts);
}

const std::map<std::string, scalar>& assessment_defaults()
{
    static const std::map<std::string, scalar> d{
        {"U_ret", 0.15},  {"t_clear", 0.25}, {"U_clear", 0.9}, {"t_rec3", 1.5},
        {"U_final", 0.9}, {"tol", 0.02},     {"settle", 0.5},  {"qv_curve", std::string(models::default_qv_curve)},
    };
    return d;
}

// ---------------------------------------------------------------- test case

test_case read_test_case(const json& doc, const fs::path& base_dir)
{
    check_kind(doc, "test_case");
    jio::check_keys(doc,
                    {"document", "id", "name", "generic_config", "use_cases", "sut", "oui", "dui", "fut", "fui",
                     "poi", "criteria"},
                    "");
    test_case tc;
    tc.id = jio::get_string(doc, "id", "");
    tc.name = jio::opt_string(doc, "name", "");
    tc.generic_config = jio::get_string(doc, "generic_config", "");

    const auto& ucs = list(doc, "use_cases", "");
    for (std::size_t i = 0; i < ucs.size(); ++i) {
        const auto p = at("", "use_cases", i);
        jio::check_keys(ucs[i], {"id", "name", "functions"}, p);
        use_case uc;
        uc.id = jio::get_string(ucs[i], "id", p);
        uc.name = jio::opt_string(ucs[i], "name", p);
        const auto& fns = list(ucs[i], "functions", p);
        for (std::size_t k = 0; k < fns.size(); ++k) {
            const auto q = at(p, "functions", k);
            jio::check_keys(fns[k], {"id", "description"}, q);
            uc.functions.push_back({jio::get_string(fns[k], "id", q), jio::opt_string(fns[k], "description", q)});
        }
        tc.use_cases.push_back(std::move(uc));
    }
    tc.sut = jio::get_string_list(doc, "sut", "");
    tc.oui = jio::get_string_list(doc, "oui", "");
    tc.dui = jio::get_string_list(doc, "dui", "");
    tc.fut = jio::get_string_list(doc, "fut", "");
    tc.fui = jio::get_string_list(doc, "fui", "");

    const auto& poi = list(doc, "poi", "");
    for (std::size_t i = 0; i < poi.size(); ++i) {
        const auto p = at("", "poi", i);
        jio::check_keys(poi[i], {"statement", "kind"}, p);
        test_objective o;
        o.statement = jio::get_string(poi[i], "statement", p);
        const auto kind = jio::get_string(poi[i], "kind", p);
        auto k = parse_objective_kind(kind);
        if (!k) throw schema_error(p + "/kind", "unknown objective kind '" + kind + "'");
        o.kind = *k;
        tc.poi.push_back(std::move(o));
    }
    const auto& crit = list(doc, "criteria", "", false);
    for (std::size_t i = 0; i < crit.size(); ++i) {
        const auto p = at("", "criteria", i);
        jio::check_keys(crit[i], {"id", "metric", "threshold"}, p);
        tc.criteria.push_back({jio::get_string(crit[i], "id", p), jio::get_string(crit[i], "metric", p),
                               jio::opt_string(crit[i], "threshold", p)});
    }
    tc.gsc = load_ref(base_dir, tc.generic_config);
    return tc;
}

validation_report check_test_case(const test_case& tc)
{
    validation_report r;
    auto add = [&](const std::string& obj, const std::string& code, const std::string& msg) {
        r.push_back({severity::error, obj, code, msg});
    };
    const auto& gsc = *tc.gsc;
    if (gsc.type != sysconfig::sc_type::tc_gsc)
        add(tc.id, "generic_config_type",
            "generic_config is a " + std::string(sysconfig::to_string(gsc.type)) + ", expected TC-GSC");

    const std::set<std::string> sut(tc.sut.begin(), tc.sut.end());
    const std::set<std::string> fut(tc.fut.begin(), tc.fut.end());
    if (sut.empty()) add(tc.id, "sut_nonempty", "the system under test is empty");
    if (tc.poi.empty()) add(tc.id, "poi_nonempty", "no purpose of investigation given");

    for (const auto& id : sut)
        if (!gsc.find_component(id)) add(id, "dangling_reference", "SuT component not in the generic configuration");
    for (const auto& id : tc.oui) {
        if (!gsc.find_component(id)) add(id, "dangling_reference", "OuI component not in the generic configuration");
        else if (!sut.count(id)) add(id, "oui_subset_sut", "object under investigation outside the SuT");
    }

    std::set<std::string> functions;
    for (const auto& uc : tc.use_cases) {
        std::set<std::string> seen;
        for (const auto& f : uc.functions) {
            if (!seen.insert(f.id).second)
                add(uc.id, "unique_function_ids", "function '" + f.id + "' listed twice");
            functions.insert(f.id);
        }
    }
    for (const auto& id : fut)
        if (!functions.count(id)) add(id, "dangling_reference", "FuT entry is not a use-case function");
    for (const auto& id : tc.fui) {
        if (!functions.count(id)) add(id, "dangling_reference", "FuI entry is not a use-case function");
        else if (!fut.count(id)) add(id, "fui_subset_fut", "function under investigation outside the FuT");
    }

    for (const auto& d : tc.dui) {
        if (!gsc.find_domain(d)) {
            add(d, "dangling_reference", "DuI domain not declared by the generic configuration");
            continue;
        }
        bool found = false;
        for (const auto& id : sut)
            if (const auto* c = gsc.find_component(id))
                for (const auto& t : c->terminals) found = found || t.domain == d;
        if (!found) add(d, "dui_on_sut", "no SuT terminal belongs to domain '" + d + "'");
    }

    std::set<std::string> crit_ids;
    for (const auto& c : tc.criteria) {
        if (!crit_ids.insert(c.id).second) add(c.id, "unique_criterion_ids", "criterion id used twice");
        try {
            sysconfig::parse_expression(c.metric, true);
        } catch (const sysconfig::expression_error& e) {
            add(c.id, "criterion_metric", e.what());
        }
    }
    sort_report(r);
    return r;
}

test_case parse_test_case(const json& doc, const fs::path& base_dir)
{
    auto tc = read_test_case(doc, base_dir);
    const auto report = check_test_case(tc);
    for (const auto& d : report) {
        if (d.level != severity::error) continue;
        if (d.code == "dangling_reference") throw dangling_reference(d.object_id, d.message);
        auto it = rules().find(d.code);
        throw invariant_violation(it == rules().end() ? d.code : it->second, d.object_id + ": " + d.message);
    }
    return tc;
}

test_case load_test_case(const fs::path& file)
{
    return parse_test_case(jio::load_file(file), file.parent_path());
}

json to_json(const test_case& tc)
{
    json j;
    j["document"] = "test_case";
    j["id"] = tc.id;
    if (!tc.name.empty()) j["name"] = tc.name;
    j["generic_config"] = tc.generic_config;
    j["use_cases"] = json::array();
    for (const auto& uc : tc.use_cases) {
        json u{{"id", uc.id}};
        if (!uc.name.empty()) u["name"] = uc.name;
        u["functions"] = json::array();
        for (const auto& f : uc.functions) {
            json fj{{"id", f.id}};
            if (!f.description.empty()) fj["description"] = f.description;
            u["functions"].push_back(std::move(fj));
        }
        j["use_cases"].push_back(std::move(u));
    }
    j["sut"] = tc.sut;
    j["oui"] = tc.oui;
    j["dui"] = tc.dui;
    j["fut"] = tc.fut;
    j["fui"] = tc.fui;
    j["poi"] = json::array();
    for (const auto& o : tc.poi) j["poi"].push_back({{"statement", o.statement}, {"kind", to_string(o.kind)}});
    j["criteria"] = json::array();
    for (const auto& c : tc.criteria) {
        json cj{{"id", c.id}, {"metric", c.metric}};
        if (!c.threshold.empty()) cj["threshold"] = c.threshold;
        j["criteria"].push_back(std::move(cj));
    }
    return j;
}

// ---------------------------------------------------------------- test spec

test_specification parse_test_specification(const json& doc, const fs::path& base_dir)
{
    check_kind(doc, "test_spec");
    jio::check_keys(doc, {"document", "id", "test_case", "test_system", "inputs", "outputs", "test_design", "assessment"},
                    "");
    test_specification s;
    s.id = jio::get_string(doc, "id", "");
    s.test_case = jio::get_string(doc, "test_case", "");
    s.test_system = jio::get_string(doc, "test_system", "");

    const auto& ins = list(doc, "inputs", "");
    for (std::size_t i = 0; i < ins.size(); ++i) {
        const auto p = at("", "inputs", i);
        jio::check_keys(ins[i], {"name", "unit", "target", "values"}, p);
        parameter_descriptor d;
        d.name = jio::get_string(ins[i], "name", p);
        d.unit = jio::opt_string(ins[i], "unit", p);
        d.target = jio::get_string(ins[i], "target", p);
        const auto& vals = list(ins[i], "values", p, false);
        for (std::size_t k = 0; k < vals.size(); ++k) d.values.push_back(scalar_from_json(vals[k], at(p, "values", k)));
        s.inputs.push_back(std::move(d));
    }
    const auto& outs = list(doc, "outputs", "");
    for (std::size_t i = 0; i < outs.size(); ++i) {
        const auto p = at("", "outputs", i);
        jio::check_keys(outs[i], {"name", "unit", "signal", "quantity"}, p);
        s.outputs.push_back({jio::get_string(outs[i], "name", p), jio::opt_string(outs[i], "unit", p),
                             jio::get_string(outs[i], "signal", p), jio::opt_string(outs[i], "quantity", p)});
    }
    const auto& steps = list(doc, "test_design", "");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto p = at("", "test_design", i);
        jio::check_keys(steps[i], {"action", "args"}, p);
        const auto name = jio::get_string(steps[i], "action", p);
        auto a = parse_step_action(name);
        if (!a) throw schema_error(p + "/action", "unknown step template '" + name + "'");
        procedure_step st{*a, {}};
        if (steps[i].contains("args")) st.args = scalar_map(steps[i].at("args"), p + "/args");
        s.test_design.push_back(std::move(st));
    }
    if (doc.contains("assessment")) {
        s.assessment = scalar_map(doc.at("assessment"), "/assessment");
        for (const auto& [k, v] : s.assessment) {
            auto it = assessment_defaults().find(k);
            if (it == assessment_defaults().end())
                throw schema_error("/assessment/" + k, "unknown assessment parameter");
            if (v.index() != it->second.index()) throw schema_error("/assessment/" + k, "wrong value type");
        }
    }

    try {
        s.tc = std::make_shared<const testspec::test_case>(load_test_case(resolve(base_dir, s.test_case)));
    } catch (const io_error&) {
        throw dangling_reference(s.test_case, "cannot open the referenced test case");
    }
    s.ts = load_ref(base_dir, s.test_system);
    return s;
}

test_specification load_test_specification(const fs::path& file)
{
    return parse_test_specification(jio::load_file(file), file.parent_path());
}

namespace {

// `component.member` where member is an attribute (attributes allowed) or a
// terminal (terminals allowed) of a test-system component.
bool resolves(const sysconfig::container& ts, const std::string& ref, bool attributes, bool terminals)
{
    const auto dot = ref.find('.');
    if (dot == std::string::npos) return false;
    const auto* c = ts.find_component(ref.substr(0, dot));
    if (!c) return false;
    const auto member = ref.substr(dot + 1);
    return (attributes && c->attributes.count(member)) || (terminals && c->find_terminal(member));
}

} // namespace

validation_report validate_test_specification(const test_specification& spec)
{
    validation_report r;
    auto add = [&](const std::string& obj, const std::string& code, const std::string& msg) {
        r.push_back({severity::error, obj, code, msg});
    };
    const auto& ts = *spec.ts;
    if (ts.type != sysconfig::sc_type::ts_sc)
        add(spec.id, "test_system_type",
            "test_system is a " + std::string(sysconfig::to_string(ts.type)) + ", expected TS-SC");
    for (auto d : sysconfig::validate(ts)) r.push_back(std::move(d));
    for (auto d : sysconfig::check_instantiation(*spec.tc->gsc, ts)) r.push_back(std::move(d));

    std::set<std::string> names;
    for (const auto& in : spec.inputs) {
        if (!names.insert(in.name).second) add(in.name, "duplicate_name", "input/output name used twice");
        if (!resolves(ts, in.target, true, false))
            add(in.name, "unresolved_input", "'" + in.target + "' is not an attribute of the test system");
    }
    for (const auto& out : spec.outputs) {
        if (!names.insert(out.name).second) add(out.name, "duplicate_name", "input/output name used twice");
        if (!resolves(ts, out.signal, true, true))
            add(out.name, "unresolved_output",
                "'" + out.signal + "' is neither a terminal nor an attribute of the test system");
    }
    if (spec.test_design.empty()) add(spec.id, "empty_test_design", "the test design has no steps");

    for (const auto& c : spec.tc->criteria) {
        try {
            for (const auto& n : sysconfig::parse_expression(c.metric, true).referenced_names())
                if (!names.count(n))
                    add(c.id, "unresolved_criterion", "criterion refers to '" + n + "', which is not an output");
        } catch (const sysconfig::expression_error&) {
            // reported by the test case check
        }
    }
    sort_report(r);
    return r;
}

json to_json(const test_specification& spec)
{
    json j;
    j["document"] = "test_spec";
    j["id"] = spec.id;
    j["test_case"] = spec.test_case;
    j["test_system"] = spec.test_system;
    j["inputs"] = json::array();
    for (const auto& in : spec.inputs) {
        json ij{{"name", in.name}};
        if (!in.unit.empty()) ij["unit"] = in.unit;
        ij["target"] = in.target;
        if (!in.values.empty()) {
            ij["values"] = json::array();
            for (const auto& v : in.values) ij["values"].push_back(cosim::to_json(v));
        }
        j["inputs"].push_back(std::move(ij));
    }
    j["outputs"] = json::array();
    for (const auto& o : spec.outputs) {
        json oj{{"name", o.name}};
        if (!o.unit.empty()) oj["unit"] = o.unit;
        oj["signal"] = o.signal;
        if (!o.quantity.empty()) oj["quantity"] = o.quantity;
        j["outputs"].push_back(std::move(oj));
    }
    j["test_design"] = json::array();
    for (const auto& st : spec.test_design) {
        json sj{{"action", to_string(st.action)}};
        if (!st.args.empty()) sj["args"] = scalar_map_json(st.args);
        j["test_design"].push_back(std::move(sj));
    }
    if (!spec.assessment.empty()) j["assessment"] = scalar_map_json(spec.assessment);
    return j;
}

diagnostic diagnostic_from(const error& e)
{
    if (const auto* s = dynamic_cast<const schema_error*>(&e)) return {severity::error, s->path(), "schema", e.what()};
    if (const auto* s = dynamic_cast<const io_error*>(&e)) return {severity::error, s->path(), "io", e.what()};
    if (const auto* d = dynamic_cast<const dangling_reference*>(&e))
        return {severity::error, d->id(), "dangling_reference", e.what()};
    if (const auto* v = dynamic_cast<const invariant_violation*>(&e))
        return {severity::error, v->rule(), "invariant_violation", e.what()};
    return {severity::error, "", "error", e.what()};
}

} // namespace cosim::testspec
