#include "cosim/federate/model_description.hpp"

#include "cosim/common/error.hpp"
#include "cosim/common/json_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

namespace cosim::federate {

namespace {

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v)
{
    for (const auto& [e, n] : table)
        if (e == v) return n;
    return "?";
}

template <typename E, std::size_t N>
E parse_enum(const std::array<std::pair<E, std::string_view>, N>& table, const std::string& s,
             const std::string& path)
{
    for (const auto& [e, n] : table)
        if (n == s) return e;
    throw schema_error(path, "unexpected value '" + s + "'");
}

constexpr std::array<std::pair<data_type, std::string_view>, 4> data_type_names{
    {{data_type::real, "real"}, {data_type::integer, "integer"}, {data_type::boolean, "boolean"},
     {data_type::string, "string"}}};
constexpr std::array<std::pair<causality, std::string_view>, 4> causality_names{
    {{causality::parameter, "parameter"}, {causality::input, "input"}, {causality::output, "output"},
     {causality::local, "local"}}};
constexpr std::array<std::pair<variability, std::string_view>, 3> variability_names{
    {{variability::constant, "constant"}, {variability::discrete, "discrete"},
     {variability::continuous, "continuous"}}};
constexpr std::array<std::pair<model_kind, std::string_view>, 2> kind_names{
    {{model_kind::cs, "CS"}, {model_kind::me, "ME"}}};

nlohmann::json value_to_json(const value& v)
{
    return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

value value_from_json(const nlohmann::json& j, data_type t, const std::string& path)
{
    switch (t) {
    case data_type::real:
        if (j.is_number()) return j.get<double>();
        break;
    case data_type::integer:
        if (j.is_number_integer()) return j.get<std::int64_t>();
        break;
    case data_type::boolean:
        if (j.is_boolean()) return j.get<bool>();
        break;
    case data_type::string:
        if (j.is_string()) return j.get<std::string>();
        break;
    }
    throw schema_error(path, "start value does not match data_type " + std::string(to_string(t)));
}

} // namespace

std::string_view to_string(data_type v) { return name_of(data_type_names, v); }
std::string_view to_string(causality v) { return name_of(causality_names, v); }
std::string_view to_string(variability v) { return name_of(variability_names, v); }
std::string_view to_string(model_kind v) { return name_of(kind_names, v); }

data_type type_of(const value& v) { return static_cast<data_type>(v.index()); }

value default_value(data_type t)
{
    switch (t) {
    case data_type::real: return 0.0;
    case data_type::integer: return std::int64_t{0};
    case data_type::boolean: return false;
    case data_type::string: return std::string{};
    }
    return 0.0;
}

value coerce(const value& v, data_type t)
{
    if (type_of(v) == t) return v;
    if (t == data_type::real) {
        if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    }
    if (t == data_type::integer) {
        if (const auto* d = std::get_if<double>(&v); d && std::isfinite(*d) && std::floor(*d) == *d &&
                                                     std::abs(*d) < 9.0e15)
            return static_cast<std::int64_t>(*d);
    }
    throw error("cannot convert " + std::string(to_string(type_of(v))) + " value to " + std::string(to_string(t)));
}

double to_double(const value& v)
{
    return std::visit(
        [](const auto& x) -> double {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::string>) return std::numeric_limits<double>::quiet_NaN();
            else return static_cast<double>(x);
        },
        v);
}

const variable* model_description::find(std::string_view name) const
{
    auto it = std::find_if(variables.begin(), variables.end(), [&](const variable& v) { return v.name == name; });
    return it == variables.end() ? nullptr : &*it;
}

const variable* model_description::find(value_ref ref) const
{
    auto it = std::find_if(variables.begin(), variables.end(), [&](const variable& v) { return v.ref == ref; });
    return it == variables.end() ? nullptr : &*it;
}

std::vector<const variable*> model_description::with_causality(causality c) const
{
    std::vector<const variable*> out;
    for (const auto& v : variables)
        if (v.causality == c) out.push_back(&v);
    return out;
}

validation_report validate(const model_description& md)
{
    validation_report r;
    auto add = [&](const std::string& obj, std::string code, std::string msg) {
        r.push_back({severity::error, md.model_name + "." + obj, std::move(code), std::move(msg)});
    };
    std::set<value_ref> refs;
    std::set<std::string> names;
    for (const auto& v : md.variables) {
        if (!refs.insert(v.ref).second) add(v.name, "duplicate_value_ref", "value_ref " + std::to_string(v.ref) + " is not unique");
        if (!names.insert(v.name).second) add(v.name, "duplicate_name", "variable name is not unique");
        if (v.causality == causality::parameter && v.variability == variability::continuous)
            add(v.name, "parameter_variability", "parameters must be constant or discrete");
        if (v.start && type_of(*v.start) != v.type) add(v.name, "start_type", "start value type differs from data_type");
    }
    if (md.state_dim < 0) add("state_dim", "state_dim", "state_dim must be non-negative");
    if (md.kind == model_kind::cs && md.state_dim != 0)
        add("state_dim", "state_dim", "co-simulation models do not expose continuous states");
    sort_report(r);
    return r;
}

nlohmann::json to_json(const model_description& md)
{
    nlohmann::json j{{"model_name", md.model_name}, {"kind", to_string(md.kind)}, {"state_dim", md.state_dim}};
    j["variables"] = nlohmann::json::array();
    for (const auto& v : md.variables) {
        nlohmann::json vj{{"name", v.name},
                          {"value_ref", v.ref},
                          {"data_type", to_string(v.type)},
                          {"causality", to_string(v.causality)},
                          {"variability", to_string(v.variability)}};
        if (v.start) vj["start"] = value_to_json(*v.start);
        j["variables"].push_back(std::move(vj));
    }
    return j;
}

model_description model_description_from_json(const nlohmann::json& j, const std::string& path)
{
    namespace jio = cosim::json_io;
    jio::check_keys(j, {"model_name", "kind", "state_dim", "variables"}, path);
    model_description md;
    md.model_name = jio::get_string(j, "model_name", path);
    md.kind = parse_enum(kind_names, jio::get_string(j, "kind", path), path + "/kind");
    md.state_dim = static_cast<int>(jio::opt_number(j, "state_dim", path, 0));
    const auto& vars = jio::require(j, "variables", path);
    jio::require_array(vars, path + "/variables");
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const auto p = path + "/variables/" + std::to_string(i);
        jio::check_keys(vars[i], {"name", "value_ref", "data_type", "causality", "variability", "start"}, p);
        variable v;
        v.name = jio::get_string(vars[i], "name", p);
        const auto& ref = jio::require(vars[i], "value_ref", p);
        if (!ref.is_number_unsigned()) throw schema_error(p + "/value_ref", "expected non-negative integer");
        v.ref = ref.get<value_ref>();
        v.type = parse_enum(data_type_names, jio::get_string(vars[i], "data_type", p), p + "/data_type");
        v.causality = parse_enum(causality_names, jio::get_string(vars[i], "causality", p), p + "/causality");
        v.variability = parse_enum(variability_names, jio::get_string(vars[i], "variability", p), p + "/variability");
        if (vars[i].contains("start")) v.start = value_from_json(vars[i].at("start"), v.type, p + "/start");
        md.variables.push_back(std::move(v));
    }
    return md;
}

} // namespace cosim::federate
