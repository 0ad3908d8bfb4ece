#include "cosim/sysconfig/io.hpp"

#include "cosim/common/error.hpp"
#include "cosim/common/json_io.hpp"

namespace cosim::sysconfig {

using nlohmann::json;
namespace jio = cosim::json_io;

namespace {

std::string at(const std::string& path, const char* key, std::size_t i)
{
    return path + "/" + key + "/" + std::to_string(i);
}

const json& list(const json& j, const char* key, const std::string& path)
{
    static const json empty = json::array();
    if (!j.contains(key)) return empty;
    const auto& v = j.at(key);
    jio::require_array(v, path + "/" + key);
    return v;
}

component component_from_json(const json& j, const std::string& path)
{
    jio::check_keys(j, {"id", "type_label", "terminals", "attributes", "subsystem", "terminal_map"}, path);
    component c;
    c.id = jio::get_string(j, "id", path);
    c.type_label = jio::opt_string(j, "type_label", path);
    const auto& terms = list(j, "terminals", path);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto p = at(path, "terminals", i);
        jio::check_keys(terms[i], {"id", "direction", "domain"}, p);
        terminal t;
        t.id = jio::get_string(terms[i], "id", p);
        const auto dir = jio::opt_string(terms[i], "direction", p, "undirected");
        auto parsed = parse_direction(dir);
        if (!parsed) throw schema_error(p + "/direction", "unknown direction '" + dir + "'");
        t.dir = *parsed;
        t.domain = jio::get_string(terms[i], "domain", p);
        c.terminals.push_back(std::move(t));
    }
    if (j.contains("attributes")) {
        const auto& attrs = j.at("attributes");
        jio::require_object(attrs, path + "/attributes");
        for (const auto& [k, v] : attrs.items())
            c.attributes[k] = scalar_from_json(v, path + "/attributes/" + k);
    }
    if (j.contains("subsystem"))
        c.subsystem = std::make_shared<const container>(container_from_json(j.at("subsystem"), path + "/subsystem"));
    if (j.contains("terminal_map")) {
        const auto& m = j.at("terminal_map");
        jio::require_object(m, path + "/terminal_map");
        for (const auto& [k, v] : m.items()) {
            if (!v.is_string()) throw schema_error(path + "/terminal_map/" + k, "expected string");
            c.terminal_map[k] = v.get<std::string>();
        }
    }
    return c;
}

json component_to_json(const component& c)
{
    json j;
    j["id"] = c.id;
    if (!c.type_label.empty()) j["type_label"] = c.type_label;
    j["terminals"] = json::array();
    for (const auto& t : c.terminals)
        j["terminals"].push_back({{"id", t.id}, {"direction", to_string(t.dir)}, {"domain", t.domain}});
    if (!c.attributes.empty()) {
        j["attributes"] = json::object();
        for (const auto& [k, v] : c.attributes) j["attributes"][k] = cosim::to_json(v);
    }
    if (c.subsystem) j["subsystem"] = to_json(*c.subsystem);
    if (!c.terminal_map.empty()) j["terminal_map"] = c.terminal_map;
    return j;
}

} // namespace

container container_from_json(const json& j, const std::string& path)
{
    jio::check_keys(j, {"sc_type", "name", "domains", "components", "connection_points", "constraints"}, path);
    container c;
    const auto type = jio::get_string(j, "sc_type", path);
    auto parsed = parse_sc_type(type);
    if (!parsed) throw schema_error(path + "/sc_type", "unknown system configuration type '" + type + "'");
    c.type = *parsed;
    c.name = jio::opt_string(j, "name", path);

    const auto& doms = list(j, "domains", path);
    for (std::size_t i = 0; i < doms.size(); ++i) {
        const auto p = at(path, "domains", i);
        jio::check_keys(doms[i], {"name", "parent"}, p);
        domain d;
        d.name = jio::get_string(doms[i], "name", p);
        if (doms[i].contains("parent") && !doms[i].at("parent").is_null())
            d.parent = jio::get_string(doms[i], "parent", p);
        c.domains.push_back(std::move(d));
    }
    const auto& comps = list(j, "components", path);
    for (std::size_t i = 0; i < comps.size(); ++i)
        c.components.push_back(component_from_json(comps[i], at(path, "components", i)));

    const auto& cps = list(j, "connection_points", path);
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const auto p = at(path, "connection_points", i);
        jio::check_keys(cps[i], {"id", "domain", "attached"}, p);
        c.connection_points.push_back(
            {jio::get_string(cps[i], "id", p), jio::get_string(cps[i], "domain", p),
             jio::get_string_list(cps[i], "attached", p)});
    }
    const auto& cons = list(j, "constraints", path);
    for (std::size_t i = 0; i < cons.size(); ++i) {
        const auto p = at(path, "constraints", i);
        jio::check_keys(cons[i], {"target", "expression"}, p);
        c.constraints.push_back({jio::get_string(cons[i], "target", p), jio::get_string(cons[i], "expression", p)});
    }
    return c;
}

json to_json(const container& c)
{
    json j;
    j["sc_type"] = to_string(c.type);
    if (!c.name.empty()) j["name"] = c.name;
    j["domains"] = json::array();
    for (const auto& d : c.domains) {
        json dj{{"name", d.name}};
        if (d.parent) dj["parent"] = *d.parent;
        j["domains"].push_back(std::move(dj));
    }
    j["components"] = json::array();
    for (const auto& comp : c.components) j["components"].push_back(component_to_json(comp));
    j["connection_points"] = json::array();
    for (const auto& cp : c.connection_points)
        j["connection_points"].push_back({{"id", cp.id}, {"domain", cp.domain}, {"attached", cp.attached}});
    j["constraints"] = json::array();
    for (const auto& k : c.constraints)
        j["constraints"].push_back({{"target", k.target}, {"expression", k.expression}});
    return j;
}

container load_container(const std::filesystem::path& file)
{
    return container_from_json(jio::load_file(file), file.string());
}

} // namespace cosim::sysconfig
