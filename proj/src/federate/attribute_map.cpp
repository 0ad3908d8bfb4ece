#include "cosim/federate/attribute_map.hpp"

namespace cosim::federate {

attribute_map to_attribute_map(const model_description& md)
{
    attribute_map map;
    for (const auto& v : md.variables) {
        if (v.causality == causality::local) continue;
        if (map.records.count(v.name)) throw duplicate_name("duplicate variable name '" + v.name + "'");
        map.records.emplace(v.name, accessor{v.ref, v.type, v.causality});
        if (v.causality == causality::parameter) map.params.push_back(v.name);
        else map.attributes.push_back(v.name);
    }
    return map;
}

accessor select_accessor(const attribute_map& map, const std::string& name, std::optional<access> mode,
                         const std::set<std::string>& written_inputs)
{
    auto it = map.records.find(name);
    if (it == map.records.end()) throw unknown_variable(name);
    const accessor& rec = it->second;
    if (!mode) return rec;
    if (*mode == access::set && rec.direction == causality::output)
        throw direction_error("cannot set output variable '" + name + "'");
    if (*mode == access::get && rec.direction == causality::input && !written_inputs.count(name))
        throw direction_error("input variable '" + name + "' has not been written");
    return rec;
}

} // namespace cosim::federate
