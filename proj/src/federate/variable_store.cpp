#include "cosim/federate/attribute_map.hpp"
#include "cosim/federate/interfaces.hpp"

namespace cosim::federate {

variable_store::variable_store(model_description md) : md_(std::move(md))
{
    reset({});
}

void variable_store::reset(const parameter_set& params)
{
    values_.clear();
    for (const auto& v : md_.variables) values_[v.ref] = v.start ? *v.start : default_value(v.type);
    for (const auto& [name, val] : params) {
        const auto* v = md_.find(name);
        if (!v) throw unknown_variable(name);
        if (v->causality != causality::parameter)
            throw direction_error("'" + name + "' is not a parameter of " + md_.model_name);
        values_[v->ref] = coerce(val, v->type);
    }
}

void variable_store::set(value_ref ref, const value& v)
{
    const auto* var = md_.find(ref);
    if (!var) throw error(md_.model_name + ": unknown value reference " + std::to_string(ref));
    values_[ref] = coerce(v, var->type);
}

const value& variable_store::get(value_ref ref) const
{
    auto it = values_.find(ref);
    if (it == values_.end()) throw error(md_.model_name + ": unknown value reference " + std::to_string(ref));
    return it->second;
}

void variable_store::set_input(value_ref ref, const value& v)
{
    const auto* var = md_.find(ref);
    if (!var) throw error(md_.model_name + ": unknown value reference " + std::to_string(ref));
    if (var->causality != causality::input)
        throw direction_error(md_.model_name + ": '" + var->name + "' is not an input");
    values_[ref] = coerce(v, var->type);
}

} // namespace cosim::federate
