#include "cosim/sysconfig/operations.hpp"

#include <algorithm>
#include <cmath>

namespace cosim::sysconfig {

namespace {

// Component indices grouped by type label, each group in id order.
std::map<std::string, std::vector<const component*>> slots_by_type(const container& c)
{
    std::map<std::string, std::vector<const component*>> out;
    for (const auto& comp : c.components) out[c.effective_type(comp)].push_back(&comp);
    for (auto& [_, v] : out)
        std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->id < b->id; });
    return out;
}

std::string owner_of(const std::string& qualified)
{
    auto ref = terminal_ref::parse(qualified);
    return ref ? ref->component : std::string{};
}

bool constraint_belongs(const container& c, const constraint& k, const std::set<std::string>& comps,
                        const std::set<std::string>& cps)
{
    if (c.find_component(k.target)) return comps.count(k.target) > 0;
    if (c.find_connection_point(k.target)) return cps.count(k.target) > 0;
    if (auto ref = terminal_ref::parse(k.target)) return comps.count(ref->component) > 0;
    return true; // domains are shared by both parts
}

} // namespace

container instantiate(const container& generic, const binding_map& bindings)
{
    if (generic.type != sc_type::tc_gsc)
        throw sc_type_mismatch("instantiate expects a TC-GSC, got " + std::string(to_string(generic.type)));

    const auto slots = slots_by_type(generic);
    for (const auto& [type, comps] : slots) {
        auto it = bindings.find(type);
        if (it == bindings.end() || it->second.size() < comps.size()) throw missing_binding(type);
        if (it->second.size() > comps.size())
            throw arity_mismatch("type '" + type + "' has " + std::to_string(comps.size()) + " slot(s) but " +
                                 std::to_string(it->second.size()) + " binding(s)");
    }
    for (const auto& [type, b] : bindings)
        if (!slots.count(type) && !b.empty())
            throw arity_mismatch("bindings given for type '" + type + "' which has no slots");

    container out = generic;
    out.type = sc_type::ts_sc;
    for (auto& comp : out.components) {
        const auto type = generic.effective_type(comp);
        const auto& group = slots.at(type);
        const auto index = static_cast<std::size_t>(
            std::find_if(group.begin(), group.end(), [&](auto* g) { return g->id == comp.id; }) - group.begin());
        comp.type_label = type;
        for (const auto& [k, v] : bindings.at(type)[index].attributes) comp.attributes[k] = v;
    }
    return out;
}

validation_report check_instantiation(const container& generic, const container& specific)
{
    validation_report r;
    auto add = [&](std::string obj, std::string msg) {
        r.push_back({severity::error, std::move(obj), "lineage", std::move(msg)});
    };
    if (specific.generic()) add(specific.name, "test system container must be specific");
    for (const auto& g : generic.components) {
        const auto* s = specific.find_component(g.id);
        if (!s) {
            add(g.id, "generic component has no counterpart in the test system");
            continue;
        }
        if (s->type_label != generic.effective_type(g))
            add(g.id, "type_label '" + s->type_label + "' does not match generic type '" +
                          generic.effective_type(g) + "'");
        if (s->terminals != g.terminals) add(g.id, "terminals differ from the generic component");
    }
    for (const auto& s : specific.components)
        if (!generic.find_component(s.id)) add(s.id, "component does not instantiate any generic component");
    if (generic.connection_points.size() != specific.connection_points.size())
        add(specific.name, "connection point count differs from the generic configuration");
    for (const auto& gcp : generic.connection_points) {
        const auto* scp = specific.find_connection_point(gcp.id);
        if (!scp || !std::is_permutation(gcp.attached.begin(), gcp.attached.end(), scp->attached.begin(),
                                         scp->attached.end()))
            add(gcp.id, "connection point differs from the generic configuration");
    }
    sort_report(r);
    return r;
}

extraction extract_subsystem(const container& c, const std::set<std::string>& component_ids)
{
    for (const auto& id : component_ids)
        if (!c.find_component(id)) throw unknown_component(id);

    extraction out;
    out.extracted.type = out.remainder.type = c.type;
    out.extracted.name = c.name + "/extracted";
    out.remainder.name = c.name + "/remainder";
    out.extracted.domains = out.remainder.domains = c.domains;

    std::set<std::string> rest_ids;
    for (const auto& comp : c.components) {
        if (component_ids.count(comp.id)) out.extracted.components.push_back(comp);
        else {
            out.remainder.components.push_back(comp);
            rest_ids.insert(comp.id);
        }
    }

    std::set<std::string> inner_cps, rest_cps;
    for (const auto& cp : c.connection_points) {
        bool any_in = false, any_out = false;
        for (const auto& a : cp.attached) {
            (component_ids.count(owner_of(a)) ? any_in : any_out) = true;
        }
        if (any_in && !any_out) {
            out.extracted.connection_points.push_back(cp);
            inner_cps.insert(cp.id);
        } else if (any_out && !any_in) {
            out.remainder.connection_points.push_back(cp);
            rest_cps.insert(cp.id);
        } else if (any_in && any_out) {
            out.cut_points.push_back(cp.id);
            for (const auto& a : cp.attached)
                if (component_ids.count(owner_of(a))) out.boundary.push_back(a);
        }
    }
    std::sort(out.boundary.begin(), out.boundary.end());
    out.boundary.erase(std::unique(out.boundary.begin(), out.boundary.end()), out.boundary.end());
    std::sort(out.cut_points.begin(), out.cut_points.end());

    for (const auto& k : c.constraints) {
        if (constraint_belongs(c, k, component_ids, inner_cps)) out.extracted.constraints.push_back(k);
        if (constraint_belongs(c, k, rest_ids, rest_cps)) out.remainder.constraints.push_back(k);
    }
    return out;
}

int ri_capacity(const component& c)
{
    auto it = c.attributes.find("capacity");
    if (it == c.attributes.end()) return 1;
    auto n = as_number(it->second);
    if (!n || *n < 0 || std::floor(*n) != *n) return 0;
    return static_cast<int>(*n);
}

mapping_result map_to_ri(const container& test_system, const container& ri)
{
    if (test_system.type != sc_type::ts_sc)
        throw sc_type_mismatch("map_to_ri expects a TS-SC test system");
    if (ri.type != sc_type::ri_sc) throw sc_type_mismatch("map_to_ri expects an RI-SC");

    // Within one type label any RI component can host any demand, so filling
    // capacities in id order is optimal and the excess is a minimum core.
    const auto demand = slots_by_type(test_system);
    const auto offer = slots_by_type(ri);

    mapping_result out;
    for (const auto& [type, comps] : demand) {
        std::vector<std::pair<const component*, int>> free;
        if (auto it = offer.find(type); it != offer.end())
            for (const auto* r : it->second) free.emplace_back(r, ri_capacity(*r));
        auto slot = free.begin();
        for (const auto* comp : comps) {
            while (slot != free.end() && slot->second == 0) ++slot;
            if (slot == free.end()) {
                out.unsatisfiable.push_back(comp->id);
                continue;
            }
            out.assignment[comp->id] = slot->first->id;
            --slot->second;
        }
    }
    std::sort(out.unsatisfiable.begin(), out.unsatisfiable.end());
    out.feasible = out.unsatisfiable.empty();
    return out;
}

} // namespace cosim::sysconfig
