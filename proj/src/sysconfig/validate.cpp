#include "cosim/sysconfig/expression.hpp"
#include "cosim/sysconfig/operations.hpp"

#include <map>
#include <set>

namespace cosim::sysconfig {

namespace {

class validator {
public:
    validator(const container& c, std::string prefix) : c_(c), prefix_(std::move(prefix)) {}

    void run(validation_report& out)
    {
        check_domains();
        check_components();
        check_connection_points();
        check_constraints();
        for (auto& d : report_) out.push_back(std::move(d));
    }

private:
    void add(const std::string& object, std::string code, std::string message)
    {
        report_.push_back({severity::error, prefix_ + object, std::move(code), std::move(message)});
    }

    void check_domains()
    {
        std::set<std::string> seen;
        for (const auto& d : c_.domains) {
            if (!seen.insert(d.name).second)
                add(d.name, "duplicate_id", "duplicate domain name '" + d.name + "'");
            if (d.parent && !c_.find_domain(*d.parent))
                add(d.name, "unknown_parent_domain", "parent domain '" + *d.parent + "' does not exist");
        }
        for (const auto& d : c_.domains) {
            std::set<std::string> chain{d.name};
            const domain* cur = &d;
            while (cur->parent) {
                const domain* next = c_.find_domain(*cur->parent);
                if (!next) break;
                if (!chain.insert(next->name).second) {
                    add(d.name, "domain_cycle", "domain hierarchy contains a cycle");
                    break;
                }
                cur = next;
            }
        }
    }

    void check_components()
    {
        std::set<std::string> seen;
        for (const auto& comp : c_.components) {
            if (comp.id.empty() || comp.id.find('.') != std::string::npos)
                add(comp.id, "invalid_id", "component id must be non-empty and must not contain '.'");
            if (!seen.insert(comp.id).second)
                add(comp.id, "duplicate_id", "duplicate component id '" + comp.id + "'");
            if (!c_.generic() && comp.type_label.empty())
                add(comp.id, "missing_type_label",
                    "component in a specific container lacks the generic type_label it instantiates");

            std::set<std::string> tids;
            for (const auto& t : comp.terminals) {
                const auto ref = comp.id + "." + t.id;
                if (!tids.insert(t.id).second)
                    add(ref, "duplicate_id", "duplicate terminal id '" + t.id + "'");
                if (!c_.find_domain(t.domain))
                    add(ref, "unknown_domain", "terminal references unknown domain '" + t.domain + "'");
            }
            if (comp.subsystem) check_composite(comp);
            else if (!comp.terminal_map.empty())
                add(comp.id, "composite_mapping", "terminal_map given without a subsystem");
        }
    }

    void check_composite(const component& comp)
    {
        const container& inner = *comp.subsystem;
        std::set<std::string> inner_connected;
        for (const auto& cp : inner.connection_points)
            for (const auto& a : cp.attached) inner_connected.insert(a);

        std::map<std::string, std::string> used;
        for (const auto& t : comp.terminals) {
            const auto ref = comp.id + "." + t.id;
            auto it = comp.terminal_map.find(t.id);
            if (it == comp.terminal_map.end()) {
                add(ref, "composite_mapping", "composite terminal has no internal mapping");
                continue;
            }
            auto iref = terminal_ref::parse(it->second);
            const terminal* target = iref ? inner.find_terminal(*iref) : nullptr;
            if (!target) {
                add(ref, "composite_mapping", "maps to unknown internal terminal '" + it->second + "'");
                continue;
            }
            if (inner_connected.count(it->second))
                add(ref, "composite_mapping",
                    "maps to internal terminal '" + it->second + "' which is already connected");
            if (target->domain != t.domain)
                add(ref, "composite_mapping", "internal terminal '" + it->second + "' is in another domain");
            if (auto [pos, fresh] = used.emplace(it->second, t.id); !fresh)
                add(ref, "composite_mapping",
                    "internal terminal '" + it->second + "' already mapped by '" + pos->second + "'");
        }
        for (const auto& [ext, _] : comp.terminal_map)
            if (!comp.find_terminal(ext))
                add(comp.id, "composite_mapping", "terminal_map names unknown terminal '" + ext + "'");

        validator nested(inner, prefix_ + comp.id + "/");
        nested.run(report_);
    }

    void check_connection_points()
    {
        std::set<std::string> seen;
        for (const auto& cp : c_.connection_points) {
            if (!seen.insert(cp.id).second)
                add(cp.id, "duplicate_id", "duplicate connection point id '" + cp.id + "'");
            if (!c_.find_domain(cp.domain))
                add(cp.id, "unknown_domain", "connection point references unknown domain '" + cp.domain + "'");
            std::set<std::string> distinct(cp.attached.begin(), cp.attached.end());
            if (distinct.size() < 2)
                add(cp.id, "cp_arity", "connection point must join at least two terminals");
            for (const auto& a : cp.attached) {
                auto ref = terminal_ref::parse(a);
                const terminal* t = ref ? c_.find_terminal(*ref) : nullptr;
                if (!t) {
                    add(cp.id, "unknown_terminal", "attached terminal '" + a + "' does not exist");
                    continue;
                }
                if (t->domain != cp.domain)
                    add(cp.id, "cp_domain_mismatch",
                        "terminal '" + a + "' is in domain '" + t->domain + "', connection point is '" +
                            cp.domain + "'");
            }
        }
    }

    void check_constraints()
    {
        for (std::size_t i = 0; i < c_.constraints.size(); ++i) {
            const auto& k = c_.constraints[i];
            const auto* comp = c_.find_component(k.target);
            const bool other_target = !comp && (c_.find_domain(k.target) || c_.find_connection_point(k.target) ||
                                                (terminal_ref::parse(k.target) &&
                                                 c_.find_terminal(*terminal_ref::parse(k.target))));
            if (!comp && !other_target) {
                add(k.target, "constraint_target", "constraint targets unknown object");
                continue;
            }
            expression e;
            try {
                e = parse_expression(k.expression);
            } catch (const expression_error& ex) {
                add(k.target, "constraint_syntax", ex.what());
                continue;
            }
            bool resolvable = true;
            for (const auto& n : e.referenced_names()) {
                if (!comp || !comp->attributes.count(n)) {
                    add(k.target, "constraint_attribute",
                        "constraint references attribute '" + n + "' not present on the target");
                    resolvable = false;
                }
            }
            if (!resolvable || c_.generic()) continue;
            try {
                const bool ok = evaluate(e, [&](aggregate, const std::string& n) -> std::optional<scalar> {
                    auto it = comp->attributes.find(n);
                    if (it == comp->attributes.end()) return std::nullopt;
                    return it->second;
                });
                if (!ok) add(k.target, "constraint_violated", "constraint '" + k.expression + "' does not hold");
            } catch (const expression_error& ex) {
                add(k.target, "constraint_type", ex.what());
            }
        }
    }

    const container& c_;
    std::string prefix_;
    validation_report report_;
};

} // namespace

validation_report validate(const container& c)
{
    validation_report report;
    validator(c, "").run(report);
    sort_report(report);
    return report;
}

} // namespace cosim::sysconfig
