#include "cosim/master/scenario.hpp"

#include "cosim/federate/capsule.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace cosim::master {

namespace {

std::string join(const std::vector<std::string>& ids)
{
    std::string out;
    for (const auto& id : ids) out += (out.empty() ? "" : ", ") + id;
    return out;
}

} // namespace

std::string_view to_string(connection_mode m)
{
    switch (m) {
    case connection_mode::direct: return "direct";
    case connection_mode::time_shifted: return "time_shifted";
    case connection_mode::iterative: return "iterative";
    }
    return "?";
}

connection_mode parse_connection_mode(std::string_view s)
{
    if (s == "direct") return connection_mode::direct;
    if (s == "time_shifted") return connection_mode::time_shifted;
    if (s == "iterative") return connection_mode::iterative;
    throw error("unknown connection mode '" + std::string(s) + "'");
}

endpoint endpoint::parse(std::string_view text)
{
    const auto dot = text.find('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == text.size())
        throw error("endpoint '" + std::string(text) + "' is not of the form instance.variable");
    return {std::string(text.substr(0, dot)), std::string(text.substr(dot + 1))};
}

cycle_error::cycle_error(std::vector<std::string> ids)
    : error("direct connection closes cycle through [" + join(ids) + "]"), ids_(std::move(ids))
{
}

unresolved_cycle::unresolved_cycle(std::vector<std::string> ids)
    : error("cycle through [" + join(ids) + "] has only direct edges"), ids_(std::move(ids))
{
}

convergence_failure::convergence_failure(std::vector<std::string> group, double t, double residual)
    : error("loop group [" + join(group) + "] did not converge at t=" + std::to_string(t) +
            " (residual " + std::to_string(residual) + ")"),
      group_(std::move(group)), t_(t), residual_(residual)
{
}

federate_error::federate_error(std::string instance, double t, const std::string& what)
    : error("federate '" + instance + "' failed at t=" + std::to_string(t) + ": " + what),
      instance_(std::move(instance)), t_(t)
{
}

void scenario::add_federate(const std::string& id, std::unique_ptr<cs_federate> fed, double step_size,
                            parameter_set params)
{
    if (id.empty() || id.find('.') != std::string::npos) throw error("invalid instance id '" + id + "'");
    if (!fed) throw error("federate '" + id + "' is null");
    if (!(step_size > 0.0) || !std::isfinite(step_size))
        throw error("federate '" + id + "': step size must be positive");
    if (federates_.count(id)) throw error("duplicate instance id '" + id + "'");
    federates_.emplace(id, federate_slot{std::move(fed), step_size, std::move(params)});
}

void scenario::add_federate(const std::string& id, std::unique_ptr<federate::me_federate> fed, double step_size,
                            parameter_set params, federate::integrator_kind integrator,
                            std::optional<double> internal_step)
{
    const double h = internal_step.value_or(step_size);
    add_federate(id, std::make_unique<federate::me_capsule>(std::move(fed), integrator, h, step_size), step_size,
                 std::move(params));
}

const federate_slot& scenario::at(const std::string& id) const
{
    const auto it = federates_.find(id);
    if (it == federates_.end()) throw error("unknown instance '" + id + "'");
    return it->second;
}

const federate::variable& scenario::resolve(const endpoint& e, federate::causality expected) const
{
    const auto& md = at(e.instance).object->description();
    const auto* v = md.find(e.variable);
    if (!v) throw causality_error("'" + e.str() + "' does not exist");
    if (v->causality != expected)
        throw causality_error("'" + e.str() + "' is " + std::string(federate::to_string(v->causality)) +
                              ", expected " + std::string(federate::to_string(expected)));
    return *v;
}

void scenario::connect(const endpoint& source, const endpoint& target, connection_mode mode,
                       std::optional<value> initial)
{
    const auto& out = resolve(source, federate::causality::output);
    const auto& in = resolve(target, federate::causality::input);
    if (out.type != in.type)
        throw type_mismatch(source.str() + " (" + std::string(federate::to_string(out.type)) + ") -> " + target.str() +
                            " (" + std::string(federate::to_string(in.type)) + ")");
    for (const auto& c : connections_)
        if (c.target == target) throw causality_error("input '" + target.str() + "' is already connected");

    if (mode == connection_mode::direct) {
        // Is source reachable from target over direct edges?
        std::map<std::string, std::set<std::string>> adj;
        for (const auto& c : connections_)
            if (c.mode == connection_mode::direct) adj[c.source.instance].insert(c.target.instance);
        std::vector<std::string> path;
        std::set<std::string> seen;
        std::function<bool(const std::string&)> dfs = [&](const std::string& n) {
            path.push_back(n);
            if (n == source.instance) return true;
            if (seen.insert(n).second)
                for (const auto& m : adj[n])
                    if (dfs(m)) return true;
            path.pop_back();
            return false;
        };
        if (dfs(target.instance)) {
            std::vector<std::string> ids(path.begin(), path.end());
            std::sort(ids.begin(), ids.end());
            ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
            throw cycle_error(ids);
        }
    }

    if (initial) initial = federate::coerce(*initial, in.type);
    connections_.push_back({source, target, mode, std::move(initial)});
}

std::uint64_t derive_seed(std::uint64_t scenario_seed, std::string_view instance)
{
    std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
    for (unsigned char c : instance) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return scenario_seed ^ h;
}

} // namespace cosim::master
