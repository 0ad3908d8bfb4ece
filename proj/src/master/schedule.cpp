#include "cosim/master/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <set>

namespace cosim::master {

namespace {

using adjacency = std::map<std::string, std::set<std::string>>;

// Tarjan over sorted adjacency; components come out in a deterministic order.
std::vector<std::vector<std::string>> strongly_connected(const std::vector<std::string>& nodes, const adjacency& adj)
{
    std::map<std::string, int> index, low;
    std::set<std::string> on_stack;
    std::vector<std::string> stack;
    std::vector<std::vector<std::string>> out;
    int counter = 0;

    std::function<void(const std::string&)> visit = [&](const std::string& v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack.insert(v);
        if (auto it = adj.find(v); it != adj.end()) {
            for (const auto& w : it->second) {
                if (!index.count(w)) {
                    visit(w);
                    low[v] = std::min(low[v], low[w]);
                } else if (on_stack.count(w)) {
                    low[v] = std::min(low[v], index[w]);
                }
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::string> comp;
            std::string w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack.erase(w);
                comp.push_back(w);
            } while (w != v);
            std::sort(comp.begin(), comp.end());
            out.push_back(std::move(comp));
        }
    };
    for (const auto& n : nodes)
        if (!index.count(n)) visit(n);
    return out;
}

// Kahn's algorithm, smallest available key first. Returns nullopt on a cycle.
template <class Key>
std::optional<std::vector<std::size_t>> topo_sort(std::size_t n, const std::vector<std::set<std::size_t>>& succ,
                                                  const std::vector<Key>& keys)
{
    std::vector<int> indeg(n, 0);
    for (const auto& s : succ)
        for (auto j : s) ++indeg[j];
    auto cmp = [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> ready(cmp);
    for (std::size_t i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.push(i);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        const auto i = ready.top();
        ready.pop();
        order.push_back(i);
        for (auto j : succ[i])
            if (--indeg[j] == 0) ready.push(j);
    }
    if (order.size() != n) return std::nullopt;
    return order;
}

std::int64_t to_ticks(double h)
{
    const auto ticks = std::llround(h * 1e9);
    if (ticks <= 0 || std::abs(static_cast<double>(ticks) * 1e-9 - h) > 1e-12 * std::max(1.0, h))
        throw error("step size " + std::to_string(h) + " s is not a whole number of nanoseconds");
    return ticks;
}

} // namespace

double sync_interval(const scenario& s)
{
    std::int64_t l = 0;
    for (const auto& [id, slot] : s.federates()) {
        const auto t = to_ticks(slot.step_size);
        l = l == 0 ? t : std::lcm(l, t);
    }
    if (l == 0) throw error("scenario has no federates");
    return static_cast<double>(l) * 1e-9;
}

schedule_graph build_schedule(const scenario& s)
{
    schedule_graph g;
    for (const auto& [id, slot] : s.federates()) g.nodes.push_back(id);

    adjacency all, direct;
    std::set<std::pair<std::string, std::string>> iterative;
    for (const auto& c : s.connections()) {
        const auto& a = c.source.instance;
        const auto& b = c.target.instance;
        if (c.mode == connection_mode::time_shifted) continue;
        all[a].insert(b);
        if (c.mode == connection_mode::direct) {
            direct[a].insert(b);
            g.edges.emplace_back(a, b);
        } else {
            iterative.emplace(a, b);
        }
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());

    auto comps = strongly_connected(g.nodes, all);
    std::map<std::string, std::size_t> comp_of;
    for (std::size_t i = 0; i < comps.size(); ++i)
        for (const auto& n : comps[i]) comp_of[n] = i;

    // Order members inside each component by their direct edges.
    std::vector<schedule_unit> units(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const auto& members = comps[i];
        bool has_iterative = false;
        for (const auto& [a, b] : iterative)
            if (comp_of[a] == i && comp_of[b] == i) has_iterative = true;
        if (members.size() > 1 && !has_iterative) throw unresolved_cycle(members);

        std::map<std::string, std::size_t> local;
        for (std::size_t k = 0; k < members.size(); ++k) local[members[k]] = k;
        std::vector<std::set<std::size_t>> succ(members.size());
        for (const auto& [a, targets] : direct)
            if (local.count(a))
                for (const auto& b : targets)
                    if (local.count(b)) succ[local[a]].insert(local[b]);
        const auto order = topo_sort(members.size(), succ, members);
        if (!order) throw unresolved_cycle(members);
        for (auto k : *order) units[i].members.push_back(members[k]);
        units[i].loop = has_iterative;
        if (has_iterative) {
            for (const auto& m : members)
                if (!s.at(m).object->supports_rollback())
                    throw error("federate '" + m + "' joins an iterative loop but cannot roll back");
        }
    }

    // Condensation, ties broken by the smallest member id.
    std::vector<std::set<std::size_t>> succ(comps.size());
    for (const auto& [a, targets] : all)
        for (const auto& b : targets)
            if (comp_of[a] != comp_of[b]) succ[comp_of[a]].insert(comp_of[b]);
    std::vector<std::string> keys;
    for (const auto& c : comps) keys.push_back(c.front());
    const auto order = topo_sort(comps.size(), succ, keys);
    if (!order) throw error("internal: condensation is cyclic");

    for (auto i : *order) {
        g.units.push_back(units[i]);
        if (units[i].loop) g.loop_groups.push_back(units[i].members);
        for (const auto& m : units[i].members) g.order.push_back(m);
    }
    return g;
}

} // namespace cosim::master
