#include "cosim/models/network.hpp"

#include "cosim/common/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>
#include <set>

namespace cosim::models {

using json_io::json;

std::size_t network::index_of(int bus_id) const
{
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == bus_id) return i;
    throw error("unknown bus " + std::to_string(bus_id));
}

void check_network(const network& n)
{
    if (n.buses.empty()) throw error("network has no buses");
    std::set<int> ids;
    int slack = 0;
    for (const auto& b : n.buses) {
        if (!ids.insert(b.id).second) throw error("duplicate bus id " + std::to_string(b.id));
        if (b.type == bus_type::slack) ++slack;
    }
    if (slack != 1) throw error("network must have exactly one slack bus, found " + std::to_string(slack));

    std::map<int, std::set<int>> adj;
    for (const auto& br : n.branches) {
        if (!ids.count(br.from) || !ids.count(br.to))
            throw error("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) + " references an unknown bus");
        if (br.r == 0.0 && br.x == 0.0)
            throw error("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) + " has zero impedance");
        if (!(br.tap > 0.0)) throw error("branch tap ratio must be positive");
        adj[br.from].insert(br.to);
        adj[br.to].insert(br.from);
    }
    std::set<int> seen{n.buses.front().id};
    std::vector<int> todo{n.buses.front().id};
    while (!todo.empty()) {
        const int b = todo.back();
        todo.pop_back();
        for (int m : adj[b])
            if (seen.insert(m).second) todo.push_back(m);
    }
    if (seen.size() != ids.size()) throw error("network is not connected");
}

namespace {

bus_type parse_bus_type(const std::string& s, const std::string& path)
{
    if (s == "slack") return bus_type::slack;
    if (s == "PV" || s == "pv") return bus_type::pv;
    if (s == "PQ" || s == "pq") return bus_type::pq;
    throw schema_error(path, "unknown bus type '" + s + "'");
}

std::string bus_type_name(bus_type t)
{
    switch (t) {
    case bus_type::slack: return "slack";
    case bus_type::pv: return "PV";
    case bus_type::pq: return "PQ";
    }
    return "?";
}

} // namespace

network network_from_json(const json& j)
{
    using namespace json_io;
    require_object(j, "");
    check_keys(j, {"buses", "branches", "base_mva", "frequency_hz", "name"}, "");
    network n;
    n.base_mva = opt_number(j, "base_mva", "", 100.0);
    n.frequency_hz = opt_number(j, "frequency_hz", "", 50.0);
    const auto& buses = require(j, "buses", "");
    require_array(buses, "/buses");
    for (std::size_t i = 0; i < buses.size(); ++i) {
        const auto p = "/buses/" + std::to_string(i);
        const auto& b = buses[i];
        require_object(b, p);
        check_keys(b, {"id", "type", "v_set", "p_gen", "q_gen", "p_load", "q_load", "g_shunt", "b_shunt"}, p);
        bus x;
        x.id = static_cast<int>(get_number(b, "id", p));
        x.type = parse_bus_type(get_string(b, "type", p), p + "/type");
        x.v_set = opt_number(b, "v_set", p, 1.0);
        x.p_gen = opt_number(b, "p_gen", p, 0.0);
        x.q_gen = opt_number(b, "q_gen", p, 0.0);
        x.p_load = opt_number(b, "p_load", p, 0.0);
        x.q_load = opt_number(b, "q_load", p, 0.0);
        x.g_shunt = opt_number(b, "g_shunt", p, 0.0);
        x.b_shunt = opt_number(b, "b_shunt", p, 0.0);
        n.buses.push_back(x);
    }
    const auto& branches = require(j, "branches", "");
    require_array(branches, "/branches");
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const auto p = "/branches/" + std::to_string(i);
        const auto& b = branches[i];
        require_object(b, p);
        check_keys(b, {"from", "to", "r", "x", "b", "tap"}, p);
        branch x;
        x.from = static_cast<int>(get_number(b, "from", p));
        x.to = static_cast<int>(get_number(b, "to", p));
        x.r = opt_number(b, "r", p, 0.0);
        x.x = opt_number(b, "x", p, 0.0);
        x.b = opt_number(b, "b", p, 0.0);
        x.tap = opt_number(b, "tap", p, 1.0);
        n.branches.push_back(x);
    }
    check_network(n);
    return n;
}

json to_json(const network& n)
{
    json buses = json::array(), branches = json::array();
    for (const auto& b : n.buses)
        buses.push_back({{"id", b.id},
                         {"type", bus_type_name(b.type)},
                         {"v_set", b.v_set},
                         {"p_gen", b.p_gen},
                         {"q_gen", b.q_gen},
                         {"p_load", b.p_load},
                         {"q_load", b.q_load},
                         {"g_shunt", b.g_shunt},
                         {"b_shunt", b.b_shunt}});
    for (const auto& b : n.branches)
        branches.push_back({{"from", b.from}, {"to", b.to}, {"r", b.r}, {"x", b.x}, {"b", b.b}, {"tap", b.tap}});
    return {{"base_mva", n.base_mva}, {"frequency_hz", n.frequency_hz}, {"buses", buses}, {"branches", branches}};
}

network ieee9_pcc()
{
    network n;
    n.base_mva = 100.0;
    n.frequency_hz = 50.0;
    n.buses = {
        {1, bus_type::slack, 1.04},
        {2, bus_type::pv, 1.025, 1.63},
        {3, bus_type::pv, 1.025, 0.85},
        {4, bus_type::pq},
        {5, bus_type::pq, 1.0, 0.0, 0.0, 1.25, 0.50},
        {6, bus_type::pq, 1.0, 0.0, 0.0, 0.90, 0.30},
        {7, bus_type::pq},
        {8, bus_type::pq, 1.0, 0.0, 0.0, 1.00, 0.35},
        {9, bus_type::pq},
        {10, bus_type::pq},
    };
    n.branches = {
        {1, 4, 0.0, 0.0576, 0.0},      {4, 5, 0.010, 0.085, 0.176},   {4, 6, 0.017, 0.092, 0.158},
        {5, 7, 0.032, 0.161, 0.306},   {6, 9, 0.039, 0.170, 0.358},   {7, 8, 0.0085, 0.072, 0.149},
        {8, 9, 0.0119, 0.1008, 0.209}, {2, 7, 0.0, 0.0625, 0.0},      {3, 9, 0.0, 0.0586, 0.0},
        {8, 10, 0.005, 0.06, 0.0},
    };
    return n;
}

network load_network(const std::string& ref)
{
    if (ref == "builtin:ieee9_pcc") return ieee9_pcc();
    if (ref.rfind("builtin:", 0) == 0) throw error("unknown built-in network '" + ref + "'");
    return network_from_json(json_io::load_file(ref));
}

fault_location fault_location::parse(const std::string& text)
{
    static const std::regex bus_re(R"(bus:(\d+))");
    static const std::regex branch_re(R"(branch:(\d+)-(\d+)(?:@([0-9]*\.?[0-9]+))?)");
    std::smatch m;
    fault_location f;
    if (std::regex_match(text, m, bus_re)) {
        f.where = kind::bus;
        f.bus_id = std::stoi(m[1]);
        return f;
    }
    if (std::regex_match(text, m, branch_re)) {
        f.where = kind::branch;
        f.from = std::stoi(m[1]);
        f.to = std::stoi(m[2]);
        f.position = m[3].matched ? std::stod(m[3]) : 0.5;
        if (!(f.position > 0.0 && f.position < 1.0))
            throw error("fault position must lie strictly inside the branch: '" + text + "'");
        return f;
    }
    throw error("bad fault location '" + text + "' (expected bus:<id> or branch:<from>-<to>@<fraction>)");
}

std::string fault_location::str() const
{
    if (where == kind::bus) return "bus:" + std::to_string(bus_id);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", position);
    return "branch:" + std::to_string(from) + "-" + std::to_string(to) + "@" + buf;
}

std::pair<network, int> prepare_fault(network n, const fault_location& loc)
{
    if (loc.where == fault_location::kind::bus) {
        n.index_of(loc.bus_id);
        return {std::move(n), loc.bus_id};
    }
    auto it = std::find_if(n.branches.begin(), n.branches.end(), [&](const branch& b) {
        return (b.from == loc.from && b.to == loc.to) || (b.from == loc.to && b.to == loc.from);
    });
    if (it == n.branches.end())
        throw error("no branch " + std::to_string(loc.from) + "-" + std::to_string(loc.to));
    if (it->tap != 1.0) throw error("cannot split a transformer branch");
    const branch old = *it;
    // position is measured from loc.from
    const double f = old.from == loc.from ? loc.position : 1.0 - loc.position;
    int mid = 0;
    for (const auto& b : n.buses) mid = std::max(mid, b.id);
    ++mid;
    n.branches.erase(it);
    n.buses.push_back({mid, bus_type::pq});
    n.branches.push_back({old.from, mid, old.r * f, old.x * f, old.b * f, 1.0});
    n.branches.push_back({mid, old.to, old.r * (1 - f), old.x * (1 - f), old.b * (1 - f), 1.0});
    return {std::move(n), mid};
}

} // namespace cosim::models
