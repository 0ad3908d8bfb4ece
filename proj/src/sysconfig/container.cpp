#include "cosim/sysconfig/container.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace cosim::sysconfig {

namespace {

constexpr std::array<std::pair<sc_type, std::string_view>, 6> sc_type_names{{
    {sc_type::uc_gsc, "UC-GSC"},
    {sc_type::tc_gsc, "TC-GSC"},
    {sc_type::ts_sc, "TS-SC"},
    {sc_type::e_sc, "E-SC"},
    {sc_type::ri_sc, "RI-SC"},
    {sc_type::ri_gsc, "RI-GSC"},
}};

constexpr std::array<std::pair<direction, std::string_view>, 4> direction_names{{
    {direction::in, "in"},
    {direction::out, "out"},
    {direction::bidirectional, "bidirectional"},
    {direction::undirected, "undirected"},
}};

} // namespace

std::string_view to_string(sc_type t)
{
    for (const auto& [v, n] : sc_type_names)
        if (v == t) return n;
    return "?";
}

std::optional<sc_type> parse_sc_type(std::string_view s)
{
    for (const auto& [v, n] : sc_type_names)
        if (n == s) return v;
    return std::nullopt;
}

std::string_view to_string(direction d)
{
    for (const auto& [v, n] : direction_names)
        if (v == d) return n;
    return "?";
}

std::optional<direction> parse_direction(std::string_view s)
{
    for (const auto& [v, n] : direction_names)
        if (n == s) return v;
    return std::nullopt;
}

std::optional<terminal_ref> terminal_ref::parse(std::string_view s)
{
    const auto dot = s.find('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == s.size()) return std::nullopt;
    if (s.find('.', dot + 1) != std::string_view::npos) return std::nullopt;
    return terminal_ref{std::string(s.substr(0, dot)), std::string(s.substr(dot + 1))};
}

const terminal* component::find_terminal(std::string_view tid) const
{
    auto it = std::find_if(terminals.begin(), terminals.end(),
                           [&](const terminal& t) { return t.id == tid; });
    return it == terminals.end() ? nullptr : &*it;
}

const component* container::find_component(std::string_view id) const
{
    auto it = std::find_if(components.begin(), components.end(),
                           [&](const component& c) { return c.id == id; });
    return it == components.end() ? nullptr : &*it;
}

const domain* container::find_domain(std::string_view n) const
{
    auto it = std::find_if(domains.begin(), domains.end(),
                           [&](const domain& d) { return d.name == n; });
    return it == domains.end() ? nullptr : &*it;
}

const connection_point* container::find_connection_point(std::string_view id) const
{
    auto it = std::find_if(connection_points.begin(), connection_points.end(),
                           [&](const connection_point& cp) { return cp.id == id; });
    return it == connection_points.end() ? nullptr : &*it;
}

const terminal* container::find_terminal(const terminal_ref& ref) const
{
    const auto* c = find_component(ref.component);
    return c ? c->find_terminal(ref.terminal) : nullptr;
}

std::string container::effective_type(const component& c) const
{
    if (!c.type_label.empty() || !generic()) return c.type_label;
    return c.id;
}

bool operator==(const component& a, const component& b)
{
    if (a.id != b.id || a.type_label != b.type_label || a.terminals != b.terminals ||
        a.attributes != b.attributes || a.terminal_map != b.terminal_map)
        return false;
    if (static_cast<bool>(a.subsystem) != static_cast<bool>(b.subsystem)) return false;
    return !a.subsystem || *a.subsystem == *b.subsystem;
}

bool operator==(const container& a, const container& b)
{
    return a.type == b.type && a.name == b.name && a.domains == b.domains &&
           a.components == b.components && a.connection_points == b.connection_points &&
           a.constraints == b.constraints;
}

} // namespace cosim::sysconfig
