#pragma once

#include "cosim/common/scalar.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cosim::sysconfig {

/// The six system configuration types.
enum class sc_type { uc_gsc, tc_gsc, ts_sc, e_sc, ri_sc, ri_gsc };

std::string_view to_string(sc_type t);
std::optional<sc_type> parse_sc_type(std::string_view s);

/// Generic containers describe types; specific ones describe concrete instances.
constexpr bool is_generic(sc_type t) noexcept
{
    return t == sc_type::uc_gsc || t == sc_type::tc_gsc || t == sc_type::ri_gsc;
}

struct domain {
    std::string name;
    std::optional<std::string> parent;

    friend bool operator==(const domain&, const domain&) = default;
};

enum class direction { in, out, bidirectional, undirected };

std::string_view to_string(direction d);
std::optional<direction> parse_direction(std::string_view s);

/// A terminal is owned by the component that lists it.
struct terminal {
    std::string id;
    direction dir = direction::undirected;
    std::string domain;

    friend bool operator==(const terminal&, const terminal&) = default;
};

/// Qualified terminal reference, written `component.terminal`.
struct terminal_ref {
    std::string component;
    std::string terminal;

    std::string str() const { return component + "." + terminal; }
    static std::optional<terminal_ref> parse(std::string_view s);

    friend auto operator<=>(const terminal_ref&, const terminal_ref&) = default;
};

struct container;

struct component {
    std::string id;
    /// Type the component belongs to; in specific containers the generic type it instantiates.
    std::string type_label;
    std::vector<terminal> terminals;
    std::map<std::string, scalar> attributes;
    /// Composite components carry their inner configuration.
    std::shared_ptr<const container> subsystem;
    /// External terminal id -> internal `component.terminal` (composite components only).
    std::map<std::string, std::string> terminal_map;

    const terminal* find_terminal(std::string_view tid) const;
};

struct connection_point {
    std::string id;
    std::string domain;
    std::vector<std::string> attached; // qualified terminal refs

    friend bool operator==(const connection_point&, const connection_point&) = default;
};

struct constraint {
    std::string target;     // id of any configuration object
    std::string expression; // see expression.hpp

    friend bool operator==(const constraint&, const constraint&) = default;
};

struct container {
    sc_type type = sc_type::ts_sc;
    std::string name;
    std::vector<domain> domains;
    std::vector<component> components;
    std::vector<connection_point> connection_points;
    std::vector<constraint> constraints;

    bool generic() const noexcept { return is_generic(type); }

    const component* find_component(std::string_view id) const;
    const domain* find_domain(std::string_view name) const;
    const connection_point* find_connection_point(std::string_view id) const;
    const terminal* find_terminal(const terminal_ref& ref) const;

    /// Type label used for matching; generic components without one use their id.
    std::string effective_type(const component& c) const;
};

bool operator==(const component& a, const component& b);
bool operator==(const container& a, const container& b);

} // namespace cosim::sysconfig
