#pragma once

#include "cosim/common/error.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cosim::models {

enum class bus_type { slack, pv, pq };

struct bus {
    int id = 0;
    bus_type type = bus_type::pq;
    double v_set = 1.0; // slack and PV
    double p_gen = 0.0;
    double q_gen = 0.0;
    double p_load = 0.0;
    double q_load = 0.0;
    double g_shunt = 0.0;
    double b_shunt = 0.0;
};

struct branch {
    int from = 0;
    int to = 0;
    double r = 0.0;
    double x = 0.0;
    double b = 0.0;     // total line charging
    double tap = 1.0;   // off-nominal ratio on the from side
};

struct network {
    std::vector<bus> buses;
    std::vector<branch> branches;
    double base_mva = 100.0;
    double frequency_hz = 50.0;

    std::size_t index_of(int bus_id) const; // throws cosim::error
    const bus& find_bus(int bus_id) const { return buses[index_of(bus_id)]; }
};

/// Connectivity, exactly one slack, non-zero impedances, unique ids.
void check_network(const network& n);

network network_from_json(const nlohmann::json& j);
nlohmann::json to_json(const network& n);

/// "builtin:ieee9_pcc" or a path to a JSON network file.
network load_network(const std::string& ref);

/// 9-bus benchmark (Anderson numbering) plus a PCC bus 10 behind an
/// equivalent collection impedance from bus 8.
network ieee9_pcc();

struct fault_location {
    enum class kind { bus, branch } where = kind::bus;
    int bus_id = 0;          // kind::bus
    int from = 0, to = 0;    // kind::branch
    double position = 0.5;   // fraction of the branch from `from`

    /// "bus:8" or "branch:5-7@0.5"
    static fault_location parse(const std::string& text);
    std::string str() const;
};

/// Returns the network with the fault bus in place (splitting a branch if
/// needed) and the id of the bus where the fault shunt goes.
std::pair<network, int> prepare_fault(network n, const fault_location& loc);

} // namespace cosim::models
