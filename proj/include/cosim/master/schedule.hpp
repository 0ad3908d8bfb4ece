#pragma once

#include "cosim/master/scenario.hpp"

#include <string>
#include <vector>

namespace cosim::master {

/// One entry of the execution sequence: a single federate or a loop group.
struct schedule_unit {
    std::vector<std::string> members; // execution order inside the unit
    bool loop = false;
};

struct schedule_graph {
    std::vector<std::string> nodes;              // sorted instance ids
    std::vector<std::pair<std::string, std::string>> edges; // direct edges, (source, target)
    std::vector<std::string> order;              // flattened execution order
    std::vector<std::vector<std::string>> loop_groups;
    std::vector<schedule_unit> units;
};

/// Throws unresolved_cycle when a cycle consists of direct edges only, and
/// cosim::error when a loop member cannot roll back.
schedule_graph build_schedule(const scenario& s);

/// Global synchronization interval: least common multiple of the step sizes.
double sync_interval(const scenario& s);

} // namespace cosim::master
