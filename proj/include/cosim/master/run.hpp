#pragma once

#include "cosim/master/results.hpp"
#include "cosim/master/schedule.hpp"

namespace cosim::master {

/// Initializes every federate at t = 0 and advances to stop_time on the
/// synchronization grid. Throws federate_error or convergence_failure.
result_store run(scenario& s);

} // namespace cosim::master
