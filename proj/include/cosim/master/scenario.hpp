#pragma once

#include "cosim/common/error.hpp"
#include "cosim/federate/integrators.hpp"
#include "cosim/federate/interfaces.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cosim::master {

using federate::cs_federate;
using federate::parameter_set;
using federate::value;

enum class connection_mode { direct, time_shifted, iterative };

std::string_view to_string(connection_mode m);
connection_mode parse_connection_mode(std::string_view s);

struct endpoint {
    std::string instance;
    std::string variable;

    /// "instance.variable"
    static endpoint parse(std::string_view text);
    std::string str() const { return instance + "." + variable; }
    friend auto operator<=>(const endpoint&, const endpoint&) = default;
};

struct connection {
    endpoint source;
    endpoint target;
    connection_mode mode = connection_mode::direct;
    /// Value seen by the target at t = 0 on a time_shifted edge.
    std::optional<value> initial;
};

class type_mismatch : public error {
public:
    using error::error;
};

class causality_error : public error {
public:
    using error::error;
};

class cycle_error : public error {
public:
    explicit cycle_error(std::vector<std::string> ids);
    const std::vector<std::string>& ids() const noexcept { return ids_; }

private:
    std::vector<std::string> ids_;
};

class unresolved_cycle : public error {
public:
    explicit unresolved_cycle(std::vector<std::string> ids);
    const std::vector<std::string>& ids() const noexcept { return ids_; }

private:
    std::vector<std::string> ids_;
};

class convergence_failure : public error {
public:
    convergence_failure(std::vector<std::string> group, double t, double residual);
    const std::vector<std::string>& group() const noexcept { return group_; }
    double time() const noexcept { return t_; }
    double residual() const noexcept { return residual_; }

private:
    std::vector<std::string> group_;
    double t_;
    double residual_;
};

class federate_error : public error {
public:
    federate_error(std::string instance, double t, const std::string& what);
    const std::string& instance() const noexcept { return instance_; }
    double time() const noexcept { return t_; }

private:
    std::string instance_;
    double t_;
};

struct federate_slot {
    std::unique_ptr<cs_federate> object;
    double step_size = 0.0;
    parameter_set params;
};

/// Federates, data-flow connections and run settings.
///
/// Federates are keyed by instance id; insertion order carries no meaning.
class scenario {
public:
    double stop_time = 0.0;
    std::uint64_t seed = 0;
    double epsilon = 1e-6;
    int max_iterations = 50;

    void add_federate(const std::string& id, std::unique_ptr<cs_federate> fed, double step_size,
                      parameter_set params = {});

    /// Wraps a model-exchange federate in a capsule stepping at `step_size`.
    void add_federate(const std::string& id, std::unique_ptr<federate::me_federate> fed, double step_size,
                      parameter_set params = {}, federate::integrator_kind integrator = federate::integrator_kind::rk4,
                      std::optional<double> internal_step = {});

    /// Throws type_mismatch, causality_error, cycle_error.
    void connect(const endpoint& source, const endpoint& target, connection_mode mode = connection_mode::direct,
                 std::optional<value> initial = {});

    const std::map<std::string, federate_slot>& federates() const noexcept { return federates_; }
    std::map<std::string, federate_slot>& federates() noexcept { return federates_; }
    const std::vector<connection>& connections() const noexcept { return connections_; }
    const federate_slot& at(const std::string& id) const;

private:
    const federate::variable& resolve(const endpoint& e, federate::causality expected) const;

    std::map<std::string, federate_slot> federates_;
    std::vector<connection> connections_;
};

/// Free-function form of scenario::connect.
inline void connect(scenario& s, const endpoint& source, const endpoint& target,
                    connection_mode mode = connection_mode::direct, std::optional<value> initial = {})
{
    s.connect(source, target, mode, std::move(initial));
}

/// Seed for the stochastic federate `instance`: independent of declaration order.
std::uint64_t derive_seed(std::uint64_t scenario_seed, std::string_view instance);

} // namespace cosim::master
