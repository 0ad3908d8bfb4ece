#pragma once

#include "cosim/federate/interfaces.hpp"
#include "cosim/models/frt.hpp"
#include "cosim/models/power_flow.hpp"

#include <deque>
#include <random>

namespace cosim::models {

using federate::model_description;
using federate::parameter_set;
using federate::step_status;
using federate::value;
using federate::value_ref;

/// Stepping federate backed by a variable_store.
class basic_cs : public federate::cs_federate {
public:
    explicit basic_cs(model_description md) : store_(std::move(md)) {}

    const model_description& description() const override { return store_.description(); }
    void set_input(value_ref ref, const value& v) override { store_.set_input(ref, v); }
    value get_output(value_ref ref) const override { return store_.get(ref); }
    std::string last_error() const override { return last_error_; }

protected:
    value_ref ref(std::string_view name) const;
    double real(std::string_view name) const { return store_.real(ref(name)); }
    std::int64_t integer(std::string_view name) const { return store_.integer(ref(name)); }
    bool boolean(std::string_view name) const { return store_.boolean(ref(name)); }
    const std::string& string(std::string_view name) const { return store_.string(ref(name)); }
    void put(std::string_view name, const value& v) { store_.set(ref(name), v); }

    federate::variable_store store_;
    std::string last_error_;
};

/// Quasi-static transmission grid with the wind power plant as a current
/// source at the PCC bus. Every step re-solves the power flow.
///
/// The converter current is placed in the frame of the PCC voltage angle of
/// the previous solution. The fault is applied while `fault_on` is set or
/// while fault_t_on <= t < fault_t_off (disabled when fault_t_on < 0).
class grid_federate final : public basic_cs {
public:
    grid_federate();

    void initialize(double start_time, const parameter_set& params) override;
    step_status update_outputs(double t) override;
    step_status do_step(double t, double dt) override;

    bool supports_rollback() const override { return true; }
    std::any save_state() const override;
    void restore_state(const std::any& state) override;

    const network& grid() const noexcept { return net_; }
    const pf_result& base_case() const noexcept { return base_; }
    const pf_result& solution() const noexcept { return last_; }
    int fault_bus() const noexcept { return fault_bus_; }

private:
    bool faulted(double t) const;
    step_status solve(double t);

    network net_;
    Eigen::MatrixXcd ybus_;
    pf_result base_;
    pf_result last_;
    double frame_ = 0.0;
    std::size_t pcc_ = 0;
    int fault_bus_ = 0;
};

/// Aggregated wind generator: converter currents tracking limited references
/// with a first-order lag.
class wtg_model final : public federate::me_federate {
public:
    wtg_model();

    const model_description& description() const override { return store_.description(); }
    void initialize(double start_time, const parameter_set& params) override;
    void set_time(double t) override { t_ = t; }
    void set_continuous_states(std::span<const double> x) override;
    std::vector<double> get_continuous_states() const override { return {x_[0], x_[1]}; }
    std::vector<double> get_derivatives() const override;
    void set_input(value_ref ref, const value& v) override { store_.set_input(ref, v); }
    value get_output(value_ref ref) const override;

    /// Limited current reference for the present inputs.
    std::pair<double, double> reference() const;

private:
    federate::variable_store store_;
    double t_ = 0.0;
    double x_[2] = {0.0, 0.0};
};

/// Fault ride-through state machine (discrete).
class frt_fsm final : public basic_cs {
public:
    frt_fsm();

    void initialize(double start_time, const parameter_set& params) override;
    step_status update_outputs(double t) override;
    step_status do_step(double t, double dt) override;

    bool supports_rollback() const override { return true; }
    std::any save_state() const override { return std::pair{state_, store_.snapshot()}; }
    void restore_state(const std::any& s) override;

private:
    void evaluate();
    frt_state state_ = frt_state::normal;
};

/// Supervisory Q(V) controller. Holds its output outside NORMAL operation.
class qv_controller final : public basic_cs {
public:
    qv_controller();

    void initialize(double start_time, const parameter_set& params) override;
    step_status update_outputs(double t) override;
    step_status do_step(double t, double dt) override;

    bool supports_rollback() const override { return true; }
    std::any save_state() const override { return store_.snapshot(); }
    void restore_state(const std::any& s) override;

private:
    void evaluate();
    qv_curve curve_;
};

/// Gaussian delay draws, max(d_min, N(mu, sigma)).
class delay_sampler {
public:
    delay_sampler(double mu, double sigma, double d_min, std::uint64_t seed);
    double draw();

private:
    double mu_, sigma_, d_min_;
    std::mt19937_64 rng_;
};

/// Delays its input by a random latency drawn once per input change.
class comm_delay final : public basic_cs {
public:
    comm_delay();

    void initialize(double start_time, const parameter_set& params) override;
    step_status update_outputs(double t) override;
    step_status do_step(double t, double dt) override;

    bool supports_rollback() const override { return true; }
    std::any save_state() const override;
    void restore_state(const std::any& s) override;

private:
    struct message {
        double sent;
        double arrival;
        double v;
    };
    struct saved {
        std::map<value_ref, value> values;
        std::optional<delay_sampler> sampler;
        std::deque<message> queue;
        std::optional<double> last_sent;
    };

    void observe(double now);

    std::optional<delay_sampler> sampler_;
    std::deque<message> queue_;
    std::optional<double> last_sent_;
};

/// fault_on = t_on <= t < t_off.
class fault_schedule final : public basic_cs {
public:
    fault_schedule();

    void initialize(double start_time, const parameter_set& params) override;
    step_status update_outputs(double t) override;
    step_status do_step(double t, double dt) override;

    bool supports_rollback() const override { return true; }
    std::any save_state() const override { return store_.snapshot(); }
    void restore_state(const std::any& s) override;
};

/// Stand-in for components outside the system under test: outputs hold their
/// start values, inputs are discarded.
class equivalent final : public basic_cs {
public:
    explicit equivalent(model_description md);

    void initialize(double, const parameter_set& params) override { store_.reset(params); }
    step_status update_outputs(double) override { return step_status::ok; }
    step_status do_step(double, double) override { return step_status::ok; }

    bool supports_rollback() const override { return true; }
};

} // namespace cosim::models
