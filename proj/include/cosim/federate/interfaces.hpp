#pragma once

#include "cosim/common/error.hpp"
#include "cosim/federate/model_description.hpp"

#include <any>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cosim::federate {

enum class step_status { ok, error };

using parameter_set = std::map<std::string, value>;

class federate_failure : public error {
public:
    using error::error;
};

/// Stepping interface: the federate advances itself.
///
/// A federate instance is used from one thread at a time. After initialize()
/// every output is readable. do_step() calls are non-decreasing in time.
class cs_federate {
public:
    virtual ~cs_federate() = default;

    virtual const model_description& description() const = 0;

    virtual void initialize(double start_time, const parameter_set& params) = 0;
    virtual void set_input(value_ref ref, const value& v) = 0;
    virtual value get_output(value_ref ref) const = 0;

    /// Recompute outputs at the current time from the current inputs without
    /// advancing internal state. Used at the start time.
    virtual step_status update_outputs(double t) = 0;
    virtual step_status do_step(double t, double dt) = 0;

    /// Human readable reason for the last error status.
    virtual std::string last_error() const { return {}; }

    /// Federates that can snapshot and restore their state may join iterative loops.
    virtual bool supports_rollback() const { return false; }
    virtual std::any save_state() const { return {}; }
    virtual void restore_state(const std::any&) {}
};

/// Derivative interface: the master (or a capsule) integrates the states.
class me_federate {
public:
    virtual ~me_federate() = default;

    virtual const model_description& description() const = 0;

    virtual void initialize(double start_time, const parameter_set& params) = 0;
    virtual void set_time(double t) = 0;
    virtual void set_continuous_states(std::span<const double> x) = 0;
    virtual std::vector<double> get_continuous_states() const = 0;
    /// Pure function of (t, x, inputs).
    virtual std::vector<double> get_derivatives() const = 0;

    virtual void set_input(value_ref ref, const value& v) = 0;
    virtual value get_output(value_ref ref) const = 0;
};

/// Typed value storage backing a federate implementation.
class variable_store {
public:
    explicit variable_store(model_description md);

    const model_description& description() const noexcept { return md_; }

    /// Resets every variable to its start value, then applies `params`.
    void reset(const parameter_set& params);

    void set(value_ref ref, const value& v);
    const value& get(value_ref ref) const;

    double real(value_ref ref) const { return std::get<double>(get(ref)); }
    std::int64_t integer(value_ref ref) const { return std::get<std::int64_t>(get(ref)); }
    bool boolean(value_ref ref) const { return std::get<bool>(get(ref)); }
    const std::string& string(value_ref ref) const { return std::get<std::string>(get(ref)); }

    /// Checked set for inputs (throws direction_error for non-inputs).
    void set_input(value_ref ref, const value& v);

    std::map<value_ref, value> snapshot() const { return values_; }
    void restore(std::map<value_ref, value> values) { values_ = std::move(values); }

private:
    model_description md_;
    std::map<value_ref, value> values_;
};

} // namespace cosim::federate
