#pragma once

#include "cosim/common/diagnostics.hpp"
#include "cosim/common/error.hpp"
#include "cosim/master/results.hpp"
#include "cosim/models/frt.hpp"
#include "cosim/testspec/experiment.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cosim::testrunner {

using master::time_series;

class insufficient_trace : public error {
public:
    using error::error;
};

class invalid_plan : public error {
public:
    using error::error;
};

/// A campaign run failed; the message names the sweep point.
class campaign_error : public error {
public:
    campaign_error(std::size_t index, const std::string& x, double y, const std::string& what);
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Fault location x (bus or branch location) cleared at time y.
struct sweep_point {
    std::string x;
    double y = 0.0;

    friend bool operator==(const sweep_point&, const sweep_point&) = default;
};

struct campaign_plan {
    double t0 = 0.1;
    std::vector<sweep_point> sweep;
};

campaign_plan campaign_plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const campaign_plan& p);
campaign_plan load_campaign_plan(const std::filesystem::path& file);

/// Empty when the plan is runnable: sweep non-empty, y > t0 everywhere.
validation_report validate_plan(const campaign_plan& p);

enum class outcome { pass, fail, not_applicable };

std::string_view to_string(outcome o);
std::optional<outcome> parse_outcome(std::string_view s);

/// A sample that decided the verdict.
struct evidence {
    double t;
    double observed;
    double limit;

    friend bool operator==(const evidence&, const evidence&) = default;
};

struct verdict {
    std::string criterion;
    outcome result = outcome::not_applicable;
    std::vector<evidence> samples;

    friend bool operator==(const verdict&, const verdict&) = default;
};

/// Envelope check from fault inception t_fault over the envelope horizon.
/// Without a trip every sample must satisfy U >= limit(t - t_fault); with a
/// trip, the first trip sample must lie below U_ret. Throws
/// insufficient_trace when the trace does not cover the horizon.
verdict assess_frt(const time_series& u_pcc, const models::frt_envelope& envelope, double t_fault,
                   const std::vector<double>& trip_times, const std::string& criterion = "frt_envelope");

/// Q(V) tracking over the settled part of the last NORMAL window (U >= U_clear
/// and, if a state trace is given, state NORMAL): samples at least `settle`
/// after the window start must satisfy |Q - curve(U)| <= tol.
/// not_applicable when no such sample exists.
verdict assess_qv(const time_series& u_pcc, const time_series& q_pcc, const time_series* state,
                  const models::qv_curve& curve, double tol, double settle, double u_clear,
                  const std::string& criterion = "qv_tracking");

/// Rising edges of a boolean trace.
std::vector<double> trip_times(const time_series& trip);

/// How a criterion is evaluated: a dedicated assessment ("frt_envelope",
/// "qv_curve") or its metric expression over the output traces.
struct criterion_spec {
    std::string id;
    std::string method;
    std::string metric;

    friend bool operator==(const criterion_spec&, const criterion_spec&) = default;
};

std::vector<criterion_spec> criteria_of(const testspec::test_specification& spec);

/// Assessment parameters of an experiment (see testspec::assessment_defaults).
struct assessment_params {
    models::frt_envelope envelope;
    models::qv_curve curve;
    double tol = 0.02;
    double settle = 0.5;
    double u_clear = 0.9;
};

assessment_params assessment_from(const std::map<std::string, scalar>& values);

/// One verdict per criterion. `traces` is keyed by output name.
std::vector<verdict> evaluate(const std::map<std::string, time_series>& traces,
                              const std::vector<criterion_spec>& criteria, const assessment_params& params,
                              double t_fault);

struct point_result {
    sweep_point point;
    /// Observed outputs keyed by output name.
    std::map<std::string, time_series> traces;
    std::vector<verdict> verdicts;
};

struct campaign_result {
    std::string experiment;
    double t0 = 0.1;
    std::vector<std::string> outputs;
    std::vector<criterion_spec> criteria;
    std::map<std::string, scalar> assessment;
    std::vector<point_result> points;
};

/// Runs the scenario once per sweep point with the fault at x from t0 to y.
/// All points use the experiment seed. Throws invalid_plan, campaign_error.
campaign_result run_frt_campaign(const testspec::experiment& exp, const campaign_plan& plan);

/// Observed traces of a single run with the fault at `p`.
std::map<std::string, time_series> run_point(const testspec::experiment& exp, const sweep_point& p, double t0);

/// Applies `key=value`: an assessment parameter or `instance.parameter` of
/// the scenario plan. Throws cosim::error for unknown names.
void apply_override(testspec::experiment& exp, const std::string& key, const std::string& value);

/// Reactive boost comparison on one sweep point: minimum U_PCC with the FRT
/// controller gain set to 0 and with the experiment's gain.
struct boost_comparison {
    double min_u_without = 0.0;
    double min_u_with = 0.0;
    double k_q = 0.0;
};

boost_comparison compare_boost(const testspec::experiment& exp, const sweep_point& p, double t0);

/// Writes trace_<i>.csv, plot_<i>.csv, summary.csv and campaign.json.
std::vector<std::filesystem::path> emit_report(const campaign_result& r, const std::filesystem::path& dir);

/// Reads campaign.json and the traces written by emit_report.
campaign_result load_report(const std::filesystem::path& dir);

/// Recomputes all verdicts from the traces with the given assessment values.
void reassess(campaign_result& r);

bool all_pass(const campaign_result& r);

} // namespace cosim::testrunner
