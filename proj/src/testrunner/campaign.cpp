#include "cosim/testrunner/campaign.hpp"

#include "cosim/common/json_io.hpp"
#include "cosim/master/run.hpp"
#include "cosim/models/library.hpp"
#include "cosim/sysconfig/expression.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace cosim::testrunner {

using nlohmann::json;
namespace jio = cosim::json_io;
namespace fs = std::filesystem;

namespace {

constexpr double time_tol = 1e-9;
constexpr std::array<std::string_view, 3> outcome_names{"pass", "fail", "not_applicable"};

double number(const std::map<std::string, scalar>& m, const std::string& key)
{
    auto it = m.find(key);
    if (it == m.end()) it = testspec::assessment_defaults().find(key);
    auto v = as_number(it->second);
    if (!v) throw error("assessment parameter '" + key + "' must be a number");
    return *v;
}

const time_series& trace(const std::map<std::string, time_series>& traces, const std::string& name)
{
    auto it = traces.find(name);
    if (it == traces.end()) throw insufficient_trace("no trace of output '" + name + "'");
    return it->second;
}

const time_series* optional_trace(const std::map<std::string, time_series>& traces, const std::string& name)
{
    auto it = traces.find(name);
    return it == traces.end() ? nullptr : &it->second;
}

verdict assess_metric(const std::map<std::string, time_series>& traces, const criterion_spec& c)
{
    const auto e = sysconfig::parse_expression(c.metric, true);
    auto lookup = [&](sysconfig::aggregate agg, const std::string& name) -> std::optional<scalar> {
        const auto& s = trace(traces, name);
        if (s.size() == 0) throw insufficient_trace("empty trace of output '" + name + "'");
        switch (agg) {
        case sysconfig::aggregate::min: return *std::min_element(s.v.begin(), s.v.end());
        case sysconfig::aggregate::max: return *std::max_element(s.v.begin(), s.v.end());
        default: return s.v.back();
        }
    };
    verdict v{c.id, outcome::pass, {}};
    if (sysconfig::evaluate(e, lookup)) return v;
    v.result = outcome::fail;
    // every comparison of the failed expression, at the end of the trace
    for (const auto& clause : e.clauses)
        for (const auto& cmp : clause) {
            const auto& s = trace(traces, cmp.name);
            const auto observed = as_number(*lookup(cmp.agg, cmp.name));
            const auto limit = as_number(cmp.literal);
            v.samples.push_back({s.t.back(), observed.value_or(std::nan("")), limit.value_or(std::nan(""))});
        }
    return v;
}

std::string csv_time(double t) { return master::format_time(t); }

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path.string(), "cannot open file for writing");
    out << text;
    if (!out) throw io_error(path.string(), "write failed");
}

std::map<std::string, time_series> read_trace(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw io_error(path.string(), "cannot open file");
    std::string line;
    if (!std::getline(in, line)) throw io_error(path.string(), "empty trace file");
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    if (names.empty() || names.front() != "t") throw io_error(path.string(), "first column must be t");
    std::map<std::string, time_series> out;
    for (std::size_t i = 1; i < names.size(); ++i) out[names[i]];
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            cells.push_back(std::strtod(cell.c_str(), &end));
            if (end == cell.c_str()) throw io_error(path.string(), "row " + std::to_string(row) + ": not a number");
        }
        if (cells.size() != names.size())
            throw io_error(path.string(), "row " + std::to_string(row) + ": wrong column count");
        for (std::size_t i = 1; i < names.size(); ++i) out[names[i]].push(cells[0], cells[i]);
    }
    return out;
}

} // namespace

campaign_error::campaign_error(std::size_t index, const std::string& x, double y, const std::string& what)
    : error("sweep point " + std::to_string(index) + " (x=" + x + ", y=" + csv_time(y) + "): " + what), index_(index)
{
}

// ---------------------------------------------------------------- plan

campaign_plan campaign_plan_from_json(const json& j)
{
    jio::check_keys(j, {"t0", "sweep"}, "");
    campaign_plan p;
    p.t0 = jio::opt_number(j, "t0", "", 0.1);
    const auto& sweep = jio::require(j, "sweep", "");
    jio::require_array(sweep, "/sweep");
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const auto path = "/sweep/" + std::to_string(i);
        jio::check_keys(sweep[i], {"x", "y"}, path);
        p.sweep.push_back({jio::get_string(sweep[i], "x", path), jio::get_number(sweep[i], "y", path)});
    }
    return p;
}

json to_json(const campaign_plan& p)
{
    json sweep = json::array();
    for (const auto& s : p.sweep) sweep.push_back({{"x", s.x}, {"y", s.y}});
    return {{"t0", p.t0}, {"sweep", sweep}};
}

campaign_plan load_campaign_plan(const fs::path& file) { return campaign_plan_from_json(jio::load_file(file)); }

validation_report validate_plan(const campaign_plan& p)
{
    validation_report r;
    if (p.sweep.empty()) r.push_back({severity::error, "sweep", "empty_sweep", "the sweep has no points"});
    if (!(p.t0 >= 0.0)) r.push_back({severity::error, "t0", "negative_t0", "fault inception before t = 0"});
    for (std::size_t i = 0; i < p.sweep.size(); ++i)
        if (!(p.sweep[i].y > p.t0))
            r.push_back({severity::error, "sweep/" + std::to_string(i), "clearing_before_inception",
                         "clearing time y = " + csv_time(p.sweep[i].y) + " is not after t0 = " + csv_time(p.t0)});
    sort_report(r);
    return r;
}

// ---------------------------------------------------------------- verdicts

std::string_view to_string(outcome o) { return outcome_names[static_cast<std::size_t>(o)]; }

std::optional<outcome> parse_outcome(std::string_view s)
{
    for (std::size_t i = 0; i < outcome_names.size(); ++i)
        if (outcome_names[i] == s) return static_cast<outcome>(i);
    return std::nullopt;
}

verdict assess_frt(const time_series& u, const models::frt_envelope& env, double t_fault,
                   const std::vector<double>& trips, const std::string& criterion)
{
    const double end = t_fault + env.horizon();
    if (u.size() == 0 || u.t.front() > t_fault + time_tol || u.t.back() < end - time_tol)
        throw insufficient_trace("U_PCC trace does not cover [" + csv_time(t_fault) + ", " + csv_time(end) + "]");

    verdict v{criterion, outcome::pass, {}};
    if (!trips.empty()) {
        // disconnecting is allowed only inside the zone below U_ret
        const double t_trip = *std::min_element(trips.begin(), trips.end());
        auto it = std::lower_bound(u.t.begin(), u.t.end(), t_trip - time_tol);
        if (it == u.t.end()) throw insufficient_trace("trip at " + csv_time(t_trip) + " after the end of the trace");
        const auto i = static_cast<std::size_t>(it - u.t.begin());
        v.samples.push_back({u.t[i], u.v[i], env.u_ret()});
        if (!(u.v[i] < env.u_ret())) v.result = outcome::fail;
        return v;
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u.t[i] < t_fault - time_tol || u.t[i] > end + time_tol) continue;
        const double lim = env.limit(u.t[i] - t_fault);
        if (!(u.v[i] >= lim)) v.samples.push_back({u.t[i], u.v[i], lim});
    }
    if (!v.samples.empty()) v.result = outcome::fail;
    return v;
}

verdict assess_qv(const time_series& u, const time_series& q, const time_series* state, const models::qv_curve& curve,
                  double tol, double settle, double u_clear, const std::string& criterion)
{
    if (u.size() == 0 || q.size() != u.size() || (state && state->size() != u.size()))
        throw insufficient_trace("U_PCC, Q_PCC and state traces must be non-empty and aligned");

    auto normal = [&](std::size_t i) {
        return u.v[i] >= u_clear && (!state || state->v[i] == static_cast<double>(models::frt_state::normal));
    };
    verdict v{criterion, outcome::not_applicable, {}};
    std::size_t last = u.size();
    while (last > 0 && !normal(last - 1)) --last;
    if (last == 0) return v;
    std::size_t first = last - 1;
    while (first > 0 && normal(first - 1)) --first;

    const double from = u.t[first] + settle;
    bool any = false;
    for (std::size_t i = first; i < last; ++i) {
        if (u.t[i] < from - time_tol) continue;
        any = true;
        const double target = curve(u.v[i]);
        if (!(std::abs(q.v[i] - target) <= tol)) v.samples.push_back({u.t[i], q.v[i], target});
    }
    if (!any) return v;
    v.result = v.samples.empty() ? outcome::pass : outcome::fail;
    return v;
}

std::vector<double> trip_times(const time_series& trip)
{
    std::vector<double> out;
    for (std::size_t i = 0; i < trip.size(); ++i)
        if (trip.v[i] > 0.5 && (i == 0 || trip.v[i - 1] <= 0.5)) out.push_back(trip.t[i]);
    return out;
}

std::vector<criterion_spec> criteria_of(const testspec::test_specification& spec)
{
    std::vector<criterion_spec> out;
    for (const auto& c : spec.tc->criteria) {
        criterion_spec cs{c.id, "metric", c.metric};
        for (const auto& st : spec.test_design) {
            if (st.action != testspec::step_action::assess) continue;
            auto id = st.args.find("criterion");
            auto method = st.args.find("method");
            if (id == st.args.end() || method == st.args.end() || cosim::to_string(id->second) != c.id) continue;
            cs.method = cosim::to_string(method->second);
        }
        out.push_back(std::move(cs));
    }
    return out;
}

assessment_params assessment_from(const std::map<std::string, scalar>& values)
{
    assessment_params p;
    p.envelope = models::frt_envelope::standard(number(values, "U_ret"), number(values, "t_clear"),
                                                number(values, "U_clear"), number(values, "t_rec3"),
                                                number(values, "U_final"));
    auto it = values.find("qv_curve");
    p.curve = models::qv_curve::parse(it == values.end() ? models::default_qv_curve : cosim::to_string(it->second));
    p.tol = number(values, "tol");
    p.settle = number(values, "settle");
    p.u_clear = number(values, "U_clear");
    return p;
}

std::vector<verdict> evaluate(const std::map<std::string, time_series>& traces,
                              const std::vector<criterion_spec>& criteria, const assessment_params& params,
                              double t_fault)
{
    std::vector<verdict> out;
    for (const auto& c : criteria) {
        if (c.method == "frt_envelope") {
            const auto* trip = optional_trace(traces, "trip");
            out.push_back(assess_frt(trace(traces, "U_PCC"), params.envelope, t_fault,
                                     trip ? trip_times(*trip) : std::vector<double>{}, c.id));
        } else if (c.method == "qv_curve") {
            out.push_back(assess_qv(trace(traces, "U_PCC"), trace(traces, "Q_PCC"), optional_trace(traces, "frt_state"),
                                    params.curve, params.tol, params.settle, params.u_clear, c.id));
        } else if (c.method == "metric") {
            out.push_back(assess_metric(traces, c));
        } else {
            throw error("criterion '" + c.id + "': unknown assessment method '" + c.method + "'");
        }
    }
    return out;
}

// ---------------------------------------------------------------- runs

std::map<std::string, time_series> run_point(const testspec::experiment& exp, const sweep_point& p, double t0)
{
    auto plan = exp.plan;
    auto bind = [&](const char* input, federate::value v) {
        auto it = exp.bindings.find(input);
        if (it == exp.bindings.end()) throw error(std::string("experiment has no binding for input '") + input + "'");
        auto* f = plan.find(it->second.instance);
        if (!f) throw error("binding " + it->second.str() + " names an unknown federate");
        f->params[it->second.variable] = std::move(v);
    };
    bind("x", p.x);
    bind("y", p.y);
    bind("t0", t0);

    auto s = models::build_scenario(plan);
    const auto store = master::run(s);
    std::map<std::string, time_series> traces;
    for (const auto& [name, ep] : exp.observe) traces[name] = store.at(ep.instance, ep.variable);
    return traces;
}

campaign_result run_frt_campaign(const testspec::experiment& exp, const campaign_plan& plan)
{
    for (const auto& d : validate_plan(plan))
        if (d.level == severity::error) throw invalid_plan(d.object_id + ": " + d.message);

    campaign_result r;
    r.experiment = exp.id;
    r.t0 = plan.t0;
    for (const auto& o : exp.spec->outputs) r.outputs.push_back(o.name);
    r.criteria = criteria_of(*exp.spec);
    r.assessment = exp.assessment;
    const auto params = assessment_from(exp.assessment);
    for (std::size_t i = 0; i < plan.sweep.size(); ++i) {
        const auto& p = plan.sweep[i];
        point_result pr{p, {}, {}};
        try {
            pr.traces = run_point(exp, p, plan.t0);
            pr.verdicts = evaluate(pr.traces, r.criteria, params, plan.t0);
        } catch (const error& e) {
            throw campaign_error(i, p.x, p.y, e.what());
        }
        r.points.push_back(std::move(pr));
    }
    return r;
}

void apply_override(testspec::experiment& exp, const std::string& key, const std::string& value)
{
    const auto& defaults = testspec::assessment_defaults();
    if (auto it = defaults.find(key); it != defaults.end()) {
        if (std::holds_alternative<std::string>(it->second)) {
            if (key == "qv_curve") models::qv_curve::parse(value);
            exp.assessment[key] = value;
            return;
        }
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (value.empty() || *end != '\0') throw error("override " + key + ": '" + value + "' is not a number");
        exp.assessment[key] = v;
        return;
    }
    const auto dot = key.find('.');
    auto* f = dot == std::string::npos ? nullptr : exp.plan.find(key.substr(0, dot));
    if (!f) throw error("unknown override '" + key + "'");
    const auto md = models::describe(*f);
    const auto* var = md.find(key.substr(dot + 1));
    if (!var || var->causality != federate::causality::parameter) throw error("unknown override '" + key + "'");
    federate::value v;
    try {
        switch (var->type) {
        case federate::data_type::real: {
            std::size_t used = 0;
            v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            break;
        }
        case federate::data_type::integer: {
            std::size_t used = 0;
            v = static_cast<std::int64_t>(std::stoll(value, &used));
            if (used != value.size()) throw std::invalid_argument(value);
            break;
        }
        case federate::data_type::boolean:
            if (value == "true" || value == "1") v = true;
            else if (value == "false" || value == "0") v = false;
            else throw std::invalid_argument(value);
            break;
        case federate::data_type::string: v = value; break;
        }
    } catch (const std::logic_error&) {
        throw error("override " + key + ": cannot convert '" + value + "'");
    }
    f->params[var->name] = std::move(v);
}

boost_comparison compare_boost(const testspec::experiment& exp, const sweep_point& p, double t0)
{
    auto it = std::find_if(exp.plan.federates.begin(), exp.plan.federates.end(),
                           [](const auto& f) { return f.model == "frt_fsm"; });
    if (it == exp.plan.federates.end()) throw error("experiment has no FRT controller");
    const auto md = models::describe(*it);
    auto k = it->params.count("k_q") ? it->params.at("k_q") : *md.find("k_q")->start;

    auto min_u = [&](const federate::value& gain) {
        auto e = exp;
        e.plan.find(it->id)->params["k_q"] = gain;
        const auto traces = run_point(e, p, t0);
        const auto& u = trace(traces, "U_PCC");
        return *std::min_element(u.v.begin(), u.v.end());
    };
    return {min_u(0.0), min_u(k), federate::to_double(k)};
}

// ---------------------------------------------------------------- reports

std::vector<fs::path> emit_report(const campaign_result& r, const fs::path& dir)
{
    if (r.points.empty()) throw error("no campaign results to report");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error(dir.string(), ec.message());

    std::vector<fs::path> written;
    const auto params = assessment_from(r.assessment);
    json points = json::array();
    std::string summary = "point,x,y,min_U_PCC,tripped";
    for (const auto& c : r.criteria) summary += "," + c.id;
    summary += "\n";

    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto& p = r.points[i];
        const auto trace_name = "trace_" + std::to_string(i) + ".csv";
        const auto plot_name = "plot_" + std::to_string(i) + ".csv";

        std::vector<const time_series*> cols;
        for (const auto& name : r.outputs) cols.push_back(&trace(p.traces, name));
        std::string text = "t";
        for (const auto& name : r.outputs) text += "," + name;
        text += "\n";
        for (std::size_t k = 0; k < cols.front()->size(); ++k) {
            text += csv_time(cols.front()->t[k]);
            for (const auto* c : cols) text += "," + master::format_value(c->v[k]);
            text += "\n";
        }
        write_file(dir / trace_name, text);
        written.push_back(dir / trace_name);

        const auto& u = trace(p.traces, "U_PCC");
        text = "t,U_PCC,t_rel,U_lim\n";
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double rel = u.t[k] - r.t0;
            text += csv_time(u.t[k]) + "," + master::format_value(u.v[k]) + "," + csv_time(rel) + "," +
                    master::format_value(params.envelope.limit(rel)) + "\n";
        }
        write_file(dir / plot_name, text);
        written.push_back(dir / plot_name);

        const auto* trip = optional_trace(p.traces, "trip");
        summary += std::to_string(i) + "," + p.point.x + "," + csv_time(p.point.y) + "," +
                   master::format_value(*std::min_element(u.v.begin(), u.v.end())) + "," +
                   (trip ? (trip_times(*trip).empty() ? "0" : "1") : "") ;
        json verdicts = json::array();
        for (const auto& v : p.verdicts) {
            summary += "," + std::string(to_string(v.result));
            json ev = json::array();
            for (const auto& s : v.samples) ev.push_back({s.t, s.observed, s.limit});
            verdicts.push_back({{"criterion", v.criterion}, {"outcome", to_string(v.result)}, {"evidence", ev}});
        }
        summary += "\n";
        points.push_back({{"index", i},
                          {"x", p.point.x},
                          {"y", p.point.y},
                          {"trace", trace_name},
                          {"plot", plot_name},
                          {"verdicts", verdicts}});
    }
    write_file(dir / "summary.csv", summary);
    written.push_back(dir / "summary.csv");

    json criteria = json::array();
    for (const auto& c : r.criteria) criteria.push_back({{"id", c.id}, {"method", c.method}, {"metric", c.metric}});
    json assessment = json::object();
    for (const auto& [k, v] : r.assessment) assessment[k] = cosim::to_json(v);
    const json doc{{"experiment", r.experiment}, {"t0", r.t0},           {"outputs", r.outputs},
                   {"criteria", criteria},       {"assessment", assessment}, {"points", points}};
    write_file(dir / "campaign.json", doc.dump(2) + "\n");
    written.push_back(dir / "campaign.json");
    return written;
}

campaign_result load_report(const fs::path& dir)
{
    const auto doc = jio::load_file(dir / "campaign.json");
    jio::check_keys(doc, {"experiment", "t0", "outputs", "criteria", "assessment", "points"}, "");
    campaign_result r;
    r.experiment = jio::get_string(doc, "experiment", "");
    r.t0 = jio::get_number(doc, "t0", "");
    r.outputs = jio::get_string_list(doc, "outputs", "");
    const auto& crit = jio::require(doc, "criteria", "");
    jio::require_array(crit, "/criteria");
    for (std::size_t i = 0; i < crit.size(); ++i) {
        const auto p = "/criteria/" + std::to_string(i);
        r.criteria.push_back({jio::get_string(crit[i], "id", p), jio::get_string(crit[i], "method", p),
                              jio::opt_string(crit[i], "metric", p)});
    }
    const auto& a = jio::require(doc, "assessment", "");
    jio::require_object(a, "/assessment");
    for (const auto& [k, v] : a.items()) r.assessment.emplace(k, scalar_from_json(v, "/assessment/" + k));

    const auto& pts = jio::require(doc, "points", "");
    jio::require_array(pts, "/points");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto p = "/points/" + std::to_string(i);
        point_result pr;
        pr.point = {jio::get_string(pts[i], "x", p), jio::get_number(pts[i], "y", p)};
        pr.traces = read_trace(dir / jio::get_string(pts[i], "trace", p));
        const auto& vs = jio::require(pts[i], "verdicts", p);
        jio::require_array(vs, p + "/verdicts");
        for (std::size_t k = 0; k < vs.size(); ++k) {
            const auto q = p + "/verdicts/" + std::to_string(k);
            const auto o = jio::get_string(vs[k], "outcome", q);
            auto parsed = parse_outcome(o);
            if (!parsed) throw schema_error(q + "/outcome", "unknown outcome '" + o + "'");
            verdict v{jio::get_string(vs[k], "criterion", q), *parsed, {}};
            for (const auto& e : jio::require(vs[k], "evidence", q)) {
                if (!e.is_array() || e.size() != 3) throw schema_error(q + "/evidence", "expected [t, observed, limit]");
                auto num = [](const json& x) { return x.is_null() ? std::nan("") : x.get<double>(); };
                v.samples.push_back({num(e[0]), num(e[1]), num(e[2])});
            }
            pr.verdicts.push_back(std::move(v));
        }
        r.points.push_back(std::move(pr));
    }
    return r;
}

void reassess(campaign_result& r)
{
    const auto params = assessment_from(r.assessment);
    for (auto& p : r.points) p.verdicts = evaluate(p.traces, r.criteria, params, r.t0);
}

bool all_pass(const campaign_result& r)
{
    for (const auto& p : r.points)
        for (const auto& v : p.verdicts)
            if (v.result == outcome::fail) return false;
    return true;
}

} // namespace cosim::testrunner
