#include "cosim/models/federates.hpp"

#include <algorithm>
#include <cmath>

namespace cosim::models {

using namespace cosim::federate;

namespace {

constexpr double time_tol = 1e-9;

// Builds a description with consecutive value references.
class md_builder {
public:
    md_builder(std::string name, model_kind kind, int states = 0) : md_{std::move(name), kind, {}, states} {}

    md_builder& param(std::string name, value start)
    {
        return add(std::move(name), causality::parameter, variability::constant, std::move(start));
    }
    md_builder& input(std::string name, value start, variability var = variability::continuous)
    {
        return add(std::move(name), causality::input, var, std::move(start));
    }
    md_builder& output(std::string name, value start, variability var = variability::continuous)
    {
        return add(std::move(name), causality::output, var, std::move(start));
    }
    model_description build() const { return md_; }

private:
    md_builder& add(std::string name, causality c, variability var, value start)
    {
        const auto t = type_of(start);
        md_.variables.push_back({std::move(name), static_cast<value_ref>(md_.variables.size()), t, c, var, std::move(start)});
        return *this;
    }
    model_description md_;
};

value_ref lookup(const model_description& md, std::string_view name)
{
    const auto* v = md.find(name);
    if (!v) throw error(md.model_name + ": no variable '" + std::string(name) + "'");
    return v->ref;
}

} // namespace

value_ref basic_cs::ref(std::string_view name) const
{
    return lookup(store_.description(), name);
}

// ---------------------------------------------------------------- grid

grid_federate::grid_federate()
    : basic_cs(md_builder("grid", model_kind::cs)
                   .param("network", std::string("builtin:ieee9_pcc"))
                   .param("pcc_bus", std::int64_t{10})
                   .param("fault_location", std::string("bus:8"))
                   .param("fault_g", 1e4)
                   .param("fault_b", 0.0)
                   .param("load_exponent_p", 2.0)
                   .param("load_exponent_q", 2.0)
                   .param("pcc_r", -1.0)
                   .param("pcc_x", -1.0)
                   .param("fault_t_on", -1.0)
                   .param("fault_t_off", -1.0)
                   .input("i_d", 0.0)
                   .input("i_q", 0.0)
                   .input("fault_on", false, variability::discrete)
                   .output("U_pcc", 1.0)
                   .output("theta_pcc", 0.0)
                   .output("P_pcc", 0.0)
                   .output("Q_pcc", 0.0)
                   .build())
{
}

void grid_federate::initialize(double, const parameter_set& params)
{
    store_.reset(params);
    last_error_.clear();
    auto n = load_network(string("network"));
    const int pcc_id = static_cast<int>(integer("pcc_bus"));
    n.index_of(pcc_id);

    // collection grid equivalent: the single branch feeding the PCC
    const double r = real("pcc_r"), x = real("pcc_x");
    if (r >= 0.0 || x >= 0.0) {
        std::vector<branch*> feeders;
        for (auto& br : n.branches)
            if (br.from == pcc_id || br.to == pcc_id) feeders.push_back(&br);
        if (feeders.size() != 1) throw error("pcc_r/pcc_x need exactly one branch at the PCC bus");
        if (r >= 0.0) feeders.front()->r = r;
        if (x >= 0.0) feeders.front()->x = x;
        check_network(n);
    }

    auto [faulted, bus] = prepare_fault(std::move(n), fault_location::parse(string("fault_location")));
    net_ = std::move(faulted);
    fault_bus_ = bus;
    pcc_ = net_.index_of(pcc_id);
    ybus_ = admittance_matrix(net_);

    // operating point: constant power loads, no converter injection
    base_ = solve_power_flow(net_, ybus_, {}, nullptr);
    last_ = base_;
    frame_ = base_.va(static_cast<Eigen::Index>(pcc_));
    put("U_pcc", base_.vm(static_cast<Eigen::Index>(pcc_)));
    put("theta_pcc", frame_);
    put("P_pcc", 0.0);
    put("Q_pcc", 0.0);
}

bool grid_federate::faulted(double t) const
{
    if (boolean("fault_on")) return true;
    const double on = real("fault_t_on");
    return on >= 0.0 && t >= on - 1e-9 && t < real("fault_t_off") - 1e-9;
}

step_status grid_federate::solve(double t)
{
    pf_conditions c;
    c.alpha_p = real("load_exponent_p");
    c.alpha_q = real("load_exponent_q");
    c.v0.assign(base_.vm.data(), base_.vm.data() + base_.vm.size());
    c.current_bus = pcc_;
    c.i_d = real("i_d");
    c.i_q = real("i_q");
    c.frame_angle = frame_;
    if (faulted(t)) {
        c.shunt_bus = net_.index_of(fault_bus_);
        c.shunt = {real("fault_g"), real("fault_b")};
    }
    pf_result r;
    try {
        // Without the fault the operating point stays near the base case; the
        // faulted solution would lead Newton to a low-voltage root.
        r = solve_power_flow(net_, ybus_, c, c.shunt_bus ? &last_ : &base_);
    } catch (const error& e) {
        last_error_ = std::string("grid: ") + e.what();
        return step_status::error;
    }
    last_ = std::move(r);
    const auto k = static_cast<Eigen::Index>(pcc_);
    const auto s = last_.voltage(pcc_) * std::conj(converter_current(c));
    frame_ = last_.va(k);
    put("U_pcc", last_.vm(k));
    put("theta_pcc", last_.va(k));
    put("P_pcc", s.real());
    put("Q_pcc", s.imag());
    return step_status::ok;
}

step_status grid_federate::update_outputs(double t)
{
    // operating point: the converter frame settles on its own voltage angle
    for (int k = 0; k < 50; ++k) {
        const double before = frame_;
        if (solve(t) != step_status::ok) return step_status::error;
        if (std::abs(frame_ - before) < 1e-12) break;
    }
    return step_status::ok;
}

step_status grid_federate::do_step(double t, double dt)
{
    return solve(t + dt);
}

namespace {

struct grid_state {
    std::map<value_ref, value> values;
    pf_result last;
    double frame;
};

} // namespace

std::any grid_federate::save_state() const
{
    return grid_state{store_.snapshot(), last_, frame_};
}

void grid_federate::restore_state(const std::any& s)
{
    const auto& st = std::any_cast<const grid_state&>(s);
    store_.restore(st.values);
    last_ = st.last;
    frame_ = st.frame;
}

// ---------------------------------------------------------------- wtg

wtg_model::wtg_model()
    : store_(md_builder("wtg", model_kind::me, 2)
                 .param("T_c", 0.02)
                 .param("i_max", 0.5)
                 .param("P_ref", 0.4)
                 .param("i_d0", 0.4)
                 .param("i_q0", 0.0)
                 .param("v_floor", 0.1)
                 .param("chopper_margin", 0.05)
                 .input("V_pcc", 1.0)
                 .input("Q_ref", 0.0)
                 .input("frt_state", std::int64_t{0}, variability::discrete)
                 .input("i_q_boost", 0.0)
                 .output("I_d", 0.0)
                 .output("I_q", 0.0)
                 .output("chopper_on", false, variability::discrete)
                 .build())
{
}

void wtg_model::initialize(double start_time, const parameter_set& params)
{
    store_.reset(params);
    const auto& md = store_.description();
    if (!(store_.real(lookup(md, "T_c")) > 0.0)) throw error("wtg: T_c must be positive");
    const double i_max = store_.real(lookup(md, "i_max"));
    if (!(i_max > 0.0)) throw error("wtg: i_max must be positive");
    const auto [d, q] =
        limit_current(store_.real(lookup(md, "i_d0")), store_.real(lookup(md, "i_q0")), i_max, false);
    x_[0] = d;
    x_[1] = q;
    t_ = start_time;
}

void wtg_model::set_continuous_states(std::span<const double> x)
{
    if (x.size() != 2) throw error("wtg: expected 2 states");
    x_[0] = x[0];
    x_[1] = x[1];
}

std::pair<double, double> wtg_model::reference() const
{
    const auto& md = store_.description();
    auto r = [&](std::string_view n) { return store_.real(lookup(md, n)); };
    const double v = std::max(r("V_pcc"), r("v_floor"));
    const auto state = static_cast<frt_state>(store_.integer(lookup(md, "frt_state")));
    switch (state) {
    case frt_state::tripped: return {0.0, 0.0};
    case frt_state::frt_active: return limit_current(r("P_ref") / v, r("i_q_boost"), r("i_max"), true);
    default: return limit_current(r("P_ref") / v, r("Q_ref") / v, r("i_max"), false);
    }
}

std::vector<double> wtg_model::get_derivatives() const
{
    const auto [d, q] = reference();
    const double tc = store_.real(lookup(store_.description(), "T_c"));
    return {(d - x_[0]) / tc, (q - x_[1]) / tc};
}

value wtg_model::get_output(value_ref ref) const
{
    const auto& md = store_.description();
    const auto* v = md.find(ref);
    if (!v) throw error("wtg: unknown value reference " + std::to_string(ref));
    if (v->name == "I_d") return x_[0];
    if (v->name == "I_q") return x_[1];
    if (v->name == "chopper_on") {
        // active power the converter cannot export is burnt in the DC-link chopper
        const double exported = store_.real(lookup(md, "V_pcc")) * x_[0];
        return store_.real(lookup(md, "P_ref")) - exported > store_.real(lookup(md, "chopper_margin"));
    }
    return store_.get(ref);
}

// ---------------------------------------------------------------- FRT state machine

frt_fsm::frt_fsm()
    : basic_cs(md_builder("frt_fsm", model_kind::cs)
                   .param("U_ret", 0.15)
                   .param("U_clear", 0.9)
                   .param("h_v", 0.01)
                   .param("k_q", 2.0)
                   .input("U", 1.0)
                   .output("state", std::int64_t{0}, variability::discrete)
                   .output("i_q_boost", 0.0, variability::discrete)
                   .output("trip", false, variability::discrete)
                   .build())
{
}

void frt_fsm::initialize(double, const parameter_set& params)
{
    store_.reset(params);
    if (!(real("U_ret") >= 0.0 && real("U_ret") <= real("U_clear"))) throw error("frt_fsm: need 0 <= U_ret <= U_clear");
    if (!(real("h_v") >= 0.0)) throw error("frt_fsm: h_v must not be negative");
    state_ = frt_state::normal;
}

void frt_fsm::evaluate()
{
    const double u = real("U");
    state_ = frt_transition(state_, u, {real("U_ret"), real("U_clear"), real("h_v")});
    const bool tripped = state_ == frt_state::tripped;
    put("state", static_cast<std::int64_t>(state_));
    put("i_q_boost", tripped ? 0.0 : real("k_q") * std::max(0.0, real("U_clear") - u));
    put("trip", tripped);
}

step_status frt_fsm::update_outputs(double)
{
    evaluate();
    return step_status::ok;
}

step_status frt_fsm::do_step(double, double)
{
    evaluate();
    return step_status::ok;
}

void frt_fsm::restore_state(const std::any& s)
{
    const auto& [state, values] = std::any_cast<const std::pair<frt_state, std::map<value_ref, value>>&>(s);
    state_ = state;
    store_.restore(values);
}

// ---------------------------------------------------------------- Q(V) controller

qv_controller::qv_controller()
    : basic_cs(md_builder("qv_controller", model_kind::cs)
                   .param("curve", std::string(default_qv_curve))
                   .input("U", 1.0)
                   .input("frt_state", std::int64_t{0}, variability::discrete)
                   .output("Q_ref", 0.0, variability::discrete)
                   .build())
{
}

void qv_controller::initialize(double, const parameter_set& params)
{
    store_.reset(params);
    curve_ = qv_curve::parse(string("curve"));
}

void qv_controller::evaluate()
{
    if (static_cast<frt_state>(integer("frt_state")) == frt_state::normal) put("Q_ref", curve_(real("U")));
}

step_status qv_controller::update_outputs(double)
{
    evaluate();
    return step_status::ok;
}

step_status qv_controller::do_step(double, double)
{
    evaluate();
    return step_status::ok;
}

void qv_controller::restore_state(const std::any& s)
{
    store_.restore(std::any_cast<const std::map<value_ref, value>&>(s));
}

// ---------------------------------------------------------------- communication delay

delay_sampler::delay_sampler(double mu, double sigma, double d_min, std::uint64_t seed)
    : mu_(mu), sigma_(sigma), d_min_(d_min), rng_(seed)
{
    if (!(mu > 0.0)) throw error("delay: mu must be positive");
    if (!(sigma >= 0.0)) throw error("delay: sigma must not be negative");
    if (!(d_min >= 0.0)) throw error("delay: d_min must not be negative");
}

double delay_sampler::draw()
{
    if (sigma_ == 0.0) return std::max(d_min_, mu_);
    return std::max(d_min_, std::normal_distribution<double>(mu_, sigma_)(rng_));
}

comm_delay::comm_delay()
    : basic_cs(md_builder("comm_delay", model_kind::cs)
                   .param("mu", 0.01)
                   .param("sigma", 0.002)
                   .param("d_min", 0.0)
                   .param("initial", 0.0)
                   .param("seed", std::int64_t{0})
                   .input("in", 0.0, variability::discrete)
                   .output("out", 0.0, variability::discrete)
                   .build())
{
}

void comm_delay::initialize(double, const parameter_set& params)
{
    store_.reset(params);
    sampler_.emplace(real("mu"), real("sigma"), real("d_min"), static_cast<std::uint64_t>(integer("seed")));
    queue_.clear();
    last_sent_.reset();
    put("out", real("initial"));
}

void comm_delay::observe(double now)
{
    const double v = real("in");
    if (!last_sent_ || v != *last_sent_) {
        queue_.push_back({now, now + sampler_->draw(), v});
        last_sent_ = v;
    }
    // newest message that has arrived; older ones are superseded
    for (auto it = queue_.rbegin(); it != queue_.rend(); ++it) {
        if (it->arrival <= now + time_tol) {
            put("out", it->v);
            queue_.erase(queue_.begin(), it.base());
            break;
        }
    }
}

step_status comm_delay::update_outputs(double t)
{
    observe(t);
    return step_status::ok;
}

step_status comm_delay::do_step(double t, double dt)
{
    observe(t + dt);
    return step_status::ok;
}

std::any comm_delay::save_state() const
{
    return saved{store_.snapshot(), sampler_, queue_, last_sent_};
}

void comm_delay::restore_state(const std::any& s)
{
    const auto& st = std::any_cast<const saved&>(s);
    store_.restore(st.values);
    sampler_ = st.sampler;
    queue_ = st.queue;
    last_sent_ = st.last_sent;
}

// ---------------------------------------------------------------- fault switch

fault_schedule::fault_schedule()
    : basic_cs(md_builder("fault_schedule", model_kind::cs)
                   .param("t_on", 0.1)
                   .param("t_off", 0.35)
                   .output("fault_on", false, variability::discrete)
                   .build())
{
}

void fault_schedule::initialize(double, const parameter_set& params)
{
    store_.reset(params);
    if (!(real("t_off") > real("t_on"))) throw error("fault_schedule: t_off must be after t_on");
}

step_status fault_schedule::update_outputs(double t)
{
    put("fault_on", t >= real("t_on") - time_tol && t < real("t_off") - time_tol);
    return step_status::ok;
}

step_status fault_schedule::do_step(double t, double dt)
{
    return update_outputs(t + dt);
}

void fault_schedule::restore_state(const std::any& s)
{
    store_.restore(std::any_cast<const std::map<value_ref, value>&>(s));
}

// ---------------------------------------------------------------- equivalent

equivalent::equivalent(model_description md) : basic_cs(std::move(md))
{
    if (store_.description().kind != model_kind::cs) throw error("an equivalent is a stepping (CS) model");
}

} // namespace cosim::models
