#include "cosim/models/frt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cosim::models {

namespace {

constexpr double snap = 1e-9;

} // namespace

frt_envelope::frt_envelope(std::vector<anchor> anchors) : anchors_(std::move(anchors))
{
    if (anchors_.size() < 2) throw error("FRT envelope needs at least two anchors");
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
        const auto& a = anchors_[i];
        if (!(a.u >= 0.0 && a.u <= 1.0)) throw error("FRT envelope voltages must lie in [0, 1]");
        if (i > 0 && !(a.t > anchors_[i - 1].t)) throw error("FRT envelope anchor times must increase");
        if (i > 0 && a.u < anchors_[i - 1].u) throw error("FRT envelope voltages must not decrease");
    }
}

frt_envelope frt_envelope::standard(double u_ret, double t_clear, double u_clear, double t_rec3, double u_final)
{
    return frt_envelope({{0.0, u_ret}, {t_clear, u_clear}, {t_rec3, u_final}});
}

double frt_envelope::limit(double t_rel) const
{
    if (t_rel < anchors_.front().t - snap) return 0.0;
    for (const auto& a : anchors_)
        if (std::abs(t_rel - a.t) <= snap) return a.u;
    // deep-dip part: flat at the first anchor until the second
    if (t_rel < anchors_[1].t) return anchors_.front().u;
    for (std::size_t i = 2; i < anchors_.size(); ++i) {
        const auto& a = anchors_[i - 1];
        const auto& b = anchors_[i];
        if (t_rel < b.t) return a.u + (b.u - a.u) * (t_rel - a.t) / (b.t - a.t);
    }
    return anchors_.back().u;
}

qv_curve::qv_curve(std::vector<point> points) : points_(std::move(points))
{
    if (points_.empty()) throw error("Q-V curve needs at least one breakpoint");
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (!(points_[i].v > points_[i - 1].v)) throw error("Q-V curve voltages must increase");
        if (points_[i].q > points_[i - 1].q) throw error("Q-V curve must be non-increasing in V");
    }
}

qv_curve qv_curve::parse(std::string_view text)
{
    std::vector<point> pts;
    std::stringstream ss{std::string(text)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw error("bad Q-V breakpoint '" + item + "' (expected v:q)");
        try {
            std::size_t n1 = 0, n2 = 0;
            const auto vs = item.substr(0, colon), qs = item.substr(colon + 1);
            const double v = std::stod(vs, &n1);
            const double q = std::stod(qs, &n2);
            if (n1 != vs.size() || n2 != qs.size()) throw std::invalid_argument(item);
            pts.push_back({v, q});
        } catch (const std::logic_error&) {
            throw error("bad Q-V breakpoint '" + item + "' (expected v:q)");
        }
    }
    return qv_curve(std::move(pts));
}

std::string qv_curve::str() const
{
    std::string out;
    char buf[64];
    for (const auto& p : points_) {
        std::snprintf(buf, sizeof buf, "%s%.17g:%.17g", out.empty() ? "" : ",", p.v, p.q);
        out += buf;
    }
    return out;
}

double qv_curve::operator()(double v) const
{
    if (v <= points_.front().v) return points_.front().q;
    if (v >= points_.back().v) return points_.back().q;
    const auto hi = std::upper_bound(points_.begin(), points_.end(), v, [](double x, const point& p) { return x < p.v; });
    const auto lo = hi - 1;
    if (v == lo->v) return lo->q;
    return lo->q + (hi->q - lo->q) * (v - lo->v) / (hi->v - lo->v);
}

std::string_view to_string(frt_state s)
{
    switch (s) {
    case frt_state::normal: return "NORMAL";
    case frt_state::frt_active: return "FRT_ACTIVE";
    case frt_state::tripped: return "TRIPPED";
    }
    return "?";
}

frt_state frt_transition(frt_state s, double u, const frt_thresholds& th)
{
    if (s == frt_state::tripped || u < th.u_ret) return frt_state::tripped;
    if (s == frt_state::normal) return u < th.u_clear ? frt_state::frt_active : frt_state::normal;
    return u >= th.u_clear + th.h_v ? frt_state::normal : frt_state::frt_active;
}

std::pair<double, double> limit_current(double i_d, double i_q, double i_max, bool q_priority)
{
    if (q_priority) {
        const double q = std::clamp(i_q, -i_max, i_max);
        const double room = std::sqrt(std::max(0.0, i_max * i_max - q * q));
        return {std::clamp(i_d, -room, room), q};
    }
    const double mag = std::hypot(i_d, i_q);
    if (mag <= i_max) return {i_d, i_q};
    const double k = i_max / mag;
    return {i_d * k, i_q * k};
}

} // namespace cosim::models
