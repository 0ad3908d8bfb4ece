#pragma once

#include "cosim/common/error.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cosim::models {

/// Lower voltage limit after fault inception, given as anchor points
/// (t relative to the fault, U pu). The limit is U of the first anchor up to
/// the second anchor time, linear between later anchors and flat after the last.
class frt_envelope {
public:
    struct anchor {
        double t;
        double u;
        friend bool operator==(const anchor&, const anchor&) = default;
    };

    frt_envelope() = default;
    explicit frt_envelope(std::vector<anchor> anchors);

    /// (0, U_ret), (t_clear, U_clear), (t_rec3, U_final).
    static frt_envelope standard(double u_ret = 0.15, double t_clear = 0.25, double u_clear = 0.9,
                                 double t_rec3 = 1.5, double u_final = 0.9);

    double limit(double t_rel) const;
    double horizon() const { return anchors_.back().t; }
    double u_ret() const { return anchors_.front().u; }
    const std::vector<anchor>& anchors() const noexcept { return anchors_; }

private:
    std::vector<anchor> anchors_{{0.0, 0.15}, {0.25, 0.9}, {1.5, 0.9}};
};

/// Piecewise linear Q(V) droop, clamped outside the breakpoints.
class qv_curve {
public:
    struct point {
        double v;
        double q;
        friend bool operator==(const point&, const point&) = default;
    };

    qv_curve() = default;
    explicit qv_curve(std::vector<point> points);

    /// "v:q,v:q,..."
    static qv_curve parse(std::string_view text);
    std::string str() const;

    double operator()(double v) const;
    const std::vector<point>& points() const noexcept { return points_; }

private:
    std::vector<point> points_{{0.9, 0.25}, {0.96, 0.10}, {1.0, 0.0}, {1.04, -0.10}, {1.10, -0.25}};
};

inline constexpr const char* default_qv_curve = "0.90:0.25,0.96:0.10,1.00:0.0,1.04:-0.10,1.10:-0.25";

enum class frt_state : std::int64_t { normal = 0, frt_active = 1, tripped = 2 };

std::string_view to_string(frt_state s);

struct frt_thresholds {
    double u_ret = 0.15;
    double u_clear = 0.9;
    double h_v = 0.01;
};

/// Total over (state, U); TRIPPED is absorbing.
frt_state frt_transition(frt_state s, double u, const frt_thresholds& th);

/// Radial limit of (i_d, i_q) to the i_max circle. With q priority the
/// reactive part is kept (up to i_max) and i_d gets the remainder.
std::pair<double, double> limit_current(double i_d, double i_q, double i_max, bool q_priority);

} // namespace cosim::models
