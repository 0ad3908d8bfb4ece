#include "cosim/models/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cosim::models {

using cplx = std::complex<double>;

non_convergence::non_convergence(int iterations, double mismatch)
    : error([&] {
          char buf[128];
          std::snprintf(buf, sizeof buf, "power flow did not converge after %d iterations (max mismatch %.3g pu)",
                        iterations, mismatch);
          return std::string(buf);
      }()),
      iterations_(iterations), mismatch_(mismatch)
{
}

Eigen::MatrixXcd admittance_matrix(const network& n)
{
    const auto nb = static_cast<Eigen::Index>(n.buses.size());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(nb, nb);
    for (const auto& br : n.branches) {
        const auto f = static_cast<Eigen::Index>(n.index_of(br.from));
        const auto t = static_cast<Eigen::Index>(n.index_of(br.to));
        const cplx ys = 1.0 / cplx(br.r, br.x);
        const cplx ysh(0.0, br.b / 2.0);
        y(f, f) += (ys + ysh) / (br.tap * br.tap);
        y(t, t) += ys + ysh;
        y(f, t) -= ys / br.tap;
        y(t, f) -= ys / br.tap;
    }
    for (Eigen::Index i = 0; i < nb; ++i) y(i, i) += cplx(n.buses[i].g_shunt, n.buses[i].b_shunt);
    return y;
}

namespace {

double v0_of(const pf_conditions& c, std::size_t i)
{
    return c.v0.empty() ? 1.0 : c.v0.at(i);
}

// d(specified injection)/d|V|
cplx specified_slope(const network& n, const pf_conditions& c, std::size_t i, double vm)
{
    const auto& b = n.buses[i];
    const double v0 = v0_of(c, i);
    cplx d(0.0, 0.0);
    if (c.alpha_p != 0.0) d -= c.alpha_p * b.p_load * std::pow(vm / v0, c.alpha_p - 1.0) / v0;
    if (c.alpha_q != 0.0) d -= cplx(0.0, c.alpha_q * b.q_load * std::pow(vm / v0, c.alpha_q - 1.0) / v0);
    return d;
}

} // namespace

cplx specified_injection(const network& n, const pf_conditions& c, std::size_t i, double vm)
{
    const auto& b = n.buses[i];
    const double v0 = v0_of(c, i);
    const double pl = c.alpha_p == 0.0 ? b.p_load : b.p_load * std::pow(vm / v0, c.alpha_p);
    const double ql = c.alpha_q == 0.0 ? b.q_load : b.q_load * std::pow(vm / v0, c.alpha_q);
    return {b.p_gen - pl, b.q_gen - ql};
}

cplx converter_current(const pf_conditions& c)
{
    return std::polar(1.0, c.frame_angle) * cplx(c.i_d, -c.i_q);
}

pf_result solve_power_flow(const network& n, const pf_conditions& c, const pf_result* start, const pf_options& opt)
{
    return solve_power_flow(n, admittance_matrix(n), c, start, opt);
}

namespace {

pf_result newton(const network& n, const Eigen::MatrixXcd& ybus_in, const pf_conditions& c, const pf_result* start,
                 const pf_options& opt);

} // namespace

namespace {

// Linear network solution: generator buses held at their (start) voltages,
// loads as impedances at their reference voltage, converter as a current source.
pf_result linear_guess(const network& n, const Eigen::MatrixXcd& ybus, const pf_conditions& c, const pf_result* start)
{
    const auto nb = static_cast<Eigen::Index>(n.buses.size());
    Eigen::MatrixXcd y = ybus;
    if (c.shunt_bus)
        y(static_cast<Eigen::Index>(*c.shunt_bus), static_cast<Eigen::Index>(*c.shunt_bus)) += c.shunt;
    Eigen::VectorXcd v(nb);
    std::vector<Eigen::Index> fixed, free;
    for (Eigen::Index i = 0; i < nb; ++i) {
        const auto& b = n.buses[i];
        const double vm = start && start->vm.size() == nb ? start->vm(i) : 1.0;
        const double va = start && start->va.size() == nb ? start->va(i) : 0.0;
        v(i) = std::polar(b.type == bus_type::pq ? vm : b.v_set, va);
        if (b.type == bus_type::pq) {
            free.push_back(i);
            const double v0 = v0_of(c, i);
            y(i, i) += cplx(b.p_load, -b.q_load) / (v0 * v0);
        } else {
            fixed.push_back(i);
        }
    }
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXcd a(nf, nf);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(nf);
    for (Eigen::Index r = 0; r < nf; ++r) {
        for (Eigen::Index k = 0; k < nf; ++k) a(r, k) = y(free[r], free[k]);
        for (auto g : fixed) rhs(r) -= y(free[r], g) * v(g);
    }
    if (c.current_bus) {
        const auto k = std::find(free.begin(), free.end(), static_cast<Eigen::Index>(*c.current_bus)) - free.begin();
        if (k < nf) rhs(k) += converter_current(c);
    }
    const Eigen::VectorXcd vf = a.partialPivLu().solve(rhs);
    pf_result guess;
    guess.vm.resize(nb);
    guess.va.resize(nb);
    for (Eigen::Index i = 0; i < nb; ++i) {
        guess.vm(i) = std::abs(v(i));
        guess.va(i) = std::arg(v(i));
    }
    for (Eigen::Index r = 0; r < nf; ++r) {
        guess.vm(free[r]) = std::max(std::abs(vf(r)), 1e-6);
        guess.va(free[r]) = std::arg(vf(r));
    }
    return guess;
}

} // namespace

pf_result solve_power_flow(const network& n, const Eigen::MatrixXcd& ybus, const pf_conditions& c,
                           const pf_result* start, const pf_options& opt)
{
    // A faulted network is far from any warm start and the equations have
    // several roots there; the linear short-circuit solution leads to the
    // physical one.
    if (c.shunt_bus) {
        const auto guess = linear_guess(n, ybus, c, start);
        try {
            return newton(n, ybus, c, &guess, opt);
        } catch (const non_convergence&) {
            return newton(n, ybus, c, start, opt);
        }
    }
    try {
        return newton(n, ybus, c, start, opt);
    } catch (const non_convergence&) {
        const auto guess = linear_guess(n, ybus, c, start);
        return newton(n, ybus, c, &guess, opt);
    }
}

namespace {

pf_result newton(const network& n, const Eigen::MatrixXcd& ybus_in, const pf_conditions& c, const pf_result* start,
                 const pf_options& opt)
{
    const auto nb = static_cast<Eigen::Index>(n.buses.size());
    Eigen::MatrixXcd ybus = ybus_in;
    if (c.shunt_bus) ybus(static_cast<Eigen::Index>(*c.shunt_bus), static_cast<Eigen::Index>(*c.shunt_bus)) += c.shunt;

    std::vector<Eigen::Index> pvpq, pq;
    for (Eigen::Index i = 0; i < nb; ++i) {
        if (n.buses[i].type != bus_type::slack) pvpq.push_back(i);
        if (n.buses[i].type == bus_type::pq) pq.push_back(i);
    }
    const auto np = static_cast<Eigen::Index>(pvpq.size());
    const auto nq = static_cast<Eigen::Index>(pq.size());

    pf_result r;
    r.vm = Eigen::VectorXd::Ones(nb);
    r.va = Eigen::VectorXd::Zero(nb);
    if (start && start->vm.size() == nb) {
        r.vm = start->vm;
        r.va = start->va;
    }
    for (Eigen::Index i = 0; i < nb; ++i) {
        if (n.buses[i].type != bus_type::pq) r.vm(i) = n.buses[i].v_set;
        if (n.buses[i].type == bus_type::slack) r.va(i) = 0.0;
    }

    // net current leaving each bus into the network, converter source removed
    Eigen::VectorXcd source = Eigen::VectorXcd::Zero(nb);
    if (c.current_bus) source(static_cast<Eigen::Index>(*c.current_bus)) = converter_current(c);

    Eigen::VectorXcd v(nb);
    Eigen::VectorXd f(np + nq);
    auto evaluate = [&] {
        for (Eigen::Index i = 0; i < nb; ++i) v(i) = std::polar(r.vm(i), r.va(i));
        const Eigen::VectorXcd ibus = ybus * v - source;
        for (Eigen::Index k = 0; k < np; ++k) {
            const auto i = pvpq[k];
            const cplx mis = v(i) * std::conj(ibus(i)) - specified_injection(n, c, i, r.vm(i));
            f(k) = mis.real();
        }
        for (Eigen::Index k = 0; k < nq; ++k) {
            const auto i = pq[k];
            const cplx mis = v(i) * std::conj(ibus(i)) - specified_injection(n, c, i, r.vm(i));
            f(np + k) = mis.imag();
        }
        const double m = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
        return std::isfinite(m) ? m : INFINITY;
    };

    // Rows of PQ buses are divided by |V|: with impedance loads and current
    // sources the power balance of such a bus also vanishes at V = 0, the
    // current balance does not. Convergence is still judged on power.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pq_rows; // (P row, Q row == its |V| column)
    for (Eigen::Index k = 0; k < nq; ++k)
        pq_rows.emplace_back(std::find(pvpq.begin(), pvpq.end(), pq[k]) - pvpq.begin(), np + k);
    auto scaled = [&] {
        Eigen::VectorXd g = f;
        for (Eigen::Index k = 0; k < nq; ++k) {
            g(pq_rows[k].first) /= r.vm(pq[k]);
            g(pq_rows[k].second) /= r.vm(pq[k]);
        }
        return g;
    };
    auto merit = [&] {
        const double m = f.size() ? scaled().cwiseAbs().maxCoeff() : 0.0;
        return std::isfinite(m) ? m : INFINITY;
    };

    double mismatch = evaluate();
    double score = merit();
    int it = 0;
    while (mismatch >= opt.tolerance) {
        if (it >= opt.max_iterations || !std::isfinite(mismatch)) throw non_convergence(it, mismatch);
        ++it;

        const Eigen::VectorXcd ibus = ybus * v - source;
        Eigen::VectorXcd vnorm(nb);
        for (Eigen::Index i = 0; i < nb; ++i) vnorm(i) = v(i) / r.vm(i);
        // dS/dVa = j diag(V) conj(diag(I) - Y diag(V)); dS/dVm = diag(V) conj(Y diag(Vn)) + conj(diag(I)) diag(Vn)
        Eigen::MatrixXcd ds_dva = -(ybus * v.asDiagonal()).conjugate();
        ds_dva.diagonal() += ibus.conjugate();
        ds_dva = cplx(0.0, 1.0) * (v.asDiagonal() * ds_dva);
        Eigen::MatrixXcd ds_dvm = v.asDiagonal() * (ybus * vnorm.asDiagonal()).conjugate();
        ds_dvm.diagonal() += ibus.conjugate().cwiseProduct(vnorm);
        for (Eigen::Index i = 0; i < nb; ++i) ds_dvm(i, i) -= specified_slope(n, c, i, r.vm(i));

        Eigen::MatrixXd j(np + nq, np + nq);
        for (Eigen::Index a = 0; a < np; ++a) {
            for (Eigen::Index b = 0; b < np; ++b) j(a, b) = ds_dva(pvpq[a], pvpq[b]).real();
            for (Eigen::Index b = 0; b < nq; ++b) j(a, np + b) = ds_dvm(pvpq[a], pq[b]).real();
        }
        for (Eigen::Index a = 0; a < nq; ++a) {
            for (Eigen::Index b = 0; b < np; ++b) j(np + a, b) = ds_dva(pq[a], pvpq[b]).imag();
            for (Eigen::Index b = 0; b < nq; ++b) j(np + a, np + b) = ds_dvm(pq[a], pq[b]).imag();
        }
        for (Eigen::Index k = 0; k < nq; ++k) {
            const double vm = r.vm(pq[k]);
            for (auto row : {pq_rows[k].first, pq_rows[k].second}) {
                j.row(row) /= vm;
                j(row, np + k) -= f(row) / (vm * vm);
            }
        }
        const Eigen::VectorXd dx = -j.partialPivLu().solve(scaled());
        // Backtrack while the full step makes the mismatch worse; deep faults
        // put some magnitudes close to zero where the full step overshoots.
        const Eigen::VectorXd va0 = r.va, vm0 = r.vm;
        double step = 1.0;
        for (int halvings = 0;; ++halvings) {
            for (Eigen::Index k = 0; k < np; ++k) r.va(pvpq[k]) = va0(pvpq[k]) + step * dx(k);
            for (Eigen::Index k = 0; k < nq; ++k) {
                double m = vm0(pq[k]) + step * dx(np + k);
                if (m < 0.0) {
                    m = -m;
                    r.va(pq[k]) += M_PI;
                }
                r.vm(pq[k]) = m;
            }
            mismatch = evaluate();
            const double next = merit();
            if (next < score || halvings == 10) {
                score = next;
                break;
            }
            step *= 0.5;
        }
    }
    r.iterations = it;
    r.max_mismatch = mismatch;

    for (const auto& br : n.branches) {
        const auto fi = static_cast<Eigen::Index>(n.index_of(br.from));
        const auto ti = static_cast<Eigen::Index>(n.index_of(br.to));
        const cplx ys = 1.0 / cplx(br.r, br.x);
        const cplx ysh(0.0, br.b / 2.0);
        const cplx i_f = (ys + ysh) / (br.tap * br.tap) * v(fi) - ys / br.tap * v(ti);
        const cplx i_t = (ys + ysh) * v(ti) - ys / br.tap * v(fi);
        r.flows.push_back({br.from, br.to, v(fi) * std::conj(i_f), v(ti) * std::conj(i_t)});
    }
    return r;
}

} // namespace

} // namespace cosim::models
