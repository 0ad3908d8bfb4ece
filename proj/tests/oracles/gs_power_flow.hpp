#pragma once

// Plain Gauss-Seidel power flow used to check the Newton solver. It only
// shares the network data structure with the library; admittances and the
// iteration are written out here from scratch.

#include "cosim/models/network.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

namespace oracle {

struct gs_solution {
    std::vector<double> vm, va;
    int sweeps = 0;
};

/// `fault_bus`/`fault_y`: optional extra shunt. Loads are constant power, or
/// constant impedance at 1 pu when `impedance_loads` is set.
inline gs_solution gauss_seidel_pf(cosim::models::network net, int fault_bus = -1, std::complex<double> fault_y = {},
                                   bool impedance_loads = false, double tol = 1e-13, int max_sweeps = 200000)
{
    if (impedance_loads) {
        for (auto& b : net.buses) {
            b.g_shunt += b.p_load;
            b.b_shunt -= b.q_load;
            b.p_load = b.q_load = 0.0;
        }
    }
    using C = std::complex<double>;
    const std::size_t n = net.buses.size();
    std::map<int, std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) idx[net.buses[i].id] = i;

    std::vector<std::vector<C>> y(n, std::vector<C>(n, 0.0));
    for (const auto& br : net.branches) {
        const auto a = idx.at(br.from), b = idx.at(br.to);
        const C z(br.r, br.x);
        const C series = C(1.0) / z;
        const C half_b(0.0, 0.5 * br.b);
        const double t = br.tap;
        y[a][a] += series / (t * t) + half_b / (t * t);
        y[b][b] += series + half_b;
        y[a][b] += -series / t;
        y[b][a] += -series / t;
    }
    for (std::size_t i = 0; i < n; ++i) y[i][i] += C(net.buses[i].g_shunt, net.buses[i].b_shunt);
    if (fault_bus >= 0) y[idx.at(fault_bus)][idx.at(fault_bus)] += fault_y;

    std::vector<C> v(n, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        if (net.buses[i].type != cosim::models::bus_type::pq) v[i] = net.buses[i].v_set;

    gs_solution out;
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& b = net.buses[i];
            if (b.type == cosim::models::bus_type::slack) continue;
            C sum = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                if (k != i) sum += y[i][k] * v[k];
            double p = b.p_gen - b.p_load;
            double q = b.q_gen - b.q_load;
            if (b.type == cosim::models::bus_type::pv) q = -std::imag(std::conj(v[i]) * (sum + y[i][i] * v[i]));
            C vn = (C(p, -q) / std::conj(v[i]) - sum) / y[i][i];
            if (b.type == cosim::models::bus_type::pv) vn *= b.v_set / std::abs(vn);
            delta = std::max(delta, std::abs(vn - v[i]));
            v[i] = vn;
        }
        out.sweeps = sweep;
        if (delta < tol) break;
        if (sweep == max_sweeps) throw std::runtime_error("Gauss-Seidel oracle did not converge");
    }
    for (const auto& x : v) {
        out.vm.push_back(std::abs(x));
        out.va.push_back(std::arg(x));
    }
    return out;
}

} // namespace oracle
