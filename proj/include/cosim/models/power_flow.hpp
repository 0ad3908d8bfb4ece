#pragma once

#include "cosim/models/network.hpp"

#include <Eigen/Dense>

namespace cosim::models {

class non_convergence : public error {
public:
    non_convergence(int iterations, double mismatch);
    int iterations() const noexcept { return iterations_; }
    double mismatch() const noexcept { return mismatch_; }

private:
    int iterations_;
    double mismatch_;
};

/// Voltage-dependent terms added on top of the network's fixed injections.
struct pf_conditions {
    /// Loads scale as P0 (V/V0)^alpha_p, Q0 (V/V0)^alpha_q.
    double alpha_p = 0.0;
    double alpha_q = 0.0;
    std::vector<double> v0; // per bus index; empty means 1.0 everywhere

    /// Converter current source at one bus, I = (i_d - j i_q) e^{j frame_angle}.
    /// With frame_angle equal to the bus voltage angle this injects
    /// S = |V| (i_d + j i_q).
    std::optional<std::size_t> current_bus;
    double i_d = 0.0;
    double i_q = 0.0;
    double frame_angle = 0.0;

    /// Extra shunt admittance (fault) at one bus index.
    std::optional<std::size_t> shunt_bus;
    std::complex<double> shunt{0.0, 0.0};
};

struct branch_flow {
    int from, to;
    std::complex<double> s_from; // into the branch at the from end
    std::complex<double> s_to;
};

struct pf_result {
    Eigen::VectorXd vm;
    Eigen::VectorXd va;
    int iterations = 0;
    double max_mismatch = 0.0;
    std::vector<branch_flow> flows;

    std::complex<double> voltage(std::size_t i) const { return std::polar(vm(i), va(i)); }
};

Eigen::MatrixXcd admittance_matrix(const network& n);

struct pf_options {
    double tolerance = 1e-8;
    int max_iterations = 50;
};

/// Polar Newton-Raphson. `start` is a warm start (vm, va); flat start otherwise.
pf_result solve_power_flow(const network& n, const pf_conditions& c = {}, const pf_result* start = nullptr,
                           const pf_options& opt = {});

/// Same, with a prebuilt admittance matrix.
pf_result solve_power_flow(const network& n, const Eigen::MatrixXcd& ybus, const pf_conditions& c,
                           const pf_result* start, const pf_options& opt = {});

/// Specified generation minus load at bus index i for the given voltage
/// magnitude. The converter source is not included.
std::complex<double> specified_injection(const network& n, const pf_conditions& c, std::size_t i, double vm);

/// Converter current phasor.
std::complex<double> converter_current(const pf_conditions& c);

} // namespace cosim::models
