#pragma once

#include <vector>

#include "zkrect/solver.hpp"

namespace zkrect {

// Boundary control nu1 sampled at the time levels: modes x (steps + 1).
using Control = Eigen::MatrixXd;

struct ControlOptions {
    double tol_cg = 1e-8;
    int max_cg = 500;
    int plateau = 50;          // iterations without progress before giving up
    double tol_theta = 1e-8;
    int max_theta = 100;
    double smallness = -1.0;   // negative: 1e-2 * epsilon0 at delta = 1/2
};

struct KrylovResult {
    ModalField phi;
    std::vector<double> residuals;  // relative, one per iteration (index 0: start)
    bool converged = false;
    double min_rayleigh = 0.0;      // smallest Rayleigh quotient met along the search directions
};

struct ControlResult {
    Control nu1;
    double terminal_error = 0.0;
    std::vector<double> cg_trace;
    std::vector<double> picard_trace;
    std::vector<double> contraction;
    double fixed_point_gap = 0.0;  // |re-simulated - fixed point| / |fixed point| over Q_T
    ModalField reached;
};

struct CriticalLength {
    int l, k, m;
    double R_crit, distance;
    bool match;
};

std::vector<CriticalLength> critical_length_check(const ProblemConfig& cfg, int k_max, int m_max);

class Controller {
public:
    explicit Controller(const Space& space, ControlOptions opt = {});

    const Space& space;
    ControlOptions opt;

    // inner products: trapezoid in x for states, trapezoid in t for controls
    double state_inner(const ModalField& a, const ModalField& b) const;
    double control_inner(const Control& a, const Control& b) const;

    Trajectory apply_P(const ModalField& u0, bool keep_levels = false) const;
    Trajectory apply_P1(const Control& nu1, bool keep_levels = false) const;
    ModalField apply_P1T(const Control& nu1) const;
    Control apply_Lambda(const ModalField& phi0) const;
    // backward adjoint problem solved forward after (t, x) -> (T - t, R - x)
    Control apply_Lambda_pde(const ModalField& phi0) const;
    ModalField apply_A(const ModalField& phi) const;
    KrylovResult solve_gramian(const ModalField& w, const ModalField* start = nullptr) const;
    Trajectory apply_P2(const std::vector<ModalField>& f1, bool keep_levels = false) const;

    ControlResult linear_control(const ModalField& u0, const ModalField& uT) const;
    ControlResult nonlinear_control(const ModalField& u0, const ModalField& uT) const;

    double smallness_threshold() const;

private:
    Stepper stepper_;
    // per mode: terminal interior state produced by a unit control value at each level
    std::vector<Eigen::MatrixXd> response_;
    std::vector<double> wt_;  // trapezoid time weights
    ModalField interior(const ModalField& u) const;
};

}  // namespace zkrect
