#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "zkrect/basis.hpp"

namespace zkrect {

struct ProblemConfig {
    double R = 3.141592653589793;
    double L = 3.141592653589793;
    double b = 0.0;
    BcCase bc = BcCase::DirichletDirichlet;
    double T = 1.0;
    void validate() const;
};

struct Grid {
    int Nx = 64;
    int n_modes = 16;
    double dt = 1e-2;
    void validate() const;
};

// Rows are y-modes, columns the x-nodes 0..Nx (boundary nodes included).
using ModalField = Eigen::MatrixXd;

// Everything that depends on (config, grid) only.
class Space {
public:
    Space(const ProblemConfig& cfg, const Grid& grid);

    ProblemConfig cfg;
    Grid grid;
    EigenSystem sys;
    double h = 0.0;
    std::vector<double> x;
    std::vector<double> wx;  // trapezoid weights
    int steps = 0;           // dt * steps == T

    Quadrature yq;           // dealiased product grid
    Eigen::MatrixXd Py;      // modes x yq nodes
    Eigen::VectorXd wy;

    int nodes() const { return grid.Nx + 1; }
    int modes() const { return grid.n_modes; }
    double dt() const { return cfg.T / steps; }
    ModalField zero() const { return ModalField::Zero(modes(), nodes()); }

    Eigen::MatrixXd to_physical(const ModalField& c) const;  // yq nodes x x-nodes
    ModalField to_modal(const Eigen::MatrixXd& u) const;

    double norm2(const ModalField& c) const;
    double inner(const ModalField& a, const ModalField& b) const;

    // Projects f(x, y) on the modes at every x-node.
    template <class F>
    ModalField sample(F&& f) const
    {
        Eigen::MatrixXd u(yq.size(), nodes());
        for (int i = 0; i < nodes(); ++i)
            for (std::size_t q = 0; q < yq.size(); ++q) u(q, i) = f(x[i], yq.nodes[q]);
        return to_modal(u);
    }
};

// Per-mode operator A = a d/dx + d^3/dx^3 on the interior nodes 1..Nx-1,
// a = b - lambda. Boundary data enter through three columns.
struct ModeOperator {
    double a = 0.0;
    double h = 0.0;
    int n = 0;
    Eigen::MatrixXd A;
    Eigen::VectorXd col_mu, col_nu, col_nu1;

    // A applied to full nodal values v (size n+2) with slope nu1 at x = R.
    Eigen::VectorXd apply(const Eigen::VectorXd& v, double nu1) const;
};

ModeOperator build_mode_operator(double a, double R, int Nx);
ModeOperator build_mode_operator(int k, const Space& space);

// Second order trace of u_x at x = 0 from nodes 0..3, and the two O(h^2)
// curvature terms that close the discrete energy balance.
double trace_x0(const Eigen::Ref<const Eigen::VectorXd>& v, double h);
double left_defect(const Eigen::Ref<const Eigen::VectorXd>& v, double h);

// Samples at the time levels n*dt, n = 0..steps. Empty members mean zero.
struct BoundaryData {
    Eigen::MatrixXd mu0, nu0, nu1;   // modes x levels
    std::vector<ModalField> f, f1;   // per level; f1 enters as d/dx f1
};

struct StepOptions {
    bool nonlinear = true;
    double reg_h = 0.0;         // 0 disables the g_h flux
    double tol_picard = 1e-10;
    int max_iters = 50;
};

double g_h(double u, double h);
double g_h_prime(double u, double h);

// Skew form of (u^2/2)_x on interior nodes, projected on the modes.
Eigen::MatrixXd nonlinear_term(const Space& space, const ModalField& u, double reg_h);

struct LevelData {
    Eigen::VectorXd mu, nu, nu1;
    const ModalField* f = nullptr;
    const ModalField* f1 = nullptr;
};

struct StepResult {
    ModalField u;
    int iterations = 0;
    std::vector<double> picard;
};

class Stepper {
public:
    Stepper(const Space& space, double dt);
    StepResult step(const ModalField& u, const LevelData& d0, const LevelData& d1,
                    const StepOptions& opt) const;

    const Space& space;
    double dt;
    std::vector<ModeOperator> ops;
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu;
    std::vector<Eigen::MatrixXd> Mplus;
};

StepResult step(const Space& space, const ModalField& u, double t, double dt, const BoundaryData& data,
                const StepOptions& opt);

// Largest dt keeping the Picard map a contraction for amplitude u_max.
double stability_budget(const Space& space, double u_max);

struct SimOptions {
    StepOptions step;
    std::vector<double> snapshot_times;
    bool keep_levels = false;
    bool weighted_audit = false;  // records the rho = 1 + x terms
};

struct Trajectory {
    std::vector<double> t;       // level times
    std::vector<double> norm2;   // per level
    // per step, at the Crank-Nicolson midpoint
    std::vector<Eigen::VectorXd> mu1;
    std::vector<double> mu1_sq, left_art, right_art, nu1_sq, fwork;
    // per level, trace of u_x at x = 0
    std::vector<Eigen::VectorXd> mu1_level;
    // per level, rho = 1 + x audit terms
    std::vector<double> wnorm2, dissip, cubic, wfwork;
    std::vector<std::pair<double, ModalField>> snapshots;
    std::vector<ModalField> levels;
    ModalField final_state;
    int max_picard = 0;
    bool weighted = false;
};

Trajectory simulate(const Space& space, const ModalField& u0, const BoundaryData& data,
                    const SimOptions& opt = {});

enum class Weight { One, OnePlusX };

struct EnergyReport {
    Weight rho = Weight::One;
    std::vector<double> t, lhs, rhs, residual;
    double max_rel_residual = 0.0;
    double scale = 0.0;             // normalizer of the relative residual
    double boundary_defect = 0.0;   // accumulated O(h^2) closure terms (rho = 1)
    double trace_sq = 0.0;          // accumulated integral of mu1^2
};

EnergyReport energy_report(const Trajectory& traj, Weight rho, const Space& space);

}  // namespace zkrect
