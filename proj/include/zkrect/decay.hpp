#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "zkrect/solver.hpp"

namespace zkrect {

double kappa(const ProblemConfig& cfg, double delta);
double epsilon0(const ProblemConfig& cfg, double delta);

// (1+R) exp(-kappa t/(1+R)) [u0_norm_sq + nu1_weighted_sq]
double decay_bound(double t, const ProblemConfig& cfg, double kappa, double u0_norm_sq,
                   double nu1_weighted_sq);

struct DecayReport {
    double kappa = 0, eps0 = 0, delta = 0;
    bool admissible = false;        // kappa > 0 and data within eps0
    bool bound_satisfied = false;
    double data_size_sq = 0;        // |u0|^2 + |nu1|^2
    double min_margin = 0;          // min over instants of (bound - |u|^2) / bound
    std::vector<double> t, norm2, bound, margin;
};

struct DecayOptions {
    bool nonlinear = true;
    std::vector<double> instants;   // empty: every time level
};

// nu1: modes x levels, may be empty. f, mu0, nu0 are zero by construction.
DecayReport verify_decay(const Space& space, double delta, const ModalField& u0,
                         const Eigen::MatrixXd& nu1, const DecayOptions& opt = {});

struct InterpolationRatios {
    double r14 = 0;  // four-power inequality, lhs / rhs
    double r15 = 0;  // three-power inequality
};

// phi on the space's x-grid; phi_x optional exact x-derivative, otherwise
// second order differences are used.
InterpolationRatios check_interpolation(const Space& space, const ModalField& phi, int sigma,
                                        const std::optional<ModalField>& phi_x = std::nullopt);

enum class Steklov { Dirichlet, HalfDirichlet };

double check_steklov(const std::function<double(double)>& psi, const std::function<double(double)>& dpsi,
                     double L, Steklov variant, int nq = 256);

}  // namespace zkrect
