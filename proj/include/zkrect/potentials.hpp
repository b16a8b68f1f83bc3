#pragma once

#include <vector>

#include <Eigen/Dense>

#include "zkrect/basis.hpp"
#include "zkrect/roots.hpp"

namespace zkrect {

struct ThetaGrid {
    double dtheta = 0.05;
    double theta_max = 40.0;
};

// Time-Fourier / y-modal transform of a lateral trace.
struct TraceHat {
    EigenSystem sys;
    std::vector<double> theta;
    std::vector<double> wtheta;  // trapezoid weights in theta
    Eigen::MatrixXcd values;     // theta x mode
    bool truncated = false;      // trace not negligible at the ends of its t-grid
};

TraceHat empty_hat(const EigenSystem& sys, ThetaGrid grid);

// nu: rows are time samples t0 + j*dt, columns the quadrature nodes of sys.
TraceHat trace_hat(const Eigen::MatrixXd& nu, double t0, double dt, const EigenSystem& sys,
                   ThetaGrid grid = {});

enum class Potential { J0, J1 };

// x-profile of one Fourier/modal component, or its x-derivative.
cplx kernel(Potential which, cplx r1, cplx r2, double x, int dx_order = 0);

struct PotentialValues {
    Eigen::VectorXd values;
    double imag_residual = 0.0;  // max |Im| / max |Re|
    double tail = 0.0;           // |hat| at +-theta_max relative to its max
};

PotentialValues eval_potential(const TraceHat& hat, Potential which, double b, double t, double x,
                               const std::vector<double>& y, int dx_order = 0);
PotentialValues eval_j0(const TraceHat& hat, double b, double t, double x, const std::vector<double>& y);
PotentialValues eval_j1(const TraceHat& hat, double b, double t, double x, const std::vector<double>& y);

struct PotentialField {
    Potential which = Potential::J0;
    std::vector<double> t, x, y;
    std::vector<double> data;  // index (it * x.size() + ix) * y.size() + iy
    double& at(std::size_t it, std::size_t ix, std::size_t iy)
    {
        return data[(it * x.size() + ix) * y.size() + iy];
    }
    double at(std::size_t it, std::size_t ix, std::size_t iy) const
    {
        return data[(it * x.size() + ix) * y.size() + iy];
    }
};

PotentialField sample_potential(const TraceHat& hat, Potential which, double b,
                                const std::vector<double>& t, const std::vector<double>& x,
                                const std::vector<double>& y);

// RMS of u_t + b u_x + u_xxx + u_xyy over interior points, second order
// central differences. Grids must be uniform.
double pde_residual(const PotentialField& field, double b);

}  // namespace zkrect
