#include "zkrect/potentials.hpp"

#include <cmath>
#include <numbers>

#include "zkrect/error.hpp"

namespace zkrect {

TraceHat empty_hat(const EigenSystem& sys, ThetaGrid grid)
{
    if (!(grid.dtheta > 0.0) || !(grid.theta_max > 0.0))
        fail(ErrorKind::InvalidParameter, "theta grid needs positive spacing and extent");
    TraceHat h;
    h.sys = sys;
    const int K = static_cast<int>(std::llround(grid.theta_max / grid.dtheta));
    for (int k = -K; k <= K; ++k) {
        h.theta.push_back(k * grid.dtheta);
        h.wtheta.push_back(std::abs(k) == K ? 0.5 * grid.dtheta : grid.dtheta);
    }
    h.values = Eigen::MatrixXcd::Zero(h.theta.size(), sys.n_modes);
    return h;
}

TraceHat trace_hat(const Eigen::MatrixXd& nu, double t0, double dt, const EigenSystem& sys,
                   ThetaGrid grid)
{
    if (static_cast<std::size_t>(nu.cols()) != sys.quad.size())
        fail(ErrorKind::Shape, "trace_hat: y samples must sit on the quadrature nodes");
    if (nu.rows() < 2) fail(ErrorKind::Shape, "trace_hat: need at least two time samples");
    TraceHat h = empty_hat(sys, grid);
    const Eigen::Index nt = nu.rows();
    Eigen::MatrixXd modal(nt, sys.n_modes);
    for (Eigen::Index j = 0; j < nt; ++j) modal.row(j) = project(nu.row(j).transpose(), sys).transpose();

    const double peak = nu.cwiseAbs().maxCoeff();
    const double edge = std::max(nu.row(0).cwiseAbs().maxCoeff(), nu.row(nt - 1).cwiseAbs().maxCoeff());
    h.truncated = peak > 0.0 && edge > 1e-10 * peak;

    for (std::size_t k = 0; k < h.theta.size(); ++k) {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(sys.n_modes);
        for (Eigen::Index j = 0; j < nt; ++j) {
            const double t = t0 + dt * j;
            const double w = (j == 0 || j == nt - 1) ? 0.5 * dt : dt;
            const cplx e = std::polar(w, -h.theta[k] * t);
            acc += e * modal.row(j).transpose().cast<cplx>();
        }
        h.values.row(k) = acc.transpose();
    }
    return h;
}

cplx kernel(Potential which, cplx r1, cplx r2, double x, int dx_order)
{
    const cplx d = r1 - r2;
    if (std::abs(d) < 1e-6 * (std::abs(r1) + std::abs(r2) + 1.0)) {
        const cplx r = 0.5 * (r1 + r2);
        const cplx e = std::exp(r * x);
        if (which == Potential::J0)
            return dx_order == 0 ? (1.0 - r * x) * e : -r * r * x * e;
        return dx_order == 0 ? x * e : (1.0 + r * x) * e;
    }
    const cplx e1 = std::exp(r1 * x), e2 = std::exp(r2 * x);
    if (which == Potential::J0) {
        if (dx_order == 0) return (r1 * e2 - r2 * e1) / d;
        return r1 * r2 * (e2 - e1) / d;
    }
    if (dx_order == 0) return (e1 - e2) / d;
    return (r1 * e1 - r2 * e2) / d;
}

namespace {

struct Synth {
    const TraceHat& hat;
    std::vector<RootPair> roots;  // theta-major

    Synth(const TraceHat& h, double b) : hat(h)
    {
        const int n = h.sys.n_modes;
        roots.reserve(h.theta.size() * n);
        for (double th : h.theta)
            for (int l = 0; l < n; ++l) roots.push_back(limit_root_pair(th, b - h.sys.lambda[l]));
    }

    // per-mode kernel table at x: theta x mode
    Eigen::MatrixXcd kernels(Potential which, double x, int dx_order) const
    {
        const int n = hat.sys.n_modes;
        Eigen::MatrixXcd K(hat.theta.size(), n);
        for (std::size_t k = 0; k < hat.theta.size(); ++k)
            for (int l = 0; l < n; ++l) {
                if (hat.values(k, l) == cplx(0.0)) {
                    K(k, l) = 0.0;
                    continue;
                }
                const auto& rp = roots[k * n + l];
                K(k, l) = kernel(which, rp.r1, rp.r2, x, dx_order) * hat.values(k, l);
            }
        return K;
    }

    Eigen::VectorXcd modal(const Eigen::MatrixXcd& K, double t) const
    {
        Eigen::VectorXcd c = Eigen::VectorXcd::Zero(K.cols());
        for (std::size_t k = 0; k < hat.theta.size(); ++k)
            c += std::polar(hat.wtheta[k], hat.theta[k] * t) * K.row(k).transpose();
        return c / (2.0 * std::numbers::pi);
    }
};

double tail_of(const TraceHat& hat)
{
    const double peak = hat.values.cwiseAbs().maxCoeff();
    if (peak == 0.0) return 0.0;
    const Eigen::Index last = hat.values.rows() - 1;
    return std::max(hat.values.row(0).cwiseAbs().maxCoeff(), hat.values.row(last).cwiseAbs().maxCoeff()) / peak;
}

}  // namespace

PotentialValues eval_potential(const TraceHat& hat, Potential which, double b, double t, double x,
                               const std::vector<double>& y, int dx_order)
{
    if (x > 0.0) fail(ErrorKind::Domain, "potentials are defined for x <= 0");
    Synth s(hat, b);
    const Eigen::VectorXcd c = s.modal(s.kernels(which, x, dx_order), t);
    const Eigen::MatrixXd P = hat.sys.values(y);
    const Eigen::VectorXd re = P.transpose() * c.real();
    const Eigen::VectorXd im = P.transpose() * c.imag();
    PotentialValues out;
    out.values = re;
    const double m = re.cwiseAbs().maxCoeff();
    const double mi = im.cwiseAbs().maxCoeff();
    out.imag_residual = m > 0.0 ? mi / m : mi;
    out.tail = tail_of(hat);
    return out;
}

PotentialValues eval_j0(const TraceHat& hat, double b, double t, double x, const std::vector<double>& y)
{
    return eval_potential(hat, Potential::J0, b, t, x, y);
}

PotentialValues eval_j1(const TraceHat& hat, double b, double t, double x, const std::vector<double>& y)
{
    return eval_potential(hat, Potential::J1, b, t, x, y);
}

PotentialField sample_potential(const TraceHat& hat, Potential which, double b,
                                const std::vector<double>& t, const std::vector<double>& x,
                                const std::vector<double>& y)
{
    for (double xv : x)
        if (xv > 0.0) fail(ErrorKind::Domain, "potentials are defined for x <= 0");
    PotentialField f;
    f.which = which;
    f.t = t;
    f.x = x;
    f.y = y;
    f.data.assign(t.size() * x.size() * y.size(), 0.0);
    Synth s(hat, b);
    const Eigen::MatrixXd P = hat.sys.values(y);
    for (std::size_t ix = 0; ix < x.size(); ++ix) {
        const Eigen::MatrixXcd K = s.kernels(which, x[ix], 0);
        for (std::size_t it = 0; it < t.size(); ++it) {
            const Eigen::VectorXd v = P.transpose() * s.modal(K, t[it]).real();
            for (std::size_t iy = 0; iy < y.size(); ++iy) f.at(it, ix, iy) = v[iy];
        }
    }
    return f;
}

double pde_residual(const PotentialField& f, double b)
{
    const std::size_t nt = f.t.size(), nx = f.x.size(), ny = f.y.size();
    if (nx < 7) fail(ErrorKind::InvalidGrid, "pde_residual needs at least 7 x points");
    if (nt < 3 || ny < 3) fail(ErrorKind::InvalidGrid, "pde_residual needs 3 points in t and y");
    const double dt = f.t[1] - f.t[0], hx = f.x[1] - f.x[0], hy = f.y[1] - f.y[0];
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t it = 1; it + 1 < nt; ++it)
        for (std::size_t ix = 2; ix + 2 < nx; ++ix)
            for (std::size_t iy = 1; iy + 1 < ny; ++iy) {
                auto u = [&](std::size_t a, std::size_t c, std::size_t d) { return f.at(a, c, d); };
                const double ut = (u(it + 1, ix, iy) - u(it - 1, ix, iy)) / (2 * dt);
                const double ux = (u(it, ix + 1, iy) - u(it, ix - 1, iy)) / (2 * hx);
                const double uxxx = (u(it, ix + 2, iy) - 2 * u(it, ix + 1, iy) + 2 * u(it, ix - 1, iy) -
                                     u(it, ix - 2, iy)) /
                                    (2 * hx * hx * hx);
                auto uyy = [&](std::size_t c) {
                    return (u(it, c, iy + 1) - 2 * u(it, c, iy) + u(it, c, iy - 1)) / (hy * hy);
                };
                const double uxyy = (uyy(ix + 1) - uyy(ix - 1)) / (2 * hx);
                const double r = ut + b * ux + uxxx + uxyy;
                acc += r * r;
                ++count;
            }
    return std::sqrt(acc / count);
}

}  // namespace zkrect
