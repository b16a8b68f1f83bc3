#include "zkrect/decay.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "zkrect/error.hpp"

namespace zkrect {

using std::numbers::pi;

namespace {

void check_delta(double delta)
{
    if (!(delta > 0.0 && delta < 1.0)) fail(ErrorKind::InvalidParameter, "delta must lie in (0,1)");
}

}  // namespace

double kappa(const ProblemConfig& cfg, double delta)
{
    check_delta(delta);
    const double R2 = cfg.R * cfg.R, L2 = cfg.L * cfg.L;
    switch (cfg.bc) {
    case BcCase::DirichletDirichlet: return -cfg.b + pi * pi * (1 - delta) * (3 / R2 + 1 / L2);
    case BcCase::DirichletNeumann: return -cfg.b + pi * pi * (1 - delta) * (3 / R2 + 1 / (4 * L2));
    default: return -cfg.b + 3 * pi * pi * (1 - delta) / R2;
    }
}

double epsilon0(const ProblemConfig& cfg, double delta)
{
    check_delta(delta);
    const double pre = std::pow(3.0, 1.25) * pi * delta / 4;
    const double s3 = std::sqrt(3.0) / cfg.R;
    switch (cfg.bc) {
    case BcCase::DirichletDirichlet: return pre * std::max(s3, 1 / cfg.L);
    case BcCase::DirichletNeumann: return pre * std::max(s3, 1 / (2 * cfg.L));
    default: {
        const double q = std::pow(3.0, 0.25) * std::sqrt(pi * cfg.L);
        return pre * s3 * q / (std::sqrt(cfg.R) + q);
    }
    }
}

double decay_bound(double t, const ProblemConfig& cfg, double kap, double u0_norm_sq, double nu1_weighted_sq)
{
    if (t < 0 || u0_norm_sq < 0 || nu1_weighted_sq < 0)
        fail(ErrorKind::InvalidParameter, "decay_bound needs nonnegative inputs");
    return (1 + cfg.R) * std::exp(-kap * t / (1 + cfg.R)) * (u0_norm_sq + nu1_weighted_sq);
}

DecayReport verify_decay(const Space& space, double delta, const ModalField& u0, const Eigen::MatrixXd& nu1,
                         const DecayOptions& opt)
{
    const auto& cfg = space.cfg;
    DecayReport rep;
    rep.delta = delta;
    rep.kappa = kappa(cfg, delta);
    rep.eps0 = epsilon0(cfg, delta);

    BoundaryData data;
    data.nu1 = nu1;
    SimOptions so;
    so.step.nonlinear = opt.nonlinear;
    const Trajectory tr = simulate(space, u0, data, so);

    const double dt = space.dt();
    const double u0sq = tr.norm2[0];
    // weighted control mass, trapezoid in time
    std::vector<double> nuw(tr.t.size(), 0.0);
    double nu_plain = 0;
    if (nu1.size() > 0) {
        for (std::size_t n = 1; n < tr.t.size(); ++n) {
            auto g = [&](std::size_t j) {
                return std::exp(rep.kappa * tr.t[j] / (1 + cfg.R)) * nu1.col(j).squaredNorm();
            };
            nuw[n] = nuw[n - 1] + 0.5 * dt * (g(n - 1) + g(n));
            nu_plain += 0.5 * dt * (nu1.col(n - 1).squaredNorm() + nu1.col(n).squaredNorm());
        }
    }
    rep.data_size_sq = u0sq + nu_plain;
    rep.admissible = rep.kappa > 0 && rep.data_size_sq <= rep.eps0 * rep.eps0;

    rep.min_margin = std::numeric_limits<double>::infinity();
    rep.bound_satisfied = true;
    for (std::size_t n = 0; n < tr.t.size(); ++n) {
        if (!opt.instants.empty()) {
            bool want = false;
            for (double s : opt.instants) want = want || std::abs(s - tr.t[n]) <= 0.5 * dt;
            if (!want) continue;
        }
        const double b = decay_bound(tr.t[n], cfg, rep.kappa, u0sq, nuw[n]);
        const double m = b - tr.norm2[n];
        rep.t.push_back(tr.t[n]);
        rep.norm2.push_back(tr.norm2[n]);
        rep.bound.push_back(b);
        rep.margin.push_back(m);
        if (m < -1e-8 * b) rep.bound_satisfied = false;
        rep.min_margin = std::min(rep.min_margin, b > 0 ? m / b : m);
    }
    return rep;
}

InterpolationRatios check_interpolation(const Space& s, const ModalField& phi, int sigma,
                                        const std::optional<ModalField>& phi_x)
{
    if (sigma != 0 && sigma != 1) fail(ErrorKind::InvalidInput, "sigma must be 0 or 1");
    if (phi.rows() != s.modes() || phi.cols() != s.nodes()) fail(ErrorKind::Shape, "field has wrong shape");
    const int N = s.grid.Nx;
    const double scale = std::max(phi.cwiseAbs().maxCoeff(), 1e-300);
    const bool x0 = phi.col(0).cwiseAbs().maxCoeff() <= 1e-12 * scale;
    const bool xR = phi.col(N).cwiseAbs().maxCoeff() <= 1e-12 * scale;
    if (!x0 && !xR) fail(ErrorKind::InvalidInput, "field must vanish at x = 0 or x = R");
    if (sigma == 0) {
        const Eigen::VectorXd e0 = s.sys.values({0.0}).col(0), eL = s.sys.values({s.cfg.L}).col(0);
        const double v0 = (e0.transpose() * phi).cwiseAbs().maxCoeff();
        const double vL = (eL.transpose() * phi).cwiseAbs().maxCoeff();
        if (v0 > 1e-10 * scale && vL > 1e-10 * scale)
            fail(ErrorKind::InvalidInput, "sigma = 0 needs the field to vanish at y = 0 or y = L");
    }

    ModalField dx(s.modes(), s.nodes());
    if (phi_x) {
        dx = *phi_x;
    } else {
        for (int k = 0; k < s.modes(); ++k) {
            dx(k, 0) = (-3 * phi(k, 0) + 4 * phi(k, 1) - phi(k, 2)) / (2 * s.h);
            dx(k, N) = (3 * phi(k, N) - 4 * phi(k, N - 1) + phi(k, N - 2)) / (2 * s.h);
            for (int i = 1; i < N; ++i) dx(k, i) = (phi(k, i + 1) - phi(k, i - 1)) / (2 * s.h);
        }
    }
    // fourth powers need a finer y rule than the product grid
    const Quadrature q = s.sys.product_quadrature(3.0);
    const Eigen::MatrixXd P = s.sys.values(q.nodes);
    const Eigen::MatrixXd U = P.transpose() * phi;
    double i2 = 0, i3 = 0, i4 = 0, ix = 0, iy = 0;
    for (int i = 0; i <= N; ++i) {
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double u = U(j, i);
            i3 += s.wx[i] * q.weights[j] * std::abs(u) * u * u;
            i4 += s.wx[i] * q.weights[j] * u * u * u * u;
        }
        for (int k = 0; k < s.modes(); ++k) {
            i2 += s.wx[i] * phi(k, i) * phi(k, i);
            ix += s.wx[i] * dx(k, i) * dx(k, i);
            iy += s.wx[i] * s.sys.lambda[k] * phi(k, i) * phi(k, i);
        }
    }
    InterpolationRatios r;
    const double L = s.cfg.L;
    const double rhs14 = 4 * std::sqrt(ix * iy) * i2 + 4.0 * sigma / L * std::sqrt(ix) * std::pow(i2, 1.5);
    const double rhs15 =
        2 * std::pow(ix * iy, 0.25) * i2 + 2.0 * sigma / std::sqrt(L) * std::pow(ix, 0.25) * std::pow(i2, 1.25);
    r.r14 = i4 == 0 ? 0.0 : i4 / rhs14;
    r.r15 = i3 == 0 ? 0.0 : i3 / rhs15;
    return r;
}

double check_steklov(const std::function<double(double)>& psi, const std::function<double(double)>& dpsi,
                     double L, Steklov variant, int nq)
{
    const Quadrature q = gauss_legendre(nq, 0.0, L);
    double scale = std::max(std::abs(psi(L)), 1e-300);
    for (double y : q.nodes) scale = std::max(scale, std::abs(psi(y)));
    if (std::abs(psi(0)) > 1e-12 * scale) fail(ErrorKind::InvalidInput, "psi must vanish at y = 0");
    if (variant == Steklov::Dirichlet && std::abs(psi(L)) > 1e-12 * scale)
        fail(ErrorKind::InvalidInput, "psi must vanish at y = L");
    double a = 0, b = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        const double v = psi(q.nodes[j]), d = dpsi(q.nodes[j]);
        a += q.weights[j] * v * v;
        b += q.weights[j] * d * d;
    }
    const double c = variant == Steklov::Dirichlet ? L * L / (pi * pi) : 4 * L * L / (pi * pi);
    if (a == 0) return 0.0;
    return a / (c * b);
}

}  // namespace zkrect
