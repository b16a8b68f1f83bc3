#include "zkrect/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "zkrect/error.hpp"

namespace zkrect {

void ProblemConfig::validate() const
{
    if (!(R > 0.0)) fail(ErrorKind::InvalidConfig, "R must be positive");
    if (!(L > 0.0)) fail(ErrorKind::InvalidConfig, "L must be positive");
    if (!(T > 0.0)) fail(ErrorKind::InvalidConfig, "T must be positive");
    if (!std::isfinite(b)) fail(ErrorKind::InvalidConfig, "b must be finite");
}

void Grid::validate() const
{
    if (Nx < 8) fail(ErrorKind::InvalidGrid, "Nx must be at least 8");
    if (n_modes < 1) fail(ErrorKind::InvalidGrid, "n_modes must be at least 1");
    if (!(dt > 0.0)) fail(ErrorKind::InvalidGrid, "dt must be positive");
}

Space::Space(const ProblemConfig& c, const Grid& g) : cfg(c), grid(g)
{
    cfg.validate();
    grid.validate();
    sys = eigen_system(cfg.bc, cfg.L, grid.n_modes);
    h = cfg.R / grid.Nx;
    for (int i = 0; i <= grid.Nx; ++i) {
        x.push_back(i * h);
        wx.push_back((i == 0 || i == grid.Nx) ? 0.5 * h : h);
    }
    steps = std::max(1, static_cast<int>(std::llround(cfg.T / grid.dt)));
    yq = sys.product_quadrature(1.5);
    Py = sys.values(yq.nodes);
    wy = Eigen::Map<const Eigen::VectorXd>(yq.weights.data(), yq.size());
}

Eigen::MatrixXd Space::to_physical(const ModalField& c) const { return Py.transpose() * c; }

ModalField Space::to_modal(const Eigen::MatrixXd& u) const { return Py * (wy.asDiagonal() * u); }

double Space::norm2(const ModalField& c) const { return inner(c, c); }

double Space::inner(const ModalField& a, const ModalField& b) const
{
    double s = 0.0;
    for (int i = 0; i < nodes(); ++i) s += wx[i] * a.col(i).dot(b.col(i));
    return s;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd ModeOperator::apply(const Eigen::VectorXd& v, double nu1) const
{
    return A * v.segment(1, n) + col_mu * v[0] + col_nu * v[n + 1] + col_nu1 * nu1;
}

ModeOperator build_mode_operator(double a, double R, int Nx)
{
    if (Nx < 8) fail(ErrorKind::InvalidGrid, "Nx must be at least 8");
    ModeOperator op;
    op.a = a;
    op.h = R / Nx;
    op.n = Nx - 1;
    const int n = op.n, N = Nx;
    const double h = op.h, h3 = h * h * h;
    op.A = Eigen::MatrixXd::Zero(n, n);
    op.col_mu = Eigen::VectorXd::Zero(n);
    op.col_nu = Eigen::VectorXd::Zero(n);
    op.col_nu1 = Eigen::VectorXd::Zero(n);
    auto add = [&](int row, int node, double c) {
        if (node == 0)
            op.col_mu[row] += c;
        else if (node == N)
            op.col_nu[row] += c;
        else
            op.A(row, node - 1) += c;
    };
    for (int i = 1; i < N; ++i) {
        const int r = i - 1;
        if (i == 1) {
            add(r, 0, -1 / h3);
            add(r, 1, 3 / h3);
            add(r, 2, -3 / h3);
            add(r, 3, 1 / h3);
        } else if (i == N - 1) {
            // ghost node N+1 from the slope at x = R
            add(r, N - 3, -1 / (2 * h3));
            add(r, N - 2, 2 / (2 * h3));
            add(r, N - 1, 1 / (2 * h3));
            add(r, N, -2 / (2 * h3));
            op.col_nu1[r] += 1 / (h * h);
        } else {
            add(r, i - 2, -1 / (2 * h3));
            add(r, i - 1, 2 / (2 * h3));
            add(r, i + 1, -2 / (2 * h3));
            add(r, i + 2, 1 / (2 * h3));
        }
        add(r, i - 1, -a / (2 * h));
        add(r, i + 1, a / (2 * h));
    }
    return op;
}

ModeOperator build_mode_operator(int k, const Space& space)
{
    if (k < 0 || k >= space.modes()) fail(ErrorKind::InvalidParameter, "mode index out of range");
    return build_mode_operator(space.cfg.b - space.sys.lambda[k], space.cfg.R, space.grid.Nx);
}

double trace_x0(const Eigen::Ref<const Eigen::VectorXd>& v, double h)
{
    return (-4 * v[0] + 7 * v[1] - 4 * v[2] + v[3]) / (2 * h);
}

double left_defect(const Eigen::Ref<const Eigen::VectorXd>& v, double h)
{
    return (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / (2 * h);
}

// ---------------------------------------------------------------------------

namespace {

double eta(double s)
{
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * (3.0 - 2.0 * s);
}

void check_h(double h)
{
    if (!(h > 0.0 && h <= 1.0)) fail(ErrorKind::InvalidParameter, "g_h needs h in (0,1]");
}

}  // namespace

double g_h_prime(double u, double h)
{
    check_h(h);
    const double a = std::abs(u);
    const double s = u < 0 ? -1.0 : 1.0;
    return u * eta(2.0 - h * a) + 2.0 * s / h * eta(h * a - 1.0);
}

double g_h(double u, double h)
{
    check_h(h);
    const double a = std::abs(u);
    if (a <= 1.0 / h) return 0.5 * u * u;
    // the integrand is a quartic on [1/h, 2/h] and constant beyond
    const double lo = 1.0 / h, hi = std::min(a, 2.0 / h);
    static const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double val = 0.5 * lo * lo;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (int j = 0; j < 3; ++j) val += half * gw[j] * g_h_prime(mid + half * gx[j], h);
    if (a > 2.0 / h) val += 2.0 / h * (a - 2.0 / h);
    return val;
}

Eigen::MatrixXd nonlinear_term(const Space& space, const ModalField& u, double reg_h)
{
    const Eigen::MatrixXd U = space.to_physical(u);
    const int N = space.grid.Nx;
    const double h = space.h;
    Eigen::MatrixXd Np(U.rows(), N - 1);
    if (reg_h == 0.0) {
        for (int i = 1; i < N; ++i) {
            const auto up = U.col(i + 1).array(), um = U.col(i - 1).array(), uc = U.col(i).array();
            Np.col(i - 1) = ((up * up - um * um) + uc * (up - um)).matrix() / (6 * h);
        }
    } else {
        Eigen::MatrixXd G(U.rows(), U.cols()), Gp(U.rows(), U.cols());
        for (Eigen::Index j = 0; j < U.cols(); ++j)
            for (Eigen::Index q = 0; q < U.rows(); ++q) {
                G(q, j) = g_h(U(q, j), reg_h);
                Gp(q, j) = g_h_prime(U(q, j), reg_h);
            }
        for (int i = 1; i < N; ++i)
            Np.col(i - 1) = (2.0 / 3.0) * (G.col(i + 1) - G.col(i - 1)) / (2 * h) +
                            (1.0 / 3.0) * Gp.col(i).cwiseProduct(U.col(i + 1) - U.col(i - 1)) / (2 * h);
    }
    return space.Py * (space.wy.asDiagonal() * Np);
}

// ---------------------------------------------------------------------------

Stepper::Stepper(const Space& s, double dt_) : space(s), dt(dt_)
{
    for (int k = 0; k < s.modes(); ++k) {
        ops.push_back(build_mode_operator(k, s));
        const auto& A = ops.back().A;
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
        lu.emplace_back(I + 0.5 * dt * A);
        Mplus.push_back(I - 0.5 * dt * A);
    }
}

namespace {

Eigen::VectorXd flux_diff(const Eigen::Ref<const Eigen::VectorXd>& f1, double h)
{
    const Eigen::Index n = f1.size() - 2;
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 1; i <= n; ++i) {
        const double right = 0.5 * (f1[i] + f1[i + 1]), left = 0.5 * (f1[i - 1] + f1[i]);
        out[i - 1] = (right - left) / h;
    }
    return out;
}

}  // namespace

StepResult Stepper::step(const ModalField& u, const LevelData& d0, const LevelData& d1,
                         const StepOptions& opt) const
{
    const int M = space.modes(), N = space.grid.Nx, n = N - 1;
    Eigen::MatrixXd rhs(M, n);
    for (int k = 0; k < M; ++k) {
        const auto& op = ops[k];
        Eigen::VectorXd r = Mplus[k] * u.row(k).segment(1, n).transpose();
        for (const LevelData* d : {&d0, &d1})
            r -= 0.5 * dt * (op.col_mu * d->mu[k] + op.col_nu * d->nu[k] + op.col_nu1 * d->nu1[k]);
        for (const LevelData* d : {&d0, &d1}) {
            if (d->f) r += 0.5 * dt * d->f->row(k).segment(1, n).transpose();
            if (d->f1) r += 0.5 * dt * flux_diff(d->f1->row(k).transpose(), space.h);
        }
        rhs.row(k) = r.transpose();
    }

    auto solve = [&](const Eigen::MatrixXd& extra) {
        ModalField v(M, N + 1);
        for (int k = 0; k < M; ++k) {
            v(k, 0) = d1.mu[k];
            v(k, N) = d1.nu[k];
            v.row(k).segment(1, n) = lu[k].solve((rhs.row(k) - extra.row(k)).transpose()).transpose();
        }
        return v;
    };

    StepResult res;
    if (!opt.nonlinear) {
        res.u = solve(Eigen::MatrixXd::Zero(M, n));
    } else {
        ModalField v = solve(dt * nonlinear_term(space, u, opt.reg_h));
        bool ok = false;
        for (int it = 1; it <= opt.max_iters; ++it) {
            const ModalField m = 0.5 * (u + v);
            ModalField w = solve(dt * nonlinear_term(space, m, opt.reg_h));
            const double dist = std::sqrt(space.norm2(w - v));
            v = std::move(w);
            res.picard.push_back(dist);
            res.iterations = it;
            if (!std::isfinite(dist)) break;
            if (dist <= opt.tol_picard * std::sqrt(space.norm2(v))) {
                ok = true;
                break;
            }
        }
        res.u = std::move(v);
        if (!ok && res.u.allFinite()) {
            std::ostringstream os;
            os << "Picard iteration did not converge in " << opt.max_iters << " iterations; trace:";
            for (double d : res.picard) os << ' ' << d;
            fail(ErrorKind::StepFailure, os.str());
        }
    }
    if (!res.u.allFinite()) fail(ErrorKind::Divergence, "non-finite state after step");
    return res;
}

namespace {

LevelData level(const Space& s, const BoundaryData& d, int n)
{
    const int M = s.modes();
    auto col = [&](const Eigen::MatrixXd& m) -> Eigen::VectorXd {
        if (m.size() == 0) return Eigen::VectorXd::Zero(M);
        if (m.rows() != M || n >= m.cols()) fail(ErrorKind::Shape, "boundary data do not cover the time grid");
        return m.col(n);
    };
    LevelData ld{col(d.mu0), col(d.nu0), col(d.nu1)};
    if (!d.f.empty()) {
        if (n >= static_cast<int>(d.f.size())) fail(ErrorKind::Shape, "forcing does not cover the time grid");
        ld.f = &d.f[n];
    }
    if (!d.f1.empty()) {
        if (n >= static_cast<int>(d.f1.size())) fail(ErrorKind::Shape, "forcing does not cover the time grid");
        ld.f1 = &d.f1[n];
    }
    return ld;
}

}  // namespace

StepResult step(const Space& space, const ModalField& u, double t, double dt, const BoundaryData& data,
                const StepOptions& opt)
{
    if (!u.allFinite()) fail(ErrorKind::Divergence, "non-finite input state");
    const int n = static_cast<int>(std::llround(t / dt));
    Stepper st(space, dt);
    return st.step(u, level(space, data, n), level(space, data, n + 1), opt);
}

double stability_budget(const Space& space, double u_max)
{
    if (!(u_max > 0.0)) return std::numeric_limits<double>::infinity();
    return 0.5 * space.h / u_max;
}

// ---------------------------------------------------------------------------

namespace {

struct Weighted {
    double wnorm2, dissip, cubic, wfwork;
};

Weighted weighted_terms(const Space& s, const ModalField& c, const LevelData& d)
{
    const int N = s.grid.Nx, M = s.modes();
    Weighted w{0, 0, 0, 0};
    Eigen::MatrixXd ux(M, N + 1);
    for (int k = 0; k < M; ++k) {
        ux(k, 0) = trace_x0(c.row(k).transpose(), s.h);
        for (int i = 1; i < N; ++i) ux(k, i) = (c(k, i + 1) - c(k, i - 1)) / (2 * s.h);
        ux(k, N) = d.nu1[k];
    }
    const Eigen::MatrixXd U = s.to_physical(c);
    for (int i = 0; i <= N; ++i) {
        const double rho = 1.0 + s.x[i];
        for (int k = 0; k < M; ++k) {
            const double v = c(k, i);
            w.wnorm2 += s.wx[i] * rho * v * v;
            w.dissip += s.wx[i] * (3 * ux(k, i) * ux(k, i) + (s.sys.lambda[k] - s.cfg.b) * v * v);
            if (d.f) w.wfwork += s.wx[i] * rho * v * (*d.f)(k, i);
        }
        w.cubic += s.wx[i] * s.wy.dot(U.col(i).array().cube().matrix());
    }
    return w;
}

}  // namespace

Trajectory simulate(const Space& space, const ModalField& u0, const BoundaryData& data, const SimOptions& opt)
{
    const int M = space.modes(), N = space.grid.Nx, n = N - 1;
    if (u0.rows() != M || u0.cols() != N + 1) fail(ErrorKind::Shape, "initial state has wrong shape");
    const double dt = space.dt();
    Stepper st(space, dt);
    Trajectory tr;
    tr.weighted = opt.weighted_audit;

    ModalField u = u0;
    LevelData d0 = level(space, data, 0);
    u.col(0) = d0.mu;
    u.col(N) = d0.nu;

    std::vector<bool> taken(opt.snapshot_times.size(), false);
    auto record = [&](int lev, const ModalField& c, const LevelData& d) {
        const double t = lev * dt;
        tr.t.push_back(t);
        tr.norm2.push_back(space.norm2(c));
        Eigen::VectorXd tr0(M);
        for (int k = 0; k < M; ++k) tr0[k] = trace_x0(c.row(k).transpose(), space.h);
        tr.mu1_level.push_back(tr0);
        if (opt.weighted_audit) {
            auto w = weighted_terms(space, c, d);
            tr.wnorm2.push_back(w.wnorm2);
            tr.dissip.push_back(w.dissip);
            tr.cubic.push_back(w.cubic);
            tr.wfwork.push_back(w.wfwork);
        }
        for (std::size_t j = 0; j < opt.snapshot_times.size(); ++j)
            if (!taken[j] && std::abs(opt.snapshot_times[j] - t) <= 0.5 * dt) {
                taken[j] = true;
                tr.snapshots.emplace_back(t, c);
            }
        if (opt.keep_levels) tr.levels.push_back(c);
    };
    record(0, u, d0);

    for (int s = 0; s < space.steps; ++s) {
        LevelData d1 = level(space, data, s + 1);
        StepResult r = st.step(u, d0, d1, opt.step);
        tr.max_picard = std::max(tr.max_picard, r.iterations);

        const ModalField m = 0.5 * (u + r.u);
        Eigen::VectorXd mu1(M);
        double left = 0, right = 0, nsq = 0, fw = 0;
        for (int k = 0; k < M; ++k) {
            const Eigen::VectorXd row = m.row(k).transpose();
            mu1[k] = trace_x0(row, space.h);
            const double lf = left_defect(row, space.h);
            left += lf * lf;
            const double nb = 0.5 * (d0.nu1[k] + d1.nu1[k]);
            const double rr = row[N - 1] / space.h + nb;
            right += rr * rr;
            nsq += nb * nb;
            Eigen::VectorXd fb = Eigen::VectorXd::Zero(n);
            for (const LevelData* d : {&d0, &d1}) {
                if (d->f) fb += 0.5 * d->f->row(k).segment(1, n).transpose();
                if (d->f1) fb += 0.5 * flux_diff(d->f1->row(k).transpose(), space.h);
            }
            fw += space.h * row.segment(1, n).dot(fb);
        }
        tr.mu1.push_back(mu1);
        tr.mu1_sq.push_back(mu1.squaredNorm());
        tr.left_art.push_back(left);
        tr.right_art.push_back(right);
        tr.nu1_sq.push_back(nsq);
        tr.fwork.push_back(fw);

        u = std::move(r.u);
        d0 = d1;
        record(s + 1, u, d0);
    }
    tr.final_state = u;
    return tr;
}

EnergyReport energy_report(const Trajectory& tr, Weight rho, const Space& space)
{
    const std::size_t steps = tr.mu1_sq.size();
    if (tr.norm2.size() != steps + 1 || steps == 0)
        fail(ErrorKind::IncompleteTrajectory, "trajectory lacks per-step energy records");
    if (rho == Weight::OnePlusX && (!tr.weighted || tr.wnorm2.size() != steps + 1))
        fail(ErrorKind::IncompleteTrajectory, "trajectory lacks the weighted audit terms");
    const double dt = tr.t[1] - tr.t[0];
    EnergyReport rep;
    rep.rho = rho;
    double lhs_acc = 0, rhs_acc = 0, defect = 0, trace = 0, scale = 0;
    for (std::size_t n = 0; n <= steps; ++n) {
        if (n > 0) {
            const std::size_t s = n - 1;
            trace += dt * tr.mu1_sq[s];
            if (rho == Weight::One) {
                lhs_acc += dt * (tr.mu1_sq[s] - tr.left_art[s] + tr.right_art[s]);
                rhs_acc += dt * (tr.nu1_sq[s] + 2 * tr.fwork[s]);
                defect += dt * (tr.left_art[s] + tr.right_art[s]);
            } else {
                lhs_acc += dt * tr.mu1_sq[s] + 0.5 * dt * (tr.dissip[s] + tr.dissip[n]);
                rhs_acc += (1 + space.cfg.R) * dt * tr.nu1_sq[s] +
                           (2.0 / 3.0) * 0.5 * dt * (tr.cubic[s] + tr.cubic[n]) +
                           dt * (tr.wfwork[s] + tr.wfwork[n]);
            }
        }
        const double e = rho == Weight::One ? tr.norm2[n] : tr.wnorm2[n];
        const double e0 = rho == Weight::One ? tr.norm2[0] : tr.wnorm2[0];
        rep.t.push_back(tr.t[n]);
        rep.lhs.push_back(e + lhs_acc);
        rep.rhs.push_back(e0 + rhs_acc);
        rep.residual.push_back(rep.lhs.back() - rep.rhs.back());
        scale = std::max({scale, e, std::abs(rhs_acc)});
    }
    rep.scale = scale > 0 ? scale : 1.0;
    for (double r : rep.residual) rep.max_rel_residual = std::max(rep.max_rel_residual, std::abs(r) / rep.scale);
    rep.boundary_defect = defect;
    rep.trace_sq = trace;
    return rep;
}

}  // namespace zkrect
