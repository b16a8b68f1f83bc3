#include "zkrect/control.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "zkrect/decay.hpp"
#include "zkrect/error.hpp"

namespace zkrect {

std::vector<CriticalLength> critical_length_check(const ProblemConfig& cfg, int k_max, int m_max)
{
    if (k_max < 1 || m_max < 1) fail(ErrorKind::InvalidParameter, "k_max and m_max must be at least 1");
    int n = 8;
    EigenSystem sys = eigen_system(cfg.bc, cfg.L, n);
    while (sys.lambda.back() < cfg.b) {
        n *= 2;
        sys = eigen_system(cfg.bc, cfg.L, n);
    }
    std::vector<CriticalLength> out;
    for (int l = 0; l < n; ++l) {
        const double gap = cfg.b - sys.lambda[l];
        if (!(gap > 0.0)) continue;
        for (int k = 1; k <= k_max; ++k)
            for (int m = 1; m <= m_max; ++m) {
                const double Rc = 2 * std::numbers::pi * std::sqrt((k * k + k * m + m * m) / (3 * gap));
                const double d = std::abs(cfg.R - Rc);
                out.push_back({l + 1, k, m, Rc, d, d <= 1e-9});
            }
    }
    return out;
}

Controller::Controller(const Space& s, ControlOptions o) : space(s), opt(o), stepper_(s, s.dt())
{
    const int S = s.steps, n = s.grid.Nx - 1;
    const double dt = s.dt();
    for (int j = 0; j <= S; ++j) wt_.push_back((j == 0 || j == S) ? 0.5 * dt : dt);
    for (int k = 0; k < s.modes(); ++k) {
        const auto& op = stepper_.ops[k];
        const auto& lu = stepper_.lu[k];
        std::vector<Eigen::VectorXd> Q;
        Q.reserve(S);
        Q.push_back(lu.solve(-0.5 * dt * op.col_nu1));
        for (int m = 1; m < S; ++m) Q.push_back(lu.solve(stepper_.Mplus[k] * Q.back()));
        Eigen::MatrixXd Rk = Eigen::MatrixXd::Zero(n, S + 1);
        for (int j = 0; j <= S; ++j) {
            if (j <= S - 1) Rk.col(j) += Q[S - 1 - j];
            if (j >= 1) Rk.col(j) += Q[S - j];
        }
        response_.push_back(std::move(Rk));
    }
}

ModalField Controller::interior(const ModalField& u) const
{
    ModalField v = u;
    v.col(0).setZero();
    v.col(space.grid.Nx).setZero();
    return v;
}

double Controller::state_inner(const ModalField& a, const ModalField& b) const { return space.inner(a, b); }

double Controller::control_inner(const Control& a, const Control& b) const
{
    double s = 0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += wt_[j] * a.col(j).dot(b.col(j));
    return s;
}

Trajectory Controller::apply_P(const ModalField& u0, bool keep) const
{
    SimOptions so;
    so.step.nonlinear = false;
    so.keep_levels = keep;
    return simulate(space, interior(u0), {}, so);
}

Trajectory Controller::apply_P1(const Control& nu1, bool keep) const
{
    BoundaryData d;
    d.nu1 = nu1;
    SimOptions so;
    so.step.nonlinear = false;
    so.keep_levels = keep;
    return simulate(space, space.zero(), d, so);
}

ModalField Controller::apply_P1T(const Control& nu1) const
{
    if (nu1.rows() != space.modes() || nu1.cols() != space.steps + 1)
        fail(ErrorKind::Shape, "control has wrong shape");
    ModalField u = space.zero();
    const int n = space.grid.Nx - 1;
    for (int k = 0; k < space.modes(); ++k)
        u.row(k).segment(1, n) = (response_[k] * nu1.row(k).transpose()).transpose();
    return u;
}

Control Controller::apply_Lambda(const ModalField& phi0) const
{
    const int n = space.grid.Nx - 1;
    Control c(space.modes(), space.steps + 1);
    for (int k = 0; k < space.modes(); ++k) {
        const Eigen::VectorXd hp = space.h * phi0.row(k).segment(1, n).transpose();
        Eigen::VectorXd q = response_[k].transpose() * hp;
        for (int j = 0; j <= space.steps; ++j) q[j] /= wt_[j];
        c.row(k) = q.transpose();
    }
    return c;
}

Control Controller::apply_Lambda_pde(const ModalField& phi0) const
{
    const ModalField rev = interior(phi0).rowwise().reverse();
    const Trajectory tr = apply_P(rev);
    Control c(space.modes(), space.steps + 1);
    for (int j = 0; j <= space.steps; ++j) c.col(j) = -tr.mu1_level[space.steps - j];
    return c;
}

ModalField Controller::apply_A(const ModalField& phi) const { return apply_P1T(apply_Lambda(phi)); }

KrylovResult Controller::solve_gramian(const ModalField& w_in, const ModalField* start) const
{
    // conjugate residual iteration in the state inner product
    const ModalField w = interior(w_in);
    KrylovResult res;
    res.min_rayleigh = std::numeric_limits<double>::infinity();
    const double wn = std::sqrt(state_inner(w, w));
    res.phi = start ? interior(*start) : space.zero();
    if (wn == 0.0) {
        res.phi = space.zero();
        res.residuals.push_back(0.0);
        res.converged = true;
        return res;
    }
    ModalField r = w - apply_A(res.phi);
    double rel = std::sqrt(state_inner(r, r)) / wn;
    res.residuals.push_back(rel);
    if (rel <= opt.tol_cg) {
        res.converged = true;
        return res;
    }
    ModalField p = r, Ar = apply_A(r), Ap = Ar;
    double rAr = state_inner(r, Ar);
    for (int it = 1; it <= opt.max_cg; ++it) {
        const double ApAp = state_inner(Ap, Ap);
        const double pp = state_inner(p, p);
        if (pp > 0) res.min_rayleigh = std::min(res.min_rayleigh, state_inner(Ap, p) / pp);
        if (ApAp == 0.0 || rAr <= 0.0) break;
        const double alpha = rAr / ApAp;
        res.phi += alpha * p;
        r -= alpha * Ap;
        rel = std::sqrt(state_inner(r, r)) / wn;
        res.residuals.push_back(rel);
        if (rel <= opt.tol_cg) {
            res.converged = true;
            return res;
        }
        const int k = static_cast<int>(res.residuals.size()) - 1;
        if (k >= opt.plateau && rel > 0.99 * res.residuals[k - opt.plateau]) {
            std::ostringstream os;
            os << "Gramian solve stalled at relative residual " << rel << " after " << k
               << " iterations; smallest Rayleigh quotient " << res.min_rayleigh;
            fail(ErrorKind::NearUncontrollable, os.str());
        }
        Ar = apply_A(r);
        const double rAr_new = state_inner(r, Ar);
        const double beta = rAr_new / rAr;
        rAr = rAr_new;
        p = r + beta * p;
        Ap = Ar + beta * Ap;
    }
    return res;
}

Trajectory Controller::apply_P2(const std::vector<ModalField>& f1, bool keep) const
{
    BoundaryData d;
    d.f1 = f1;
    SimOptions so;
    so.step.nonlinear = false;
    so.keep_levels = keep;
    return simulate(space, space.zero(), d, so);
}

double Controller::smallness_threshold() const
{
    return opt.smallness >= 0 ? opt.smallness : 1e-2 * epsilon0(space.cfg, 0.5);
}

namespace {

double relative_error(const Space& s, const ModalField& reached, const ModalField& uT, const ModalField& u0)
{
    const double den = std::max({std::sqrt(s.norm2(uT)), std::sqrt(s.norm2(u0)), 1e-300});
    return std::sqrt(s.norm2(reached - uT)) / den;
}

}  // namespace

ControlResult Controller::linear_control(const ModalField& u0, const ModalField& uT) const
{
    ControlResult out;
    const Trajectory pu = apply_P(u0);
    const ModalField d = interior(uT) - pu.final_state;
    const KrylovResult kr = solve_gramian(d);
    out.cg_trace = kr.residuals;
    out.nu1 = apply_Lambda(kr.phi);

    BoundaryData data;
    data.nu1 = out.nu1;
    SimOptions so;
    so.step.nonlinear = false;
    out.reached = simulate(space, interior(u0), data, so).final_state;
    out.terminal_error = relative_error(space, out.reached, uT, u0);
    return out;
}

ControlResult Controller::nonlinear_control(const ModalField& u0_in, const ModalField& uT_in) const
{
    const ModalField u0 = interior(u0_in), uT = interior(uT_in);
    const double eps = smallness_threshold();
    if (std::sqrt(space.norm2(u0)) >= eps || std::sqrt(space.norm2(uT)) >= eps) {
        std::ostringstream os;
        os << "data above the smallness threshold " << eps;
        fail(ErrorKind::DataTooLarge, os.str());
    }
    const int S = space.steps;
    auto qnorm = [&](const std::vector<ModalField>& a) {
        double s = 0;
        for (int j = 0; j <= S; ++j) s += wt_[j] * space.norm2(a[j]);
        return std::sqrt(s);
    };

    const std::vector<ModalField> pu = apply_P(u0, true).levels;
    KrylovResult kr = solve_gramian(uT - pu[S]);
    Control nu = apply_Lambda(kr.phi);
    std::vector<ModalField> v = apply_P1(nu, true).levels;
    for (int j = 0; j <= S; ++j) v[j] += pu[j];

    ControlResult out;
    int rising = 0;
    bool converged = false;
    for (int it = 0; it < opt.max_theta; ++it) {
        std::vector<ModalField> f1(S + 1);
        for (int j = 0; j <= S; ++j) {
            const Eigen::MatrixXd U = space.to_physical(v[j]);
            f1[j] = space.to_modal(0.5 * U.cwiseProduct(U));
        }
        const std::vector<ModalField> z = apply_P2(f1, true).levels;
        kr = solve_gramian(uT - pu[S] + z[S], &kr.phi);
        nu = apply_Lambda(kr.phi);
        std::vector<ModalField> un = apply_P1(nu, true).levels;
        std::vector<ModalField> diff(S + 1);
        for (int j = 0; j <= S; ++j) {
            un[j] += pu[j] - z[j];
            diff[j] = un[j] - v[j];
        }
        const double nn = qnorm(un);
        const double dist = nn > 0 ? qnorm(diff) / nn : 0.0;
        if (!out.picard_trace.empty()) {
            const double prev = out.picard_trace.back();
            out.contraction.push_back(prev > 0 ? dist / prev : 0.0);
            rising = dist > prev ? rising + 1 : 0;
        }
        out.picard_trace.push_back(dist);
        v = std::move(un);
        if (dist < opt.tol_theta) {
            converged = true;
            break;
        }
        if (rising >= 5) fail(ErrorKind::DataTooLarge, "fixed-point iteration is not contracting");
    }
    if (!converged) fail(ErrorKind::DataTooLarge, "fixed-point iteration did not converge");
    out.cg_trace = kr.residuals;
    out.nu1 = nu;

    BoundaryData data;
    data.nu1 = nu;
    SimOptions so;
    so.keep_levels = true;
    const Trajectory re = simulate(space, u0, data, so);
    out.reached = re.final_state;
    out.terminal_error = relative_error(space, out.reached, uT, u0);
    std::vector<ModalField> gap(S + 1);
    for (int j = 0; j <= S; ++j) gap[j] = re.levels[j] - v[j];
    const double vn = qnorm(v);
    out.fixed_point_gap = vn > 0 ? qnorm(gap) / vn : 0.0;
    return out;
}

}  // namespace zkrect
