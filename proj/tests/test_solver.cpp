#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "check.hpp"
#include "fields.hpp"
#include "zkrect/solver.hpp"

using namespace zkrect;
using std::numbers::pi;

namespace {

Space small_space(BcCase bc = BcCase::DirichletDirichlet, double T = 0.5, double b = 0.0)
{
    ProblemConfig c;
    c.bc = bc;
    c.T = T;
    c.b = b;
    Grid g;
    g.Nx = 32;
    g.n_modes = 6;
    g.dt = 0.01;
    return Space(c, g);
}

double max_re_eig(double a, double R, int N)
{
    // u_t = -A u
    const Eigen::MatrixXd M = -build_mode_operator(a, R, N).A;
    return Eigen::EigenSolver<Eigen::MatrixXd>(M, false).eigenvalues().real().maxCoeff();
}

// One mode with a = 1, u = sin(2x - t) e^{x/2} + 0.3 x cos t.
double manufactured_l2(int N)
{
    using C = std::complex<double>;
    ProblemConfig c;
    c.R = 1.0;
    c.b = 2.0;
    c.T = 0.5;
    const double h = c.R / N;
    Grid g;
    g.Nx = N;
    g.n_modes = 1;
    g.dt = 0.5 / std::ceil(0.5 / (0.1 * h));
    Space s(c, g);
    const C z(0.5, 2.0);
    auto u = [&](double t, double x) { return std::sin(2 * x - t) * std::exp(x / 2) + 0.3 * x * std::cos(t); };
    auto dxu = [&](double t, double x) {
        return (z * std::exp(z * x - C(0, t))).imag() + 0.3 * std::cos(t);
    };
    auto rhs = [&](double t, double x) {
        const C e = std::exp(z * x - C(0, t));
        const double ut = (C(0, -1) * e).imag() - 0.3 * x * std::sin(t);
        return ut + dxu(t, x) + (z * z * z * e).imag();
    };
    BoundaryData d;
    d.mu0.resize(1, s.steps + 1);
    d.nu0.resize(1, s.steps + 1);
    d.nu1.resize(1, s.steps + 1);
    for (int n = 0; n <= s.steps; ++n) {
        const double t = n * s.dt();
        d.mu0(0, n) = u(t, 0);
        d.nu0(0, n) = u(t, c.R);
        d.nu1(0, n) = dxu(t, c.R);
        ModalField f(1, s.nodes());
        for (int i = 0; i < s.nodes(); ++i) f(0, i) = rhs(t, s.x[i]);
        d.f.push_back(f);
    }
    ModalField u0(1, s.nodes()), ex(1, s.nodes());
    for (int i = 0; i < s.nodes(); ++i) {
        u0(0, i) = u(0, s.x[i]);
        ex(0, i) = u(c.T, s.x[i]);
    }
    SimOptions so;
    so.step.nonlinear = false;
    const Trajectory tr = simulate(s, u0, d, so);
    return std::sqrt(s.norm2(tr.final_state - ex));
}

}  // namespace

TEST_CASE("operator stencils are exact on low degree polynomials")
{
    const double R = 2.0, a = 0.7;
    const int N = 16;
    const ModeOperator op = build_mode_operator(a, R, N);
    const double h = R / N;
    CHECK(op.n == N - 1);
    CHECK(op.col_nu1[N - 2] == doctest::Approx(1 / (h * h)));
    Eigen::VectorXd v(N + 1);
    for (int i = 0; i <= N; ++i) v[i] = std::pow(i * h, 2);
    const Eigen::VectorXd r = op.apply(v, 2 * R);
    for (int i = 1; i < N; ++i) CHECK(r[i - 1] == doctest::Approx(a * 2 * i * h).epsilon(1e-9));
    for (int i = 0; i <= N; ++i) v[i] = std::pow(i * h, 3);
    const Eigen::VectorXd q = op.apply(v, 3 * R * R);
    for (int i = 1; i < N - 1; ++i) CHECK(q[i - 1] == doctest::Approx(a * (3 * std::pow(i * h, 2) + h * h) + 6).epsilon(1e-9));
}

TEST_CASE("constant boundary control response")
{
    // nu1 = 1 on a zero state enters only the last interior row
    const ModeOperator op = build_mode_operator(-1.0, 1.0, 10);
    const Eigen::VectorXd r = op.apply(Eigen::VectorXd::Zero(11), 1.0);
    CHECK(r.head(8).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r[8] == doctest::Approx(100.0));
}

TEST_CASE("operator spectra")
{
    CHECK(max_re_eig(0.0, 1.0, 64) == doctest::Approx(-75.85970411302158).epsilon(1e-8));
    CHECK(max_re_eig(-1.0, 3.0, 64) == doctest::Approx(-3.005043858651561).epsilon(1e-8));
    CHECK(max_re_eig(1.0, 2.0, 32) == doctest::Approx(-7.918002837497394).epsilon(1e-8));
}

TEST_CASE("manufactured one-mode errors")
{
    const double ref[] = {1.7721455138e-03, 4.449996979e-04, 1.11344283e-04, 2.78436176e-05};
    int j = 0;
    for (int N : {16, 32, 64, 128}) CHECK(manufactured_l2(N) == doctest::Approx(ref[j++]).epsilon(1e-6));
}

TEST_CASE("trace formulas")
{
    const double h = 0.1;
    Eigen::VectorXd v(6);
    for (int i = 0; i < 6; ++i) v[i] = 2 * i * h + std::pow(i * h, 2);  // v' (0) = 2, v'' = 2
    CHECK(trace_x0(v, h) == doctest::Approx(2.0).epsilon(1e-12));
    Eigen::VectorXd w(6);
    for (int i = 0; i < 6; ++i) w[i] = 1 + 3 * i * h;
    CHECK(std::abs(left_defect(w, h)) < 1e-12 * 30);
}

TEST_CASE("exact discrete energy identity")
{
    for (bool nonlinear : {false, true}) {
        Space s = small_space(BcCase::NeumannNeumann, 0.5, 0.5);
        std::mt19937 gen(1);
        const ModalField u0 = testutil::random_smooth(s, gen, 5, 0.8);
        BoundaryData d;
        d.nu1 = Eigen::MatrixXd::Zero(s.modes(), s.steps + 1);
        for (int n = 0; n <= s.steps; ++n) {
            d.nu1(0, n) = 0.2 * std::sin(3 * n * s.dt());
            d.f.push_back(s.sample([&](double x, double y) { return 0.3 * std::cos(x + y) * n * s.dt(); }));
        }
        SimOptions so;
        so.step.nonlinear = nonlinear;
        so.step.tol_picard = 1e-13;
        const auto tr = simulate(s, u0, d, so);
        const auto r = energy_report(tr, Weight::One, s);
        CAPTURE(nonlinear);
        CHECK(r.max_rel_residual < 1e-10);
    }
}

TEST_CASE("homogeneous linear norm is non-increasing")
{
    Space s = small_space(BcCase::DirichletDirichlet, 1.0, 0.0);
    std::mt19937 gen(2);
    SimOptions so;
    so.step.nonlinear = false;
    const auto tr = simulate(s, testutil::random_smooth(s, gen, 6, 1.0), {}, so);
    for (std::size_t n = 1; n < tr.norm2.size(); ++n) CHECK(tr.norm2[n] <= tr.norm2[n - 1] * (1 + 1e-14));
}

TEST_CASE("modes decouple in the linear problem")
{
    Space s = small_space(BcCase::DirichletNeumann);
    ModalField u0 = s.zero();
    for (int i = 0; i < s.nodes(); ++i) u0(2, i) = std::sin(pi * s.x[i] / s.cfg.R);
    SimOptions so;
    so.step.nonlinear = false;
    const auto tr = simulate(s, u0, {}, so);
    ModalField rest = tr.final_state;
    rest.row(2).setZero();
    CHECK(rest.cwiseAbs().maxCoeff() == 0.0);
    CHECK(tr.final_state.row(2).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("regularized flux")
{
    CHECK(g_h(0.0, 0.3) == 0.0);
    CHECK(g_h(5.0, 0.1) == doctest::Approx(12.5).epsilon(1e-14));
    CHECK(g_h(-5.0, 0.1) == doctest::Approx(12.5).epsilon(1e-14));
    const double h = 0.25;
    double worst = 0;
    for (int k = -400; k <= 400; ++k) {
        const double u = 0.05 * k;
        worst = std::max(worst, std::abs(g_h_prime(u, h)));
        const double e = 1e-6;
        CHECK(g_h_prime(u, h) == doctest::Approx((g_h(u + e, h) - g_h(u - e, h)) / (2 * e)).epsilon(1e-6).scale(1));
    }
    CHECK(worst <= 2 / h + 1e-12);
    CHECK(testutil::thrown_kind([] { g_h(1.0, 0.0); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("regularized and plain runs coincide for small states")
{
    Space s = small_space();
    std::mt19937 gen(3);
    const ModalField u0 = testutil::random_smooth(s, gen, 4, 0.5);
    SimOptions a, b;
    b.step.reg_h = 0.05;
    const auto ta = simulate(s, u0, {}, a), tb = simulate(s, u0, {}, b);
    CHECK((ta.final_state - tb.final_state).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("step failures")
{
    Space s = small_space();
    std::mt19937 gen(4);
    ModalField u0 = testutil::random_smooth(s, gen, 4, 30.0);
    StepOptions opt;
    opt.max_iters = 1;
    CHECK(testutil::thrown_kind([&] { step(s, u0, 0.0, s.dt(), {}, opt); }) == ErrorKind::StepFailure);
    u0(1, 3) = std::nan("");
    CHECK(testutil::thrown_kind([&] { step(s, u0, 0.0, s.dt(), {}, {}); }) == ErrorKind::Divergence);
    BoundaryData d;
    d.nu1 = Eigen::MatrixXd::Zero(s.modes(), 3);
    CHECK(testutil::thrown_kind([&] { simulate(s, s.zero(), d); }) == ErrorKind::Shape);
    CHECK(stability_budget(s, 2.0) == doctest::Approx(0.25 * s.h));
}

TEST_CASE("energy report needs complete records")
{
    Space s = small_space();
    Trajectory tr;
    CHECK(testutil::thrown_kind([&] { energy_report(tr, Weight::One, s); }) == ErrorKind::IncompleteTrajectory);
    const auto full = simulate(s, s.zero(), {});
    CHECK(testutil::thrown_kind([&] { energy_report(full, Weight::OnePlusX, s); }) ==
          ErrorKind::IncompleteTrajectory);
}

TEST_CASE("configuration checks")
{
    ProblemConfig c;
    c.R = 0;
    CHECK(testutil::thrown_kind([&] { c.validate(); }) == ErrorKind::InvalidConfig);
    Grid g;
    g.Nx = 4;
    CHECK(testutil::thrown_kind([&] { g.validate(); }) == ErrorKind::InvalidGrid);
    CHECK(testutil::thrown_kind([] { build_mode_operator(0.0, 1.0, 6); }) == ErrorKind::InvalidGrid);
}
