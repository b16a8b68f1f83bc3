#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "check.hpp"
#include "fields.hpp"
#include "zkrect/control.hpp"

using namespace zkrect;
using std::numbers::pi;

namespace {

Space control_space(int Nx = 32, int modes = 4, double dt = 1e-2)
{
    ProblemConfig c;
    c.R = 3.0;
    c.T = 1.0;
    Grid g;
    g.Nx = Nx;
    g.n_modes = modes;
    g.dt = dt;
    return Space(c, g);
}

Control random_control(const Space& s, std::mt19937& gen)
{
    std::normal_distribution<double> N(0, 1);
    Control c(s.modes(), s.steps + 1);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = N(gen);
    return c;
}

}  // namespace

TEST_CASE("one-mode Gramian")
{
    const Space s = control_space(32, 1);
    const Controller c(s);
    const int n = 31;
    Eigen::MatrixXd S(n, n);
    for (int j = 0; j < n; ++j) {
        ModalField e = s.zero();
        e(0, j + 1) = 1.0;
        S.col(j) = c.apply_A(e).row(0).segment(1, n).transpose();
    }
    CHECK(S.trace() == doctest::Approx(5.345268604300848).epsilon(1e-9));
    CHECK(S(0, 0) == doctest::Approx(0.04607733764974251).epsilon(1e-9));
    CHECK(S(15, 16) == doctest::Approx(0.1667698148425747).epsilon(1e-9));
    const Eigen::MatrixXd Sym = 0.5 * (S + S.transpose());
    const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Sym).eigenvalues().maxCoeff();
    CHECK(top == doctest::Approx(0.9939965387500128).epsilon(1e-9));
    // in the trapezoid inner product the Gramian is self-adjoint
    const Eigen::MatrixXd Sh = S * s.h;
    CHECK((Sh - Sh.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("transpose identity and linearity")
{
    const Space s = control_space();
    const Controller c(s);
    std::mt19937 gen(1);
    for (int k = 0; k < 10; ++k) {
        const Control nu = random_control(s, gen);
        const ModalField phi = testutil::random_smooth(s, gen, 8, 1.0);
        const double a = c.state_inner(c.apply_P1T(nu), phi), b = c.control_inner(nu, c.apply_Lambda(phi));
        CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
    }
    const Control n1 = random_control(s, gen), n2 = random_control(s, gen);
    const ModalField lhs = c.apply_P1T(2 * n1 - 3 * n2), rhs = 2 * c.apply_P1T(n1) - 3 * c.apply_P1T(n2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("matrix response matches the simulated control problem")
{
    const Space s = control_space();
    const Controller c(s);
    std::mt19937 gen(2);
    const Control nu = random_control(s, gen);
    const ModalField a = c.apply_P1T(nu), b = c.apply_P1(nu).final_state;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12 * (1 + b.cwiseAbs().maxCoeff()));
}

TEST_CASE("zero data give a zero control")
{
    const Space s = control_space();
    const Controller c(s);
    CHECK(c.apply_A(s.zero()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.apply_P1T(Control::Zero(s.modes(), s.steps + 1)).cwiseAbs().maxCoeff() == 0.0);
    const auto r = c.linear_control(s.zero(), s.zero());
    CHECK(r.nu1.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.terminal_error == 0.0);
}

TEST_CASE("reaching the free evolution needs no control")
{
    const Space s = control_space();
    const Controller c(s);
    std::mt19937 gen(3);
    const ModalField u0 = testutil::random_smooth(s, gen, 4, 1.0);
    const ModalField uT = c.apply_P(u0).final_state;
    const auto r = c.linear_control(u0, uT);
    CHECK(std::sqrt(c.control_inner(r.nu1, r.nu1)) < 1e-12);
}

TEST_CASE("Gramian solve reaches reachable targets")
{
    const Space s = control_space(32, 2, 2e-2);
    ControlOptions o;
    o.tol_cg = 1e-6;
    const Controller c(s, o);
    std::mt19937 gen(4);
    const ModalField phi = testutil::random_smooth(s, gen, 3, 1.0);
    const ModalField w = c.apply_A(phi);
    const KrylovResult k = c.solve_gramian(w);
    CHECK(k.converged);
    CHECK(std::sqrt(s.norm2(c.apply_A(k.phi) - w) / s.norm2(w)) <= 1e-6);
    for (std::size_t i = 1; i < k.residuals.size(); ++i) CHECK(k.residuals[i] <= k.residuals[i - 1]);
}

TEST_CASE("forcing response is independent of its x-constant part")
{
    // d/dx f1 of an x-constant f1 vanishes
    const Space s = control_space();
    const Controller c(s);
    std::vector<ModalField> f1(s.steps + 1, ModalField::Constant(s.modes(), s.nodes(), 0.7));
    const auto tr = c.apply_P2(f1);
    CHECK(tr.final_state.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("nonlinear control refuses large data")
{
    const Space s = control_space();
    const Controller c(s);
    std::mt19937 gen(5);
    const ModalField u0 = testutil::random_smooth(s, gen, 4, 1.0);
    CHECK(testutil::thrown_kind([&] { c.nonlinear_control(u0, u0); }) == ErrorKind::DataTooLarge);
    CHECK(c.smallness_threshold() == doctest::Approx(1e-2 * std::pow(3.0, 1.25) * pi / 8 * std::sqrt(3.0) / 3));
}

TEST_CASE("critical lengths")
{
    ProblemConfig c;
    c.b = 1.0;
    c.bc = BcCase::NeumannNeumann;
    c.L = 1.0;
    c.R = 2 * pi;
    const auto list = critical_length_check(c, 2, 2);
    CHECK(list.size() == 4);
    CHECK(list[0].R_crit == doctest::Approx(2 * pi).epsilon(1e-15));
    CHECK(list[0].match);
    CHECK(list[1].R_crit == doctest::Approx(2 * pi * std::sqrt(7.0 / 3.0)).epsilon(1e-15));
    CHECK_FALSE(list[1].match);
    ProblemConfig a;  // b = 0, case a: every a_l is negative
    CHECK(critical_length_check(a, 20, 20).empty());
    CHECK(testutil::thrown_kind([&] { critical_length_check(a, 0, 1); }) == ErrorKind::InvalidParameter);
}
