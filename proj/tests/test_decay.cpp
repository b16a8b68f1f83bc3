#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "check.hpp"
#include "fields.hpp"
#include "zkrect/decay.hpp"

using namespace zkrect;
using std::numbers::pi;

TEST_CASE("decay constants")
{
    ProblemConfig c;  // case a, pi x pi, b = 0
    CHECK(kappa(c, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(epsilon0(c, 0.5) == doctest::Approx(0.854815146358041615).epsilon(1e-14));
    c.b = 1.0;
    CHECK(kappa(c, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
    c.bc = BcCase::DirichletNeumann;
    c.b = 0.0;
    CHECK(kappa(c, 0.5) == doctest::Approx(1.625).epsilon(1e-14));
    c.bc = BcCase::NeumannNeumann;
    CHECK(kappa(c, 0.5) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("monotonicity in delta and b")
{
    for (BcCase bc : {BcCase::DirichletDirichlet, BcCase::NeumannNeumann, BcCase::DirichletNeumann, BcCase::Periodic}) {
        ProblemConfig c;
        c.bc = bc;
        c.R = 2.0;
        c.L = 3.0;
        double k = 1e300, e = 0;
        for (double d : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            CHECK(kappa(c, d) < k);
            CHECK(epsilon0(c, d) > e);
            k = kappa(c, d);
            e = epsilon0(c, d);
        }
        const double k0 = kappa(c, 0.5);
        c.b = 2.0;
        CHECK(kappa(c, 0.5) == doctest::Approx(k0 - 2.0));
    }
}

TEST_CASE("decay bound formula")
{
    ProblemConfig c;
    c.R = 2.0;
    CHECK(decay_bound(0.0, c, 1.0, 0.5, 0.25) == doctest::Approx(2.25));
    CHECK(decay_bound(3.0, c, 1.0, 0.5, 0.25) == doctest::Approx(2.25 * std::exp(-1.0)));
}

TEST_CASE("decay check on small data")
{
    ProblemConfig c;
    c.T = 1.0;
    Grid g;
    g.Nx = 32;
    g.n_modes = 6;
    g.dt = 0.02;
    Space s(c, g);
    std::mt19937 gen(4);
    const ModalField u0 = testutil::random_smooth(s, gen, 4, 0.3);
    const auto r = verify_decay(s, 0.5, u0, {});
    CHECK(r.admissible);
    CHECK(r.bound_satisfied);
    CHECK(r.min_margin > 0);
    CHECK(r.t.size() == 51);

    // an explicit control term enters the data size
    Eigen::MatrixXd nu1 = Eigen::MatrixXd::Constant(s.modes(), s.steps + 1, 0.1);
    const auto q = verify_decay(s, 0.5, u0, nu1, {false, {}});
    CHECK(q.data_size_sq == doctest::Approx(0.09 + 0.01 * s.modes()).epsilon(1e-10));

    const auto big = verify_decay(s, 0.5, u0 * 10, {}, {false, {}});
    CHECK_FALSE(big.admissible);
    CHECK(testutil::thrown_kind([&] { verify_decay(s, 1.0, u0, {}); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("interpolation ratios stay below one")
{
    ProblemConfig c;
    c.R = 2.0;
    c.L = 1.5;
    Grid g;
    g.Nx = 64;
    g.n_modes = 6;
    Space s(c, g);
    std::mt19937 gen(12);
    for (int k = 0; k < 20; ++k) {
        const ModalField phi = testutil::random_smooth(s, gen, 5, 1.0);
        const auto r = check_interpolation(s, phi, 0);
        CHECK(r.r14 < 1);
        CHECK(r.r15 < 1);
        CHECK(r.r14 > 0);
    }
    ModalField bad = s.zero();
    bad.setConstant(1.0);
    CHECK(testutil::thrown_kind([&] { check_interpolation(s, bad, 0); }) == ErrorKind::InvalidInput);
    CHECK(testutil::thrown_kind([&] { check_interpolation(s, bad, 2); }) == ErrorKind::InvalidInput);
}

TEST_CASE("Steklov ratios")
{
    const double L = 1.7;
    auto sn = [&](double w) { return [=](double y) { return std::sin(w * y); }; };
    auto cs = [&](double w) { return [=](double y) { return w * std::cos(w * y); }; };
    CHECK(check_steklov(sn(pi / L), cs(pi / L), L, Steklov::Dirichlet) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(check_steklov(sn(2 * pi / L), cs(2 * pi / L), L, Steklov::Dirichlet) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(check_steklov(sn(pi / (2 * L)), cs(pi / (2 * L)), L, Steklov::HalfDirichlet) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(check_steklov(sn(3 * pi / (2 * L)), cs(3 * pi / (2 * L)), L, Steklov::HalfDirichlet) ==
          doctest::Approx(1.0 / 9).epsilon(1e-12));
    auto one = [](double) { return 1.0; };
    CHECK(testutil::thrown_kind([&] { check_steklov(one, one, L, Steklov::HalfDirichlet); }) == ErrorKind::InvalidInput);
}
