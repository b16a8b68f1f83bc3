#include "zkrect/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/legendre.hpp>

#include "zkrect/error.hpp"

namespace zkrect {

using std::numbers::pi;

BcCase parse_case(std::string_view tag)
{
    if (tag == "a") return BcCase::DirichletDirichlet;
    if (tag == "b") return BcCase::NeumannNeumann;
    if (tag == "c") return BcCase::DirichletNeumann;
    if (tag == "d") return BcCase::Periodic;
    fail(ErrorKind::InvalidConfig, "unknown boundary case '" + std::string(tag) + "'");
}

char case_tag(BcCase c)
{
    switch (c) {
    case BcCase::DirichletDirichlet: return 'a';
    case BcCase::NeumannNeumann: return 'b';
    case BcCase::DirichletNeumann: return 'c';
    case BcCase::Periodic: return 'd';
    }
    return '?';
}

Quadrature gauss_legendre(int m, double lo, double hi)
{
    // boost returns the nonnegative zeros only
    auto zeros = boost::math::legendre_p_zeros<double>(m);
    std::vector<double> x;
    for (double z : zeros) {
        x.push_back(z);
        if (z != 0.0) x.push_back(-z);
    }
    std::sort(x.begin(), x.end());
    Quadrature q;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (double z : x) {
        const double dp = boost::math::legendre_p_prime(m, z);
        q.nodes.push_back(mid + half * z);
        q.weights.push_back(half * 2.0 / ((1.0 - z * z) * dp * dp));
    }
    return q;
}

Quadrature periodic_trapezoid(int m, double L)
{
    Quadrature q;
    for (int j = 0; j < m; ++j) {
        q.nodes.push_back(L * j / m);
        q.weights.push_back(L / m);
    }
    return q;
}

namespace {

// wavenumber of mode k and whether it is a cosine
struct ModeShape {
    double w;
    bool cosine;
    double amp;
};

ModeShape shape(BcCase bc, double L, int k)
{
    const double s = std::sqrt(2.0 / L);
    switch (bc) {
    case BcCase::DirichletDirichlet: return {(k + 1) * pi / L, false, s};
    case BcCase::NeumannNeumann:
        if (k == 0) return {0.0, true, 1.0 / std::sqrt(L)};
        return {k * pi / L, true, s};
    case BcCase::DirichletNeumann: return {(2 * k + 1) * pi / (2 * L), false, s};
    case BcCase::Periodic:
        if (k == 0) return {0.0, true, 1.0 / std::sqrt(L)};
        return {2 * pi * ((k + 1) / 2) / L, k % 2 == 1, s};
    }
    return {0, true, 0};
}

int quad_points(BcCase bc, int n)
{
    if (bc == BcCase::Periodic) return 4 * n;
    return 2 * n + 16;
}

}  // namespace

double EigenSystem::psi(int k, double y) const
{
    auto m = shape(bc, L, k);
    return m.cosine ? m.amp * std::cos(m.w * y) : m.amp * std::sin(m.w * y);
}

double EigenSystem::dpsi(int k, double y) const
{
    auto m = shape(bc, L, k);
    return m.cosine ? -m.amp * m.w * std::sin(m.w * y) : m.amp * m.w * std::cos(m.w * y);
}

double EigenSystem::d2psi(int k, double y) const { return -shape(bc, L, k).w * shape(bc, L, k).w * psi(k, y); }

Eigen::MatrixXd EigenSystem::values(const std::vector<double>& y) const
{
    Eigen::MatrixXd v(n_modes, y.size());
    for (int k = 0; k < n_modes; ++k)
        for (std::size_t j = 0; j < y.size(); ++j) v(k, j) = psi(k, y[j]);
    return v;
}

Eigen::MatrixXd EigenSystem::derivs(const std::vector<double>& y) const
{
    Eigen::MatrixXd v(n_modes, y.size());
    for (int k = 0; k < n_modes; ++k)
        for (std::size_t j = 0; j < y.size(); ++j) v(k, j) = dpsi(k, y[j]);
    return v;
}

Quadrature EigenSystem::product_quadrature(double factor) const
{
    const int m = static_cast<int>(std::ceil(factor * quad.size()));
    if (bc == BcCase::Periodic) return periodic_trapezoid(m, L);
    return gauss_legendre(m, 0.0, L);
}

EigenSystem eigen_system(BcCase bc, double L, int n_modes)
{
    if (!(L > 0.0) || n_modes < 1)
        fail(ErrorKind::InvalidConfig, "eigen_system needs L > 0 and n_modes >= 1");
    EigenSystem s;
    s.bc = bc;
    s.L = L;
    s.n_modes = n_modes;
    for (int k = 0; k < n_modes; ++k) {
        const double w = shape(bc, L, k).w;
        s.lambda.push_back(w * w);
    }
    const int m = quad_points(bc, n_modes);
    s.quad = bc == BcCase::Periodic ? periodic_trapezoid(m, L) : gauss_legendre(m, 0.0, L);
    s.table = s.values(s.quad.nodes);
    return s;
}

Eigen::VectorXd project(const Eigen::VectorXd& samples, const EigenSystem& sys)
{
    if (static_cast<std::size_t>(samples.size()) != sys.quad.size())
        fail(ErrorKind::Shape, "project: sample count does not match quadrature");
    Eigen::Map<const Eigen::VectorXd> w(sys.quad.weights.data(), sys.quad.size());
    return sys.table * samples.cwiseProduct(w);
}

Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs, const EigenSystem& sys,
                           const std::vector<double>& y)
{
    if (coeffs.size() > sys.n_modes) fail(ErrorKind::Shape, "synthesize: too many coefficients");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(y.size());
    for (Eigen::Index k = 0; k < coeffs.size(); ++k)
        for (std::size_t j = 0; j < y.size(); ++j) out[j] += coeffs[k] * sys.psi(k, y[j]);
    return out;
}

}  // namespace zkrect
