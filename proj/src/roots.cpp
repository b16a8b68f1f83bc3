#include "zkrect/roots.hpp"

#include <algorithm>
#include <cmath>

#include "zkrect/error.hpp"

namespace zkrect {

namespace {

cplx residual(double a, cplx p, cplx z) { return z * z * z + a * z + p; }

cplx polish(double a, cplx p, cplx z)
{
    for (int it = 0; it < 4; ++it) {
        const cplx f = residual(a, p, z);
        const cplx d = 3.0 * z * z + a;
        if (std::abs(d) < 1e-300) break;
        const cplx zn = z - f / d;
        if (std::abs(residual(a, p, zn)) >= std::abs(f)) break;
        z = zn;
    }
    return z;
}

}  // namespace

std::array<cplx, 3> cubic_roots(double a, cplx p)
{
    const cplx q2 = p / 2.0;
    const cplx disc = std::sqrt(q2 * q2 + cplx(a * a * a / 27.0));
    // pick the sign that avoids cancellation
    cplx s = -q2 + disc;
    cplx s2 = -q2 - disc;
    if (std::abs(s2) > std::abs(s)) s = s2;
    std::array<cplx, 3> z;
    if (std::abs(s) == 0.0) {
        z = {cplx(0), cplx(0), cplx(0)};
        return z;
    }
    const cplx c = std::pow(s, 1.0 / 3.0);
    const cplx w(-0.5, std::sqrt(3.0) / 2.0);
    cplx ck = c;
    for (int k = 0; k < 3; ++k) {
        z[k] = polish(a, p, ck - a / (3.0 * ck));
        ck *= w;
    }
    return z;
}

double selection_eps(double theta, double a)
{
    return 1e-6 * std::cbrt(1.0 + std::abs(theta) + std::pow(std::abs(a), 1.5));
}

RootPair limit_root_pair(double theta, double a)
{
    const double eps = selection_eps(theta, a);
    auto ze = cubic_roots(a, cplx(eps, theta));
    std::sort(ze.begin(), ze.end(), [](cplx u, cplx v) { return u.real() > v.real(); });
    if (ze[2].real() > 0.0)
        fail(ErrorKind::InternalConsistency, "limit_root_pair: three roots with positive real part");

    auto z0 = cubic_roots(a, cplx(0.0, theta));
    // match each tracked root to the nearest unused eps = 0 root
    std::array<bool, 3> used{false, false, false};
    cplx r[2];
    for (int j = 0; j < 2; ++j) {
        int best = -1;
        for (int k = 0; k < 3; ++k) {
            if (used[k]) continue;
            if (best < 0 || std::abs(z0[k] - ze[j]) < std::abs(z0[best] - ze[j])) best = k;
        }
        used[best] = true;
        r[j] = z0[best];
        // the limit of a right half plane root has Re >= 0
        if (r[j].real() < 0.0 && r[j].real() > -1e-12 * (1.0 + std::abs(r[j]))) r[j] = cplx(0.0, r[j].imag());
    }
    const double scale = 1.0 + std::abs(r[0]) + std::abs(r[1]);
    const double tie = 1e-12 * scale;
    bool swap = false;
    if (std::abs(r[0].real() - r[1].real()) <= tie)
        swap = r[1].imag() > r[0].imag();
    else
        swap = r[1].real() > r[0].real();
    if (swap) std::swap(r[0], r[1]);
    return {r[0], r[1], a, theta};
}

std::vector<BoundRow> bound_report(const std::vector<double>& theta_grid,
                                   const std::vector<double>& a_grid)
{
    std::vector<BoundRow> rows;
    for (double th : theta_grid)
        for (double a : a_grid) {
            const double s = std::cbrt(std::abs(th)) + std::sqrt(std::abs(a));
            if (s == 0.0) continue;
            auto rp = limit_root_pair(th, a);
            rows.push_back({th, a, std::abs(rp.r1) / s, std::abs(rp.r2) / s, std::abs(rp.r1 - rp.r2) / s});
        }
    return rows;
}

}  // namespace zkrect
