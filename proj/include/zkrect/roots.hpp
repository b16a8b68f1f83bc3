#pragma once

#include <array>
#include <complex>
#include <vector>

namespace zkrect {

using cplx = std::complex<double>;

// Roots of z^3 + a z + p = 0 (Cardano, then Newton polish).
std::array<cplx, 3> cubic_roots(double a, cplx p);

// The two roots of r^3 + a r + i theta = 0 reached as eps -> 0+ from the
// right half plane roots of z^3 + a z + (eps + i theta) = 0.
// r1 has the larger real part; ties go to the larger imaginary part.
struct RootPair {
    cplx r1, r2;
    double a = 0.0;
    double theta = 0.0;
};

RootPair limit_root_pair(double theta, double a);

double selection_eps(double theta, double a);

struct BoundRow {
    double theta, a;
    double ratio_r1, ratio_r2, ratio_sep;
};

// Rows at the origin are skipped.
std::vector<BoundRow> bound_report(const std::vector<double>& theta_grid,
                                   const std::vector<double>& a_grid);

}  // namespace zkrect
