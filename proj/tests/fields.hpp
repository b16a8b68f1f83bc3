#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "zkrect/solver.hpp"

namespace testutil {

// Random sine series in x with decaying coefficients, scaled to the given norm.
inline zkrect::ModalField random_smooth(const zkrect::Space& s, std::mt19937& gen, int kmax, double norm)
{
    std::normal_distribution<double> N(0.0, 1.0);
    zkrect::ModalField u = s.zero();
    for (int l = 0; l < s.modes(); ++l)
        for (int k = 1; k <= kmax; ++k) {
            const double c = N(gen) / (k * k) / (1 + l);
            for (int i = 0; i < s.nodes(); ++i) u(l, i) += c * std::sin(k * std::numbers::pi * s.x[i] / s.cfg.R);
        }
    return u * (norm / std::sqrt(s.norm2(u)));
}

}  // namespace testutil
