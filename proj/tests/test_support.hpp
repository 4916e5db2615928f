#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "restartlab/mode_dynamics.hpp"

namespace testsupport {

// Test-side chi oracle: repeated 2x2 multiplication in extended precision,
// independent of the production recurrence.
inline std::vector<double> chi_by_matrix_power(const restartlab::Transition2x2& t, int k_max) {
    std::vector<double> out(static_cast<std::size_t>(k_max) + 1);
    out[0] = 1.0;
    const long double a = t.a11, b = t.a12, c = t.a21, d = t.a22;
    long double p11 = 1.0L, p12 = 0.0L, p21 = 0.0L, p22 = 1.0L;
    for (int k = 1; k <= k_max; ++k) {
        const long double n11 = p11 * a + p12 * c;
        const long double n12 = p11 * b + p12 * d;
        const long double n21 = p21 * a + p22 * c;
        const long double n22 = p21 * b + p22 * d;
        p11 = n11;
        p12 = n12;
        p21 = n21;
        p22 = n22;
        out[static_cast<std::size_t>(k)] = static_cast<double>(p11);
    }
    return out;
}

inline double capped_rel(double a, double b) {
    return std::fabs(a - b) / std::max(1.0, std::fabs(a));
}

// Distance in representable doubles (same sign assumed).
inline std::uint64_t ulp_distance(double a, double b) {
    if (a == b) return 0;
    if (std::signbit(a) != std::signbit(b)) return UINT64_MAX;
    const auto ia = std::bit_cast<std::uint64_t>(std::fabs(a));
    const auto ib = std::bit_cast<std::uint64_t>(std::fabs(b));
    return ia > ib ? ia - ib : ib - ia;
}

inline restartlab::Transition2x2 make_transition(restartlab::TransitionKind kind, double sigma,
                                                 double nu, double beta) {
    const restartlab::OuterHyperparams h(nu, beta);
    const restartlab::EffectiveProgress s = restartlab::EffectiveProgress::checked(sigma);
    return kind == restartlab::TransitionKind::HB ? restartlab::transition_hb(s, h)
                                                  : restartlab::transition_nag(s, h);
}

}  // namespace testsupport
