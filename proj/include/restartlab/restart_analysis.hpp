#pragma once

#include <vector>

#include "restartlab/mode_dynamics.hpp"

namespace restartlab {

// Default admissible restart-period range. 64 covers every first-cancellation
// period arising for beta <= 0.99, nu >= 0.1, sigma >= 0.05.
inline constexpr int kDefaultPeriodMin = 1;
inline constexpr int kDefaultPeriodMax = 64;

enum class ChiSource { Recurrence, ClosedForm };

/// chis[k] is the (1,1) entry of T^k: the factor mapping the residual across a
/// k-round cycle started with zero outer momentum.
struct RestartFactorSeries {
    std::vector<double> chis;
    ChiSource source;
    TransitionKind kind;
};

/// Three-term recurrence chi_k = trace*chi_{k-1} - det*chi_{k-2},
/// chi_0 = 1, chi_1 = a11. Valid in all regimes; this is the canonical
/// evaluation path everywhere (the closed form is a cross-check).
RestartFactorSeries restart_factor_series(const Transition2x2& t, int k_max);

/// rho^k * (cos(k*phi) + C*sin(k*phi)). Complex regime only.
double restart_factor_closed_form(const SpectralParams& sp, int k);

struct Rate {
    double per_round;
    bool unbounded;  // exact cancellation (|chi| < 1e-300), or beta = 0 envelope
};

/// Average per-round contraction rate of a k-round restart cycle,
/// -log|chi_k| / k.
Rate restart_rate(const Transition2x2& t, int k);

/// The sigma-independent heavy-ball envelope rate, -log(sqrt(beta)).
Rate envelope_rate(const OuterHyperparams& h);

/// True iff a k-period restart beats the non-restarted envelope:
/// |cos(k*phi) + C*sin(k*phi)| < 1. Complex regime only.
bool crossover(const Transition2x2& t, int k);

struct PeriodRecommendation {
    int k_star;
    std::vector<int> phase_estimates;  // nearest-integer cancellation periods, first three
    double objective;
    int k_min;
    int k_max;
};

/// Brute-force argmin of |chi_k| over the admissible integer range; ties break
/// toward smaller k. Phase estimates round((theta + pi/2 + l*pi)/phi) are
/// attached when the transition is in the complex regime.
PeriodRecommendation oracle_period(const Transition2x2& t, int k_min, int k_max);

/// Argmin over k of the weighted sum of squared restart factors across a
/// spectrum, sum_j w_j * chi_k(sigma_j)^2.
PeriodRecommendation blockwise_oracle_period(const Spectrum& spectrum, const OuterHyperparams& h,
                                             TransitionKind kind, int k_min, int k_max);

struct HeuristicPeriod {
    int period;
    bool unbounded;              // sigma_bar = 0: no cancellation exists
    bool outside_high_momentum;  // beta < 0.9: the expansion is a rough guide only
};

/// High-momentum first-cancellation estimate,
/// round(pi / (2*sqrt(nu*sigma_bar*(1-beta)))), clamped to >= 1.
HeuristicPeriod heuristic_period(const EffectiveProgress& mean_sigma, const OuterHyperparams& h);

namespace detail {
// Self-test hook: optionally flips the determinant sign inside the recurrence
// so the embedded validation suite can prove it detects seeded faults.
RestartFactorSeries restart_factor_series_impl(const Transition2x2& t, int k_max, bool flip_det_sign);
}  // namespace detail

}  // namespace restartlab
