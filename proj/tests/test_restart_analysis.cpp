#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "restartlab/restart_analysis.hpp"
#include "test_support.hpp"

using namespace restartlab;
using testsupport::capped_rel;
using testsupport::chi_by_matrix_power;
using testsupport::make_transition;

TEST_CASE("recurrence start values and hand-computed chi_2") {
    const Transition2x2 t = make_transition(TransitionKind::HB, 0.95, 1.0, 0.9);
    const RestartFactorSeries s = restart_factor_series(t, 2);
    CHECK(s.chis[0] == 1.0);
    CHECK(s.chis[1] == t.a11);
    CHECK(s.chis[1] == doctest::Approx(0.905).epsilon(1e-14));
    CHECK(s.chis[2] == doctest::Approx(1.805 * 0.905 - 0.9).epsilon(1e-13));
    CHECK(s.chis[2] == doctest::Approx(0.733525).epsilon(1e-12));
    CHECK(s.source == ChiSource::Recurrence);
}

TEST_CASE("recurrence equals the matrix-power oracle in every regime") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> sig(0.0, 1.0), nu(0.05, 1.5), beta(0.0, 0.999);
    for (int i = 0; i < 200; ++i) {
        const TransitionKind kind = (i % 2 == 0) ? TransitionKind::HB : TransitionKind::NAG;
        const Transition2x2 t = make_transition(kind, sig(rng), nu(rng), beta(rng));
        const RestartFactorSeries rec = restart_factor_series(t, 200);
        const std::vector<double> pow_chis = chi_by_matrix_power(t, 200);
        for (int k = 0; k <= 200; ++k)
            CHECK(capped_rel(rec.chis[k], pow_chis[k]) <= 1e-12);
    }
}

TEST_CASE("beta = 0 degenerates the recurrence to geometric decay") {
    const Transition2x2 t = make_transition(TransitionKind::HB, 0.6, 0.9, 0.0);
    const RestartFactorSeries s = restart_factor_series(t, 40);
    for (int k = 0; k <= 40; ++k)
        CHECK(s.chis[k] == doctest::Approx(std::pow(t.a11, k)).epsilon(1e-12));
}

TEST_CASE("closed form: k=0 gives 1, k=1 gives the top-left entry") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> sig(0.05, 1.0), nu(0.1, 1.5), beta(0.3, 0.999);
    int used = 0;
    while (used < 100) {
        const TransitionKind kind = (used % 2 == 0) ? TransitionKind::HB : TransitionKind::NAG;
        const Transition2x2 t = make_transition(kind, sig(rng), nu(rng), beta(rng));
        SpectralParams sp;
        try {
            sp = spectral_params(t);
        } catch (const regime_error&) {
            continue;
        }
        if (sp.regime != Regime::ComplexConjugate) continue;
        ++used;
        CHECK(restart_factor_closed_form(sp, 0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(restart_factor_closed_form(sp, 1) == doctest::Approx(t.a11).epsilon(1e-12));
    }
}

TEST_CASE("closed form matches the recurrence over the HB grid, K <= 200") {
    for (double sigma = 0.1; sigma <= 1.0 + 1e-12; sigma += 0.1) {
        for (double beta : {0.5, 0.7, 0.9, 0.99}) {
            for (double nu : {0.1, 0.5, 1.0, 1.5}) {
                const Transition2x2 t = make_transition(TransitionKind::HB, sigma, nu, beta);
                const SpectralParams sp = spectral_params(t);
                if (sp.regime != Regime::ComplexConjugate) continue;
                const RestartFactorSeries rec = restart_factor_series(t, 200);
                for (int k = 0; k <= 200; ++k)
                    CHECK(std::fabs(rec.chis[k] - restart_factor_closed_form(sp, k)) <=
                          1e-10 * std::max(1.0, std::fabs(rec.chis[k])));
            }
        }
    }
}

TEST_CASE("NAG closed form agrees with the NAG recurrence in its complex regime") {
    for (double sigma = 0.1; sigma <= 1.0 + 1e-12; sigma += 0.15) {
        for (double beta : {0.5, 0.8, 0.95}) {
            for (double nu : {0.3, 1.0, 1.5}) {
                const Transition2x2 t = make_transition(TransitionKind::NAG, sigma, nu, beta);
                if (t.det() <= 0.0) continue;
                const SpectralParams sp = spectral_params(t);
                if (sp.regime != Regime::ComplexConjugate) continue;
                CHECK(sp.rho == doctest::Approx(std::sqrt(t.det())).epsilon(1e-13));
                const RestartFactorSeries rec = restart_factor_series(t, 200);
                for (int k = 0; k <= 200; ++k)
                    CHECK(std::fabs(rec.chis[k] - restart_factor_closed_form(sp, k)) <=
                          1e-10 * std::max(1.0, std::fabs(rec.chis[k])));
            }
        }
    }
}

TEST_CASE("closed form rejects non-complex regimes") {
    const Transition2x2 t = make_transition(TransitionKind::HB, 0.01, 0.1, 0.5);
    const SpectralParams sp = spectral_params(t);
    REQUIRE(sp.regime == Regime::RealDistinct);
    CHECK_THROWS_AS(restart_factor_closed_form(sp, 3), regime_error);
}

TEST_CASE("restart rates: r_1 and the envelope") {
    const Transition2x2 t = make_transition(TransitionKind::HB, 0.95, 1.0, 0.9);
    const Rate r1 = restart_rate(t, 1);
    CHECK_FALSE(r1.unbounded);
    CHECK(r1.per_round == doctest::Approx(-std::log(0.905)).epsilon(1e-12));
    CHECK(r1.per_round == doctest::Approx(0.0998).epsilon(1e-3));

    CHECK(envelope_rate(OuterHyperparams(1.0, 0.9)).per_round ==
          doctest::Approx(0.052680).epsilon(1e-4));
    CHECK(envelope_rate(OuterHyperparams(1.0, std::exp(-2.0))).per_round ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(envelope_rate(OuterHyperparams(1.0, 1.0 - 1e-12)).per_round ==
          doctest::Approx(0.0).epsilon(1e-9));

    const Rate r0 = envelope_rate(OuterHyperparams(1.0, 0.0));
    CHECK(r0.unbounded);
    CHECK(std::isinf(r0.per_round));
}

TEST_CASE("exact cancellation is flagged as an unbounded rate") {
    // trace * a11 = det makes chi_2 exactly zero.
    const Transition2x2 t{0.5, -0.25, 1.0, 0.5, TransitionKind::HB};
    CHECK(restart_factor_series(t, 2).chis[2] == 0.0);
    const Rate r = restart_rate(t, 2);
    CHECK(r.unbounded);
    CHECK(std::isinf(r.per_round));
}

TEST_CASE("crossover at the reference point and its equivalent formulations") {
    const Transition2x2 t = make_transition(TransitionKind::HB, 0.95, 1.0, 0.9);
    CHECK(crossover(t, 1));  // |0.905| < sqrt(0.9) = 0.9487

    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> sig(0.05, 1.0), nu(0.1, 1.5), beta(0.3, 0.999);
    std::uniform_int_distribution<int> kd(1, 64);
    int used = 0;
    while (used < 500) {
        const TransitionKind kind = (used % 2 == 0) ? TransitionKind::HB : TransitionKind::NAG;
        const Transition2x2 tr = make_transition(kind, sig(rng), nu(rng), beta(rng));
        if (tr.det() <= 0.0) continue;
        const SpectralParams sp = spectral_params(tr);
        if (sp.regime != Regime::ComplexConjugate) continue;
        const int k = kd(rng);
        const double bracket =
            std::cos(k * sp.phi) + sp.projection_coeff * std::sin(k * sp.phi);
        if (std::fabs(std::fabs(bracket) - 1.0) < 1e-9) continue;  // boundary indeterminacy
        ++used;

        const bool via_bracket = std::fabs(bracket) < 1.0;
        const double chi = restart_factor_series(tr, k).chis[k];
        const bool via_chi = std::fabs(chi) < std::pow(std::sqrt(tr.det()), k);
        const Rate rk = restart_rate(tr, k);
        const bool via_rate = rk.unbounded || rk.per_round > -0.5 * std::log(tr.det());

        CHECK(crossover(tr, k) == via_bracket);
        CHECK(via_chi == via_bracket);
        CHECK(via_rate == via_bracket);
    }
}

TEST_CASE("crossover rejects non-complex regimes") {
    const Transition2x2 t = make_transition(TransitionKind::HB, 0.01, 0.1, 0.5);
    CHECK_THROWS_AS(crossover(t, 3), regime_error);
    const Transition2x2 over = make_transition(TransitionKind::NAG, 0.95, 1.2, 0.1);
    CHECK_THROWS_AS(crossover(over, 3), overshoot_error);
}

TEST_CASE("bracket amplitude never exceeds sqrt(1 + C^2); extrema defeat the crossover") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> sig(0.05, 1.0), nu(0.1, 1.5), beta(0.3, 0.999);
    int used = 0;
    while (used < 100) {
        const Transition2x2 t = make_transition(TransitionKind::HB, sig(rng), nu(rng), beta(rng));
        const SpectralParams sp = spectral_params(t);
        if (sp.regime != Regime::ComplexConjugate) continue;
        ++used;
        const double amp = std::sqrt(1.0 + sp.projection_coeff * sp.projection_coeff);
        int k_extremum = 1;
        double extremum = 0.0;
        for (int k = 0; k <= 200; ++k) {
            const double bracket =
                std::cos(k * sp.phi) + sp.projection_coeff * std::sin(k * sp.phi);
            CHECK(std::fabs(bracket) <= amp + 1e-12);
            if (k >= 1 && std::fabs(bracket) > extremum) {
                extremum = std::fabs(bracket);
                k_extremum = k;
            }
        }
        // where K*phi - theta lands near a multiple of pi the bracket is at its
        // amplitude >= 1, so that K cannot beat the envelope
        if (extremum > 1.0 + 1e-9) CHECK_FALSE(crossover(t, k_extremum));
    }
}

TEST_CASE("envelope-matching cycle: chi_k = rho^k makes r_k equal r_inf") {
    // triangular transition with both eigenvalues 0.5: chi_k = 0.5^k exactly
    const Transition2x2 t{0.5, 1.0, 0.0, 0.5, TransitionKind::HB};
    const RestartFactorSeries s = restart_factor_series(t, 17);
    for (int k : {1, 5, 17}) {
        CHECK(s.chis[k] == std::pow(0.5, k));
        const Rate r = restart_rate(t, k);
        CHECK(r.per_round == doctest::Approx(std::log(2.0)).epsilon(1e-14));
        CHECK(r.per_round == doctest::Approx(-0.5 * std::log(t.det())).epsilon(1e-14));
    }
}

TEST_CASE("oracle_period is a true argmin and ties break to smaller K") {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> sig(0.05, 1.0), nu(0.1, 1.5), beta(0.0, 0.999);
    for (int i = 0; i < 60; ++i) {
        const TransitionKind kind = (i % 2 == 0) ? TransitionKind::HB : TransitionKind::NAG;
        const Transition2x2 t = make_transition(kind, sig(rng), nu(rng), beta(rng));
        const PeriodRecommendation rec = oracle_period(t, 1, 64);
        const RestartFactorSeries s = restart_factor_series(t, 64);
        CHECK(rec.objective == std::fabs(s.chis[rec.k_star]));
        for (int k = 1; k <= 64; ++k) {
            const double v = std::fabs(s.chis[k]);
            CHECK(v >= rec.objective);
            if (k < rec.k_star) CHECK(v > rec.objective);  // ties break toward smaller K
        }
        CHECK(rec.k_min == 1);
        CHECK(rec.k_max == 64);
    }
}

TEST_CASE("oracle_period with beta = 0 picks k_max under monotone geometric decay") {
    const Transition2x2 t = make_transition(TransitionKind::HB, 0.6, 0.9, 0.0);
    REQUIRE(std::fabs(t.a11) < 1.0);
    const PeriodRecommendation rec = oracle_period(t, 1, 32);
    CHECK(rec.k_star == 32);
    CHECK(rec.phase_estimates.empty());
}

TEST_CASE("argmin of |chi_K| lands within 1 of a phase cancellation estimate") {
    const Transition2x2 t = make_transition(TransitionKind::HB, 0.95, 1.0, 0.9);
    const SpectralParams sp = spectral_params(t);
    const PeriodRecommendation rec = oracle_period(t, 1, 64);
    constexpr double half_pi = 1.5707963267948966;
    constexpr double pi = 3.141592653589793;
    bool near_some_estimate = false;
    for (int l = 0; l < 16; ++l) {
        const long est = std::lround((sp.theta + half_pi + l * pi) / sp.phi);
        if (std::labs(est - rec.k_star) <= 1) near_some_estimate = true;
    }
    CHECK(near_some_estimate);
    // reported estimates are the first three
    REQUIRE(rec.phase_estimates.size() == 3);
    CHECK(rec.phase_estimates[0] == 5);
}

TEST_CASE("first phase estimate is nonincreasing in sigma") {
    const OuterHyperparams h(1.0, 0.9);
    int prev = std::numeric_limits<int>::max();
    for (double sigma = 0.1; sigma <= 1.0 + 1e-12; sigma += 0.1) {
        const Transition2x2 t = transition_hb(EffectiveProgress::checked(sigma), h);
        const PeriodRecommendation rec = oracle_period(t, 1, 64);
        REQUIRE_FALSE(rec.phase_estimates.empty());
        CHECK(rec.phase_estimates[0] <= prev);
        prev = rec.phase_estimates[0];
    }
}

TEST_CASE("blockwise oracle: reduction, degenerate weights, exhaustive scan") {
    const OuterHyperparams h(1.0, 0.9);

    // single mode, weight 1: same argmin as the scalar oracle
    const Spectrum one = Spectrum::direct({0.7});
    const Transition2x2 t = transition_hb(EffectiveProgress::checked(0.7), h);
    CHECK(blockwise_oracle_period(one, h, TransitionKind::HB, 1, 64).k_star ==
          oracle_period(t, 1, 64).k_star);

    // zero-weight mode is ignored
    const Spectrum two = Spectrum::direct({0.7, 0.2}, {1.0, 0.0});
    CHECK(blockwise_oracle_period(two, h, TransitionKind::HB, 1, 64).k_star ==
          blockwise_oracle_period(one, h, TransitionKind::HB, 1, 64).k_star);

    // six-mode benchmark: objective at k_star beats every other K in range
    const Spectrum six = Spectrum::direct({0.95, 0.85, 0.75, 0.60, 0.45, 0.30});
    const PeriodRecommendation rec = blockwise_oracle_period(six, h, TransitionKind::HB, 1, 64);
    std::vector<RestartFactorSeries> series;
    for (const SpectrumMode& m : six.modes())
        series.push_back(restart_factor_series(transition_hb(m.sigma, h), 64));
    double at_star = 0.0;
    for (std::size_t j = 0; j < series.size(); ++j)
        at_star += six.modes()[j].weight * series[j].chis[rec.k_star] * series[j].chis[rec.k_star];
    CHECK(rec.objective == doctest::Approx(at_star).epsilon(1e-14));
    for (int k = 1; k <= 64; ++k) {
        double obj = 0.0;
        for (std::size_t j = 0; j < series.size(); ++j)
            obj += six.modes()[j].weight * series[j].chis[k] * series[j].chis[k];
        CHECK(obj >= rec.objective);
    }
}

TEST_CASE("heuristic_period formula values and scaling") {
    const OuterHyperparams h(1.0, 0.99);
    const HeuristicPeriod hp = heuristic_period(EffectiveProgress::checked(0.5), h);
    CHECK_FALSE(hp.unbounded);
    CHECK_FALSE(hp.outside_high_momentum);
    CHECK(hp.period == 22);

    // quadrupling sigma halves the raw estimate
    constexpr double pi = 3.141592653589793;
    const double raw1 = pi / (2.0 * std::sqrt(1.0 * 0.2 * 0.01));
    const double raw4 = pi / (2.0 * std::sqrt(1.0 * 0.8 * 0.01));
    CHECK(raw4 == doctest::Approx(0.5 * raw1).epsilon(1e-14));

    const HeuristicPeriod zero = heuristic_period(EffectiveProgress::checked(0.0), h);
    CHECK(zero.unbounded);

    const HeuristicPeriod low = heuristic_period(EffectiveProgress::checked(0.5),
                                                 OuterHyperparams(1.0, 0.5));
    CHECK(low.outside_high_momentum);
}

TEST_CASE("heuristic vs oracle at beta = 0.9 recorded, not asserted tightly") {
    const OuterHyperparams h(1.0, 0.9);
    const HeuristicPeriod hp = heuristic_period(EffectiveProgress::checked(0.95), h);
    const Transition2x2 t = transition_hb(EffectiveProgress::checked(0.95), h);
    const PeriodRecommendation rec = oracle_period(t, 1, 64);
    MESSAGE("heuristic period ", hp.period, " vs oracle argmin ", rec.k_star,
            " (approximation gap at moderate momentum)");
    CHECK(hp.period >= 1);
    CHECK(hp.period <= 64);
}

TEST_CASE("period range validation") {
    const Transition2x2 t = make_transition(TransitionKind::HB, 0.5, 1.0, 0.9);
    CHECK_THROWS_AS(oracle_period(t, 0, 10), config_error);
    CHECK_THROWS_AS(oracle_period(t, 5, 4), config_error);
    CHECK_THROWS_AS(restart_rate(t, 0), config_error);
    CHECK_THROWS_AS(restart_factor_series(t, -1), config_error);
}
