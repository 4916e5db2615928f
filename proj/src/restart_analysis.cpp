#include "restartlab/restart_analysis.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace restartlab {

namespace detail {

RestartFactorSeries restart_factor_series_impl(const Transition2x2& t, int k_max,
                                               bool flip_det_sign) {
    if (k_max < 0) throw config_error("k_max must be >= 0");
    std::vector<double> chis(static_cast<std::size_t>(k_max) + 1);
    // Extended-precision accumulation keeps the matrix-power equivalence tight
    // through K = 200 even at near-cancellation points.
    const long double tr = static_cast<long double>(t.a11) + t.a22;
    long double d = static_cast<long double>(t.a11) * t.a22 -
                    static_cast<long double>(t.a12) * t.a21;
    if (flip_det_sign) d = -d;
    chis[0] = 1.0;
    if (k_max >= 1) chis[1] = t.a11;
    long double prev2 = 1.0L;
    long double prev1 = t.a11;
    for (int k = 2; k <= k_max; ++k) {
        const long double cur = tr * prev1 - d * prev2;
        chis[static_cast<std::size_t>(k)] = static_cast<double>(cur);
        prev2 = prev1;
        prev1 = cur;
    }
    return {std::move(chis), ChiSource::Recurrence, t.kind};
}

}  // namespace detail

RestartFactorSeries restart_factor_series(const Transition2x2& t, int k_max) {
    return detail::restart_factor_series_impl(t, k_max, false);
}

double restart_factor_closed_form(const SpectralParams& sp, int k) {
    if (sp.regime != Regime::ComplexConjugate)
        throw regime_error(std::string("closed-form restart factor needs the complex regime; got ") +
                           to_string(sp.regime));
    if (k < 0) throw config_error("k must be >= 0");
    const long double kphi = static_cast<long double>(k) * sp.phi;
    const long double bracket =
        std::cos(kphi) + static_cast<long double>(sp.projection_coeff) * std::sin(kphi);
    return static_cast<double>(std::pow(static_cast<long double>(sp.rho), k) * bracket);
}

Rate restart_rate(const Transition2x2& t, int k) {
    if (k < 1) throw config_error("restart rate needs k >= 1");
    const double chi = restart_factor_series(t, k).chis[static_cast<std::size_t>(k)];
    const double mag = std::fabs(chi);
    if (mag < 1e-300) return {std::numeric_limits<double>::infinity(), true};
    return {-std::log(mag) / k, false};
}

Rate envelope_rate(const OuterHyperparams& h) {
    if (h.beta == 0.0) return {std::numeric_limits<double>::infinity(), true};
    return {-0.5 * std::log(h.beta), false};
}

bool crossover(const Transition2x2& t, int k) {
    if (k < 1) throw config_error("crossover needs k >= 1");
    const SpectralParams sp = spectral_params(t);
    if (sp.regime != Regime::ComplexConjugate)
        throw regime_error(std::string("crossover predicate needs the complex regime; got ") +
                           to_string(sp.regime));
    const long double kphi = static_cast<long double>(k) * sp.phi;
    const long double bracket =
        std::cos(kphi) + static_cast<long double>(sp.projection_coeff) * std::sin(kphi);
    return std::fabs(static_cast<double>(bracket)) < 1.0;
}

namespace {

std::vector<int> phase_estimates_for(const Transition2x2& t) {
    SpectralParams sp;
    try {
        sp = spectral_params(t);
    } catch (const regime_error&) {
        return {};
    }
    if (sp.regime != Regime::ComplexConjugate) return {};
    std::vector<int> out;
    constexpr double half_pi = 1.5707963267948966;
    constexpr double pi = 3.141592653589793;
    for (int l = 0; l < 3; ++l) {
        const double k = (sp.theta + half_pi + l * pi) / sp.phi;
        out.push_back(static_cast<int>(std::max(1LL, std::llround(k))));
    }
    return out;
}

}  // namespace

PeriodRecommendation oracle_period(const Transition2x2& t, int k_min, int k_max) {
    if (k_min < 1 || k_min > k_max)
        throw config_error("admissible period range needs 1 <= k_min <= k_max");
    const RestartFactorSeries series = restart_factor_series(t, k_max);
    int best = k_min;
    double best_val = std::fabs(series.chis[static_cast<std::size_t>(k_min)]);
    for (int k = k_min + 1; k <= k_max; ++k) {
        const double v = std::fabs(series.chis[static_cast<std::size_t>(k)]);
        if (v < best_val) {
            best = k;
            best_val = v;
        }
    }
    return {best, phase_estimates_for(t), best_val, k_min, k_max};
}

PeriodRecommendation blockwise_oracle_period(const Spectrum& spectrum, const OuterHyperparams& h,
                                             TransitionKind kind, int k_min, int k_max) {
    if (k_min < 1 || k_min > k_max)
        throw config_error("admissible period range needs 1 <= k_min <= k_max");
    if (spectrum.modes().empty()) throw config_error("blockwise oracle needs a nonempty spectrum");

    std::vector<RestartFactorSeries> series;
    series.reserve(spectrum.size());
    for (const SpectrumMode& mode : spectrum.modes()) {
        const Transition2x2 t = (kind == TransitionKind::HB) ? transition_hb(mode.sigma, h)
                                                             : transition_nag(mode.sigma, h);
        series.push_back(restart_factor_series(t, k_max));
    }

    int best = k_min;
    double best_val = std::numeric_limits<double>::infinity();
    for (int k = k_min; k <= k_max; ++k) {
        double obj = 0.0;
        for (std::size_t j = 0; j < series.size(); ++j) {
            const double chi = series[j].chis[static_cast<std::size_t>(k)];
            obj += spectrum.modes()[j].weight * chi * chi;
        }
        if (obj < best_val) {
            best = k;
            best_val = obj;
        }
    }

    // Phase estimates from the weighted-mean sigma's transition, when complex.
    double wsum = 0.0, ssum = 0.0;
    for (const SpectrumMode& mode : spectrum.modes()) {
        wsum += mode.weight;
        ssum += mode.weight * mode.sigma.value();
    }
    const Transition2x2 t_mean =
        (kind == TransitionKind::HB)
            ? transition_hb(EffectiveProgress::checked(ssum / wsum), h)
            : transition_nag(EffectiveProgress::checked(ssum / wsum), h);
    return {best, phase_estimates_for(t_mean), best_val, k_min, k_max};
}

HeuristicPeriod heuristic_period(const EffectiveProgress& mean_sigma, const OuterHyperparams& h) {
    const double s = mean_sigma.value();
    if (s == 0.0) return {std::numeric_limits<int>::max(), true, h.beta < 0.9};
    constexpr double pi = 3.141592653589793;
    const double k = pi / (2.0 * std::sqrt(h.nu * s * (1.0 - h.beta)));
    const long long rounded = std::llround(k);
    const int period = static_cast<int>(
        std::min<long long>(std::max<long long>(1, rounded), std::numeric_limits<int>::max()));
    return {period, false, h.beta < 0.9};
}

}  // namespace restartlab
