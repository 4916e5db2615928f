#include "restartlab/mode_dynamics.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace restartlab {

InnerConfig::InnerConfig(double eta_, int steps_) : eta(eta_), steps(steps_) {
    if (!(std::isfinite(eta) && eta > 0.0))
        throw config_error("inner step size eta must be positive and finite");
    if (steps < 1)
        throw config_error("inner steps per round must be >= 1");
}

OuterHyperparams::OuterHyperparams(double nu_, double beta_) : nu(nu_), beta(beta_) {
    if (!(std::isfinite(nu) && nu > 0.0))
        throw config_error("outer learning rate nu must be positive and finite");
    if (!(std::isfinite(beta) && beta >= 0.0 && beta < 1.0))
        throw config_error("outer momentum beta must lie in [0, 1)");
}

EffectiveProgress EffectiveProgress::checked(double sigma) {
    if (!(std::isfinite(sigma) && sigma >= 0.0 && sigma <= 1.0))
        throw config_error("effective progress must lie in [0, 1]; got " + std::to_string(sigma));
    return {sigma, false};
}

EffectiveProgress EffectiveProgress::synthetic(double sigma) {
    if (!(std::isfinite(sigma) && sigma >= 0.0))
        throw config_error("synthetic effective progress must be finite and nonnegative");
    return {sigma, sigma > 1.0};
}

EffectiveProgress effective_sigma(const InnerConfig& inner, double lambda) {
    if (!(std::isfinite(lambda) && lambda >= 0.0))
        throw config_error("kernel eigenvalue must be nonnegative and finite");
    const double etalam = inner.eta * lambda;
    if (etalam > 1.0)
        throw config_error("eta * lambda = " + std::to_string(etalam) +
                           " exceeds 1: the inner loop is not a contraction on this mode");
    // 1 - (1 - eta*lambda)^S, via expm1/log1p so tiny eta*lambda keeps full
    // precision instead of cancelling against 1.
    const double sigma =
        (etalam == 1.0) ? 1.0
                        : -std::expm1(static_cast<double>(inner.steps) * std::log1p(-etalam));
    return EffectiveProgress::checked(sigma);
}

bool ModeState::finite() const { return std::isfinite(x) && std::isfinite(m); }

const char* to_string(TransitionKind kind) {
    return kind == TransitionKind::HB ? "hb" : "nag";
}

const char* to_string(Regime regime) {
    switch (regime) {
        case Regime::ComplexConjugate: return "complex_conjugate";
        case Regime::RealDistinct: return "real_distinct";
        case Regime::Critical: return "critical";
    }
    return "?";
}

double Transition2x2::det() const {
    // Kahan's compensated 2x2 determinant: a11*a22 - a12*a21 with the rounding
    // error of the second product folded back in.
    const double w = a12 * a21;
    const double err = std::fma(a12, a21, -w);
    const double main = std::fma(a11, a22, -w);
    return main - err;
}

Transition2x2 transition_hb(const EffectiveProgress& sigma, const OuterHyperparams& h) {
    const double s = sigma.value();
    return {1.0 - h.nu * (1.0 - h.beta) * s, -h.nu * h.beta, (1.0 - h.beta) * s, h.beta,
            TransitionKind::HB};
}

Transition2x2 transition_nag(const EffectiveProgress& sigma, const OuterHyperparams& h) {
    const double s = sigma.value();
    const double b2 = h.beta * h.beta;
    return {1.0 - h.nu * (1.0 - b2) * s, -h.nu * b2, (1.0 - h.beta) * s, h.beta,
            TransitionKind::NAG};
}

ModeState step(const ModeState& z, const Transition2x2& t) {
    return {t.a11 * z.x + t.a12 * z.m, t.a21 * z.x + t.a22 * z.m};
}

SpectralParams spectral_params(const Transition2x2& t) {
    const double tr = t.trace();
    const double d = t.det();
    if (d <= 0.0)
        throw overshoot_error("overshoot regime: det(T) = " + std::to_string(d) +
                              " is not positive, no rotational decomposition exists");
    const double disc = std::fma(tr, tr, -4.0 * d);
    const double tol = 1e-12 * std::max(1.0, tr * tr);

    SpectralParams sp;
    if (disc < -tol) {
        sp.regime = Regime::ComplexConjugate;
        sp.rho = std::sqrt(d);
        const double imag = std::sqrt(-disc);  // equals 2*rho*sin(phi)
        sp.phi = std::atan2(imag, tr);
        sp.projection_coeff = (t.a11 - t.a22) / imag;
        sp.theta = std::atan(sp.projection_coeff);
    } else if (disc > tol) {
        sp.regime = Regime::RealDistinct;
        const double s = std::sqrt(disc);
        const double q = 0.5 * (tr + std::copysign(s, tr));
        sp.eig1 = q;
        sp.eig2 = d / q;
    } else {
        sp.regime = Regime::Critical;
        sp.eig1 = sp.eig2 = 0.5 * tr;
    }
    return sp;
}

SigmaInterval complex_regime_interval(const OuterHyperparams& h) {
    if (h.beta == 0.0) return {1.0 / h.nu, 1.0 / h.nu, true};
    const double r = std::sqrt(h.beta);
    return {(1.0 - r) / (h.nu * (1.0 + r)), (1.0 + r) / (h.nu * (1.0 - r)), false};
}

namespace {

std::vector<SpectrumMode> make_modes(std::vector<EffectiveProgress> sigmas,
                                     std::vector<double> weights) {
    if (sigmas.empty()) throw config_error("spectrum needs at least one mode");
    if (weights.empty()) weights.assign(sigmas.size(), 1.0);
    if (weights.size() != sigmas.size())
        throw config_error("spectrum weights must match the number of modes");
    double sum = 0.0;
    for (double w : weights) {
        if (!(std::isfinite(w) && w >= 0.0))
            throw config_error("spectrum weights must be finite and nonnegative");
        sum += w;
    }
    if (!(sum > 0.0)) throw config_error("spectrum weights must not all be zero");
    std::vector<SpectrumMode> modes;
    modes.reserve(sigmas.size());
    for (std::size_t j = 0; j < sigmas.size(); ++j) modes.push_back({sigmas[j], weights[j]});
    return modes;
}

}  // namespace

Spectrum::Spectrum(std::vector<SpectrumMode> modes, SpectrumOrigin origin)
    : modes_(std::move(modes)), origin_(origin) {}

Spectrum Spectrum::direct(std::vector<double> sigmas, std::vector<double> weights) {
    std::vector<EffectiveProgress> progress;
    progress.reserve(sigmas.size());
    for (double s : sigmas) progress.push_back(EffectiveProgress::checked(s));
    return Spectrum(make_modes(std::move(progress), std::move(weights)), SpectrumOrigin::Direct);
}

Spectrum Spectrum::derived(const InnerConfig& inner, const std::vector<double>& lambdas,
                           std::vector<double> weights) {
    std::vector<EffectiveProgress> progress;
    progress.reserve(lambdas.size());
    for (double lambda : lambdas) progress.push_back(effective_sigma(inner, lambda));
    return Spectrum(make_modes(std::move(progress), std::move(weights)), SpectrumOrigin::Derived);
}

}  // namespace restartlab
