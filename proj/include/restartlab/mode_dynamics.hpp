#pragma once

#include <cstddef>
#include <vector>

#include "restartlab/errors.hpp"

namespace restartlab {

// Inner phase: S plain gradient-descent steps with step size eta between
// consecutive communication rounds.
struct InnerConfig {
    double eta;
    int steps;

    InnerConfig(double eta_, int steps_);
};

// Outer-optimizer hyperparameters shared by the heavy-ball and Nesterov
// variants: learning rate nu and momentum coefficient beta.
struct OuterHyperparams {
    double nu;
    double beta;

    OuterHyperparams(double nu_, double beta_);
};

/// Fraction of a residual mode removed by one inner phase,
/// sigma = 1 - (1 - eta*lambda)^S.
///
/// Values above 1 never arise from a valid (eta, lambda, S) triple; they are
/// admitted only through the synthetic constructor for regime-boundary
/// exploration and are rejected by every simulation path.
class EffectiveProgress {
public:
    static EffectiveProgress checked(double sigma);
    static EffectiveProgress synthetic(double sigma);

    double value() const { return sigma_; }
    bool is_synthetic() const { return synthetic_; }

private:
    EffectiveProgress(double sigma, bool synthetic)
        : sigma_(sigma), synthetic_(synthetic) {}

    double sigma_;
    bool synthetic_;
};

/// sigma = 1 - (1 - eta*lambda)^S for one kernel eigenvalue.
/// Rejects lambda < 0 and eta*lambda > 1 (inner loop not a contraction).
EffectiveProgress effective_sigma(const InnerConfig& inner, double lambda);

// One residual eigencoordinate paired with its outer momentum buffer.
struct ModeState {
    double x;
    double m;

    bool finite() const;
};

enum class TransitionKind { HB, NAG };

const char* to_string(TransitionKind kind);

// One outer communication round as a linear map on (x, m).
struct Transition2x2 {
    double a11, a12, a21, a22;
    TransitionKind kind;

    double trace() const { return a11 + a22; }
    double det() const;  // compensated 2x2 determinant
};

Transition2x2 transition_hb(const EffectiveProgress& sigma, const OuterHyperparams& h);
Transition2x2 transition_nag(const EffectiveProgress& sigma, const OuterHyperparams& h);

/// z' = T z. Exactly one matrix-vector product; callers detect divergence via
/// ModeState::finite().
ModeState step(const ModeState& z, const Transition2x2& t);

enum class Regime { ComplexConjugate, RealDistinct, Critical };

const char* to_string(Regime regime);

/// Eigenstructure of an outer transition.
///
/// Complex-conjugate regime: eigenvalues rho * exp(+-i phi) with phi in
/// (0, pi), plus the projection coefficient C and its angle theta = atan(C)
/// used by the closed-form restart factor. Real/critical regimes carry the
/// (ordered-by-magnitude) real eigenvalues instead.
struct SpectralParams {
    Regime regime;
    double rho = 0.0;
    double phi = 0.0;
    double projection_coeff = 0.0;
    double theta = 0.0;
    double eig1 = 0.0;
    double eig2 = 0.0;
};

/// Classifies the regime with tol_disc = 1e-12 * max(1, trace^2) and fills the
/// regime-specific fields. Throws overshoot_error when det(t) <= 0.
SpectralParams spectral_params(const Transition2x2& t);

struct SigmaInterval {
    double lo;
    double hi;
    bool degenerate;  // beta = 0: interval collapses to {1/nu}
};

/// The open sigma-interval on which T_HB(sigma) has complex-conjugate
/// eigenvalues: ((1-sqrt(b))/(nu(1+sqrt(b))), (1+sqrt(b))/(nu(1-sqrt(b)))).
SigmaInterval complex_regime_interval(const OuterHyperparams& h);

// ---------------------------------------------------------------------------
// Spectra: weighted collections of effective-progress values.
// ---------------------------------------------------------------------------

enum class SpectrumOrigin { Direct, Derived };

struct SpectrumMode {
    EffectiveProgress sigma;
    double weight;
};

class Spectrum {
public:
    /// Sigmas given directly. Weights default to 1 per mode.
    static Spectrum direct(std::vector<double> sigmas, std::vector<double> weights = {});

    /// Sigmas derived from kernel eigenvalues via the inner-phase contraction.
    static Spectrum derived(const InnerConfig& inner, const std::vector<double>& lambdas,
                            std::vector<double> weights = {});

    const std::vector<SpectrumMode>& modes() const { return modes_; }
    SpectrumOrigin origin() const { return origin_; }
    std::size_t size() const { return modes_.size(); }

private:
    Spectrum(std::vector<SpectrumMode> modes, SpectrumOrigin origin);

    std::vector<SpectrumMode> modes_;
    SpectrumOrigin origin_;
};

}  // namespace restartlab
