#include "restartlab/validation.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "restartlab/restart_analysis.hpp"
#include "restartlab/trajectory_sim.hpp"

namespace restartlab {

namespace {

// Independent chi oracle: repeated 2x2 multiplication in extended precision.
std::vector<double> chi_by_matrix_power(const Transition2x2& t, int k_max) {
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

double capped_rel(double a, double b) {
    return std::fabs(a - b) / std::max(1.0, std::fabs(a));
}

bool matches_two_sig_figs(double value, double printed) {
    const double quantum = std::pow(10.0, std::floor(std::log10(std::fabs(printed))) - 1.0);
    return std::fabs(value - printed) <= 0.5 * quantum;
}

struct Grid {
    std::vector<double> sigmas, betas, nus;
};

Grid standard_grid() {
    Grid g;
    for (int i = 1; i <= 20; ++i) g.sigmas.push_back(0.05 * i);
    g.betas = {0.5, 0.7, 0.9, 0.95, 0.99};
    g.nus = {0.1, 0.5, 1.0, 1.5};
    return g;
}

CheckResult check_recurrence_vs_matrix_power(bool inject_fault) {
    const Grid g = standard_grid();
    constexpr int k_max = 200;
    double worst = 0.0;
    for (TransitionKind kind : {TransitionKind::HB, TransitionKind::NAG}) {
        for (double sigma : g.sigmas)
            for (double beta : g.betas)
                for (double nu : g.nus) {
                    const OuterHyperparams h(nu, beta);
                    const EffectiveProgress s = EffectiveProgress::checked(sigma);
                    const Transition2x2 t =
                        kind == TransitionKind::HB ? transition_hb(s, h) : transition_nag(s, h);
                    const RestartFactorSeries rec =
                        detail::restart_factor_series_impl(t, k_max, inject_fault);
                    const std::vector<double> pow_chis = chi_by_matrix_power(t, k_max);
                    for (int k = 0; k <= k_max; ++k)
                        worst = std::max(worst, capped_rel(rec.chis[static_cast<std::size_t>(k)],
                                                           pow_chis[static_cast<std::size_t>(k)]));
                }
    }
    return {"chi recurrence vs matrix power (K <= 200)", worst <= 1e-12, worst, ""};
}

CheckResult check_recurrence_vs_closed_form() {
    const Grid g = standard_grid();
    constexpr int k_max = 200;
    double worst = 0.0;
    long cells = 0;
    for (TransitionKind kind : {TransitionKind::HB, TransitionKind::NAG}) {
        for (double sigma : g.sigmas)
            for (double beta : g.betas)
                for (double nu : g.nus) {
                    const OuterHyperparams h(nu, beta);
                    const EffectiveProgress s = EffectiveProgress::checked(sigma);
                    const Transition2x2 t =
                        kind == TransitionKind::HB ? transition_hb(s, h) : transition_nag(s, h);
                    SpectralParams sp;
                    try {
                        sp = spectral_params(t);
                    } catch (const regime_error&) {
                        continue;
                    }
                    if (sp.regime != Regime::ComplexConjugate) continue;
                    ++cells;
                    const RestartFactorSeries rec = restart_factor_series(t, k_max);
                    for (int k = 0; k <= k_max; ++k)
                        worst = std::max(worst,
                                         capped_rel(rec.chis[static_cast<std::size_t>(k)],
                                                    restart_factor_closed_form(sp, k)));
                }
    }
    std::ostringstream detail;
    detail << cells << " complex-regime cells";
    return {"chi recurrence vs closed form (complex cells)", worst <= 1e-10, worst, detail.str()};
}

CheckResult check_regime_interval() {
    double worst = 0.0;
    bool pass = true;
    // Endpoints must classify as critically damped and zero the discriminant.
    for (double beta : {0.5, 0.9, 0.95, 0.99}) {
        for (double nu : {0.5, 1.0, 1.5}) {
            const OuterHyperparams h(nu, beta);
            const SigmaInterval iv = complex_regime_interval(h);
            for (double endpoint : {iv.lo, iv.hi}) {
                const Transition2x2 t =
                    transition_hb(EffectiveProgress::synthetic(endpoint), h);
                const double tr = t.trace();
                const double resid =
                    std::fabs(tr * tr - 4.0 * t.det()) / std::max(1.0, tr * tr);
                worst = std::max(worst, resid);
                pass = pass && spectral_params(t).regime == Regime::Critical;
            }
            // Interior / exterior classification at 1% offsets.
            const OuterHyperparams hh = h;
            auto regime_at = [&](double s) {
                return spectral_params(transition_hb(EffectiveProgress::synthetic(s), hh)).regime;
            };
            pass = pass && regime_at(iv.lo * 1.01) == Regime::ComplexConjugate;
            pass = pass && regime_at(iv.hi * 0.99) == Regime::ComplexConjugate;
            pass = pass && regime_at(iv.lo * 0.99) == Regime::RealDistinct;
            pass = pass && regime_at(iv.hi * 1.01) == Regime::RealDistinct;
        }
    }
    // Known printed endpoints at nu = 1.
    const SigmaInterval a = complex_regime_interval(OuterHyperparams(1.0, 0.9));
    const SigmaInterval b = complex_regime_interval(OuterHyperparams(1.0, 0.99));
    pass = pass && matches_two_sig_figs(a.lo, 0.026) && matches_two_sig_figs(a.hi, 38.0) &&
           matches_two_sig_figs(b.lo, 0.0025) && matches_two_sig_figs(b.hi, 398.0);
    return {"complex-regime interval endpoints", pass && worst <= 1e-10, worst, ""};
}

CheckResult check_full_vs_mode() {
    std::mt19937_64 rng(20250811);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst = 0.0;

    constexpr int n = 8;
    constexpr int rounds = 50;
    for (int steps : {4, 16}) {
        const double eta = steps == 16 ? 0.05 : 0.2;
        const InnerConfig inner(eta, steps);
        // Eigenvalues windowed so every mode keeps enough magnitude after 50
        // rounds for a per-coordinate relative comparison to be meaningful.
        const double sig_lo = 0.45, sig_hi = 0.65;
        const double lam_lo = -std::expm1(std::log1p(-sig_lo) / steps) / eta;
        const double lam_hi = -std::expm1(std::log1p(-sig_hi) / steps) / eta;

        Eigen::MatrixXd gauss(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gauss(i, j) = unit(rng);
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
        Eigen::MatrixXd v = qr.householderQ();

        std::vector<double> lambdas(n);
        std::uniform_real_distribution<double> lam(std::min(lam_lo, lam_hi),
                                                   std::max(lam_lo, lam_hi));
        Eigen::VectorXd diag(n);
        for (int i = 0; i < n; ++i) diag[i] = lambdas[static_cast<std::size_t>(i)] = lam(rng);

        QuadraticProblem problem;
        problem.hessian = v * diag.asDiagonal() * v.transpose();
        problem.hessian = 0.5 * (problem.hessian + problem.hessian.transpose().eval());
        problem.x0 = v * Eigen::VectorXd::Ones(n);  // eigencoordinates all start at 1
        problem.workers = 2;

        const Spectrum spectrum = Spectrum::derived(inner, lambdas);
        const OuterHyperparams h(1.0, 0.9);
        for (TransitionKind kind : {TransitionKind::HB, TransitionKind::NAG}) {
            for (const RestartSchedule& sched :
                 {RestartSchedule::none(), RestartSchedule::global(5)}) {
                const Trajectory full =
                    simulate_full_quadratic(problem, inner, h, kind, sched, rounds);
                const Trajectory modes = simulate_modes(spectrum, h, kind, sched, rounds);
                const TrajectoryRecord& fr = full.records.back();
                const TrajectoryRecord& mr = modes.records.back();
                Eigen::VectorXd xf(n), mf(n);
                for (int i = 0; i < n; ++i) {
                    xf[i] = fr.modes[static_cast<std::size_t>(i)].x;
                    mf[i] = fr.modes[static_cast<std::size_t>(i)].m;
                }
                const Eigen::VectorXd xe = v.transpose() * xf;
                const Eigen::VectorXd me = v.transpose() * mf;
                for (int i = 0; i < n; ++i) {
                    const ModeSample& ms = mr.modes[static_cast<std::size_t>(i)];
                    worst = std::max(worst, std::fabs(xe[i] - ms.x) / std::fabs(ms.x));
                    if (ms.m != 0.0)
                        worst = std::max(worst, std::fabs(me[i] - ms.m) / std::fabs(ms.m));
                    else
                        worst = std::max(worst, std::fabs(me[i]));
                }
            }
        }
    }
    return {"full-vector vs eigenmode simulation (50 rounds)", worst <= 1e-8, worst, ""};
}

CheckResult check_restart_block_composition() {
    double worst = 0.0;
    const OuterHyperparams h(1.0, 0.9);
    for (double sigma : {0.3, 0.6, 0.95}) {
        for (int period : {3, 5, 8, 13}) {
            const Spectrum spectrum = Spectrum::direct({sigma});
            const Transition2x2 t = transition_hb(EffectiveProgress::checked(sigma), h);
            const int cycles = 400 / period;
            const Trajectory traj = simulate_modes(spectrum, h, TransitionKind::HB,
                                                   RestartSchedule::global(period),
                                                   cycles * period);
            const double chi =
                restart_factor_series(t, period).chis[static_cast<std::size_t>(period)];
            for (int c = 1; c <= cycles; ++c) {
                const double expect = std::pow(chi, c);
                const double got =
                    traj.records[static_cast<std::size_t>(c * period)].modes[0].x;
                worst = std::max(worst,
                                 std::fabs(got - expect) / std::max(1e-30, std::fabs(expect)));
            }
        }
    }
    return {"restart-block composition x_{nK} = chi_K^n", worst <= 1e-10, worst, ""};
}

}  // namespace

std::vector<CheckResult> run_validation(const ValidationOptions& opts) {
    std::vector<CheckResult> results;
    results.push_back(check_recurrence_vs_matrix_power(opts.inject_chi_fault));
    results.push_back(check_recurrence_vs_closed_form());
    results.push_back(check_regime_interval());
    results.push_back(check_full_vs_mode());
    results.push_back(check_restart_block_composition());
    return results;
}

bool report_validation(std::ostream& os, const std::vector<CheckResult>& results) {
    bool all = true;
    for (const CheckResult& r : results) {
        os << (r.pass ? "PASS  " : "FAIL  ") << r.name << "  (max residual " << r.residual;
        if (!r.detail.empty()) os << "; " << r.detail;
        os << ")\n";
        all = all && r.pass;
    }
    os << (all ? "all checks passed\n" : "validation FAILED\n");
    return all;
}

}  // namespace restartlab
