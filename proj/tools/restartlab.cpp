#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "restartlab/experiment_config.hpp"
#include "restartlab/format.hpp"
#include "restartlab/restart_analysis.hpp"
#include "restartlab/sweep_harness.hpp"
#include "restartlab/trajectory_sim.hpp"
#include "restartlab/validation.hpp"

namespace {

namespace fs = std::filesystem;
using namespace restartlab;

constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitRegimeInapplicable = 4;

struct GlobalOpts {
    std::string output;  // overrides the config's output path when set
    bool csv = false;
    bool quiet = false;
};

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open output file: " + path.string());
    out << contents;
}

// Reports go to stdout unless --quiet; --output mirrors them into a file.
void emit_report(const GlobalOpts& g, const std::string& text) {
    if (!g.output.empty()) write_file(g.output, text);
    if (!g.quiet) std::cout << text;
}

int run_simulate(const std::string& config_path, const GlobalOpts& g) {
    const SimulationSetup setup = load_experiment_config(config_path);

    const Trajectory traj = std::visit(
        overloaded{
            [&](const Spectrum& s) {
                return simulate_modes(s, setup.hyper, setup.kind, setup.schedule, setup.horizon,
                                      setup.x0);
            },
            [&](const std::vector<Block>& b) {
                return simulate_blocks(b, setup.hyper, setup.kind, setup.schedule, setup.horizon);
            },
            [&](const QuadraticProblem& q) {
                return simulate_full_quadratic(q, *setup.inner, setup.hyper, setup.kind,
                                               setup.schedule, setup.horizon);
            },
        },
        setup.model);

    const fs::path out_path = g.output.empty() ? fs::path(setup.output_path) : fs::path(g.output);
    {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw config_error("cannot open output file: " + out_path.string());
        traj.write_csv(out);
    }

    if (!g.quiet) {
        std::cout << "final_loss=" << format_full(traj.final_loss()) << "\n";
        std::cout << "rounds=" << traj.records.back().round << "\n";
        std::cout << "restarts=";
        for (std::size_t i = 0; i < traj.restart_rounds.size(); ++i)
            std::cout << (i ? "," : "") << traj.restart_rounds[i];
        std::cout << "\n";
        if (traj.diverged_at)
            std::cout << "diverged_at=" << *traj.diverged_at << "\n";
        std::cout << "output=" << out_path.string() << "\n";
    }
    return traj.diverged_at ? kExitDivergence : kExitOk;
}

int run_sweep_cmd(const std::string& config_path, const GlobalOpts& g) {
    const SweepRunSetup setup = load_sweep_config(config_path);
    const SweepResult result = run_sweep(setup.config);

    std::ostringstream csv;
    result.write_csv(csv);
    const fs::path out_path = g.output.empty() ? fs::path(setup.output_path) : fs::path(g.output);
    write_file(out_path, csv.str());

    if (!g.quiet) {
        std::cout << "cells=" << result.cells.size() << "\n";
        const double mid = 0.5 * (setup.config.clip_lo + setup.config.clip_hi);
        for (const RobustnessEntry& e : robustness_metric(result, mid))
            std::cout << "fraction_below_midpoint " << to_string(e.kind) << " " << e.schedule
                      << " = " << format_full(e.fraction) << "\n";
        std::cout << "deterministic=" << (result.deterministic ? "yes" : "no") << "\n";
        std::cout << "output=" << out_path.string() << "\n";
    }
    return kExitOk;
}

struct PeriodOpts {
    double sigma = -1.0;
    std::string spectrum_file;
    double nu = 0.0;
    double beta = 0.0;
    std::string kind_name = "hb";
    int kmin = kDefaultPeriodMin;
    int kmax = kDefaultPeriodMax;
    bool phase = true;
};

int run_period(const PeriodOpts& p, const GlobalOpts& g) {
    const OuterHyperparams h(p.nu, p.beta);
    const TransitionKind kind = parse_kind(p.kind_name);
    if (!p.spectrum_file.empty() && p.sigma >= 0.0)
        throw config_error("period takes --sigma or --spectrum-file, not both");

    if (!p.spectrum_file.empty()) {
        const Spectrum spectrum = load_spectrum_file(p.spectrum_file);
        const PeriodRecommendation rec =
            blockwise_oracle_period(spectrum, h, kind, p.kmin, p.kmax);
        std::ostringstream report;
        if (g.csv) {
            report << "k_star,objective\n"
                   << rec.k_star << ',' << format_full(rec.objective) << "\n";
        } else {
            report << "k_star      " << rec.k_star << "\n";
            report << "objective   " << format_full(rec.objective)
                   << "  (weighted sum of squared restart factors)\n";
        }
        emit_report(g, report.str());
        return kExitOk;
    }

    if (p.sigma < 0.0) throw config_error("period needs --sigma or --spectrum-file");
    if (p.sigma == 0.0)
        throw config_error("sigma = 0: no cancellation exists (the mode makes no progress)");
    const EffectiveProgress sigma = EffectiveProgress::checked(p.sigma);
    const Transition2x2 t =
        kind == TransitionKind::HB ? transition_hb(sigma, h) : transition_nag(sigma, h);
    const PeriodRecommendation rec = oracle_period(t, p.kmin, p.kmax);

    bool complex_regime = false;
    SpectralParams sp;
    try {
        sp = spectral_params(t);
        complex_regime = sp.regime == Regime::ComplexConjugate;
    } catch (const regime_error&) {
        complex_regime = false;
    }

    const Rate r_star = restart_rate(t, rec.k_star);
    std::ostringstream report;
    if (g.csv) {
        report << "k_star,k_phase_0,k_phase_1,k_phase_2,objective,r_k_star,r_inf,crossover\n";
        report << rec.k_star << ',';
        for (int l = 0; l < 3; ++l) {
            if (l < static_cast<int>(rec.phase_estimates.size()))
                report << rec.phase_estimates[static_cast<std::size_t>(l)];
            report << ',';
        }
        report << format_full(rec.objective) << ',' << format_full(r_star.per_round) << ',';
        if (complex_regime)
            report << format_full(-std::log(sp.rho)) << ','
                   << (crossover(t, rec.k_star) ? 1 : 0);
        else
            report << ',';
        report << "\n";
    } else {
        report << "k_star      " << rec.k_star << "  (argmin |chi_K| over [" << rec.k_min
               << ", " << rec.k_max << "])\n";
        report << "objective   " << format_full(rec.objective) << "\n";
        report << "r_k_star    " << format_full(r_star.per_round) << "\n";
        if (complex_regime) {
            report << "k_phase    ";
            for (int k : rec.phase_estimates) report << ' ' << k;
            report << "\n";
            report << "r_inf       " << format_full(-std::log(sp.rho)) << "\n";
            report << "crossover   " << (crossover(t, rec.k_star) ? "yes" : "no") << "\n";
        }
    }
    emit_report(g, report.str());
    if (!complex_regime && p.phase) {
        std::cerr << "error: transition is outside the complex regime; no phase estimates exist "
                     "(rerun with --no-phase to accept the brute-force period alone)\n";
        return kExitRegimeInapplicable;
    }
    return kExitOk;
}

int run_regime(double nu, double beta, const GlobalOpts& g) {
    if (!(beta > 0.0 && beta < 1.0))
        throw config_error("regime report needs 0 < beta < 1");
    const OuterHyperparams h(nu, beta);
    const SigmaInterval iv = complex_regime_interval(h);
    std::ostringstream report;
    if (g.csv) {
        report << "sigma_lo,sigma_hi,degenerate,unit_left_gap,covers_above_one\n";
        report << format_full(iv.lo) << ',' << format_full(iv.hi) << ','
               << (iv.degenerate ? 1 : 0) << ',' << format_full(std::min(iv.lo, 1.0)) << ','
               << (iv.hi > 1.0 ? 1 : 0) << "\n";
    } else {
        report << "complex regime: sigma in (" << format_full(iv.lo) << ", "
               << format_full(iv.hi) << ")\n";
        if (iv.degenerate) report << "degenerate (beta = 0): empty interval at 1/nu\n";
        report << "unit range covered: (" << format_full(std::min(iv.lo, 1.0))
               << ", 1]  (left gap " << format_full(std::min(iv.lo, 1.0)) << ")\n";
        report << "extends beyond sigma = 1: " << (iv.hi > 1.0 ? "yes" : "no") << "\n";
    }
    emit_report(g, report.str());
    return kExitOk;
}

int run_validate(bool inject_fault, const GlobalOpts& g) {
    const std::vector<CheckResult> results =
        run_validation(ValidationOptions{inject_fault});
    std::ostringstream report;
    const bool ok = report_validation(report, results);
    emit_report(g, report.str());
    return ok ? kExitOk : kExitValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"restartlab: two-phase outer-momentum restart laboratory"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--output", g.output, "override the configured output path");
    app.add_flag("--csv", g.csv, "machine-readable output (17 significant digits)");
    app.add_flag("--quiet", g.quiet, "suppress the stdout summary");

    std::string sim_config, sweep_config;
    auto* sim = app.add_subcommand("simulate", "run one experiment config, write a trajectory CSV");
    sim->add_option("config", sim_config, "experiment config (JSON)")->required();
    sim->fallthrough();

    auto* swp = app.add_subcommand("sweep", "run a hyperparameter grid, write a sweep CSV");
    swp->add_option("config", sweep_config, "sweep config (JSON)")->required();
    swp->fallthrough();

    PeriodOpts p;
    auto* per = app.add_subcommand("period", "restart-period recommendation for a mode or spectrum");
    per->add_option("--sigma", p.sigma, "effective progress of the mode, in (0, 1]");
    per->add_option("--spectrum-file", p.spectrum_file, "spectrum JSON for the blockwise oracle");
    per->add_option("--nu", p.nu, "outer learning rate")->required();
    per->add_option("--beta", p.beta, "outer momentum")->required();
    per->add_option("--kind", p.kind_name, "hb or nag (default hb)");
    per->add_option("--kmin", p.kmin, "smallest admissible period (default 1)");
    per->add_option("--kmax", p.kmax, "largest admissible period (default 64)");
    per->add_flag("--phase,!--no-phase", p.phase,
                  "request phase estimates (default on; exits 4 outside the complex regime)");
    per->fallthrough();

    double reg_nu = 0.0, reg_beta = 0.0;
    auto* reg = app.add_subcommand("regime", "complex-regime sigma interval for (nu, beta)");
    reg->add_option("--nu", reg_nu, "outer learning rate")->required();
    reg->add_option("--beta", reg_beta, "outer momentum")->required();
    reg->fallthrough();

    bool inject_fault = false;
    auto* val = app.add_subcommand("validate", "run the embedded oracle suite");
    val->add_flag("--inject-chi-fault", inject_fault)->group("");  // self-test hook, hidden
    val->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    try {
        if (*sim) return run_simulate(sim_config, g);
        if (*swp) return run_sweep_cmd(sweep_config, g);
        if (*per) return run_period(p, g);
        if (*reg) return run_regime(reg_nu, reg_beta, g);
        if (*val) return run_validate(inject_fault, g);
    } catch (const overshoot_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRegimeInapplicable;
    } catch (const regime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRegimeInapplicable;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitOk;
}
