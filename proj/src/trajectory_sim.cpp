#include "restartlab/trajectory_sim.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <ostream>
#include <string>
#include <utility>

#include "restartlab/format.hpp"

namespace restartlab {

RestartSchedule RestartSchedule::none() { return RestartSchedule(Variant{NoRestart{}}); }

RestartSchedule RestartSchedule::global(int period) {
    if (period < 1) throw config_error("restart period must be >= 1");
    return RestartSchedule(Variant{GlobalRestart{period}});
}

RestartSchedule RestartSchedule::per_mode(std::vector<int> periods) {
    if (periods.empty()) throw config_error("per-mode schedule needs at least one period");
    for (int p : periods)
        if (p < 1) throw config_error("restart period must be >= 1");
    return RestartSchedule(Variant{PerModeRestart{std::move(periods)}});
}

RestartSchedule RestartSchedule::blockwise(std::vector<int> periods) {
    if (periods.empty()) throw config_error("blockwise schedule needs at least one period");
    for (int p : periods)
        if (p < 1) throw config_error("restart period must be >= 1");
    return RestartSchedule(Variant{BlockwiseRestart{std::move(periods)}});
}

RestartSchedule RestartSchedule::soft(int period, double retain_alpha, double inject_beta) {
    if (period < 1) throw config_error("restart period must be >= 1");
    if (!(std::isfinite(retain_alpha) && std::isfinite(inject_beta)))
        throw config_error("soft restart coefficients must be finite");
    return RestartSchedule(Variant{SoftRestart{period, retain_alpha, inject_beta}});
}

void Trajectory::write_csv(std::ostream& os) const {
    os << "round,mode_or_dim,x,m,loss,restarted\n";
    for (const TrajectoryRecord& rec : records) {
        for (std::size_t j = 0; j < rec.modes.size(); ++j) {
            const ModeSample& s = rec.modes[j];
            os << rec.round << ',' << j << ',' << format_full(s.x) << ',' << format_full(s.m)
               << ',' << format_full(rec.loss) << ',' << (s.restarted ? 1 : 0) << '\n';
        }
    }
}

namespace {

// Flattened per-mode description shared by the spectrum and block simulators.
struct CoreSpec {
    std::vector<Transition2x2> transitions;
    std::vector<double> sigmas;
    std::vector<double> weights;
    std::vector<double> x0;
    std::vector<int> periods;  // 0 = never fires
    bool soft = false;
    double retain = 0.0;
    double inject = 0.0;
};

double weighted_half_square(const std::vector<double>& xs, const std::vector<double>& ws) {
    double acc = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) acc += ws[j] * xs[j] * xs[j];
    return 0.5 * acc;
}

Trajectory run_core(const CoreSpec& cs, int horizon) {
    const std::size_t n = cs.transitions.size();
    std::vector<double> xs = cs.x0;
    std::vector<double> ms(n, 0.0);

    Trajectory traj;
    traj.records.reserve(static_cast<std::size_t>(horizon) + 1);
    {
        TrajectoryRecord rec{0, {}, weighted_half_square(xs, cs.weights)};
        rec.modes.reserve(n);
        for (std::size_t j = 0; j < n; ++j) rec.modes.push_back({xs[j], ms[j], false});
        traj.records.push_back(std::move(rec));
    }

    std::vector<char> fired(n, 0);
    for (int t = 1; t <= horizon; ++t) {
        bool any_fired = false;
        bool all_finite = true;
        for (std::size_t j = 0; j < n; ++j) {
            const Transition2x2& tr = cs.transitions[j];
            const double x = xs[j];
            const double m = ms[j];
            const double g = cs.sigmas[j] * x;  // this round's pseudo-gradient
            const double xn = tr.a11 * x + tr.a12 * m;
            double mn = tr.a21 * x + tr.a22 * m;
            const bool f = cs.periods[j] > 0 && t % cs.periods[j] == 0;
            if (f) {
                if (cs.soft) {
                    mn = cs.retain * mn + cs.inject * g;
                    if (mn == 0.0) mn = 0.0;  // canonicalize -0 so soft(0,0) == hard bitwise
                } else {
                    mn = 0.0;
                }
            }
            xs[j] = xn;
            ms[j] = mn;
            fired[j] = f ? 1 : 0;
            any_fired = any_fired || f;
            all_finite = all_finite && std::isfinite(xn) && std::isfinite(mn);
        }
        const double loss = weighted_half_square(xs, cs.weights);
        if (!all_finite || !std::isfinite(loss)) {
            traj.diverged_at = t;
            break;
        }
        TrajectoryRecord rec{t, {}, loss};
        rec.modes.reserve(n);
        for (std::size_t j = 0; j < n; ++j) rec.modes.push_back({xs[j], ms[j], fired[j] != 0});
        traj.records.push_back(std::move(rec));
        if (any_fired) traj.restart_rounds.push_back(t);
    }
    return traj;
}

Transition2x2 make_transition(const EffectiveProgress& sigma, const OuterHyperparams& h,
                              TransitionKind kind) {
    return kind == TransitionKind::HB ? transition_hb(sigma, h) : transition_nag(sigma, h);
}

std::vector<double> resolve_x0(const std::vector<double>& x0, std::size_t n) {
    if (x0.empty()) return std::vector<double>(n, 1.0);
    if (x0.size() != n)
        throw config_error("x0 must have one entry per mode (" + std::to_string(n) + ")");
    for (double v : x0)
        if (!std::isfinite(v)) throw config_error("x0 entries must be finite");
    return x0;
}

}  // namespace

Trajectory simulate_modes(const Spectrum& spectrum, const OuterHyperparams& h, TransitionKind kind,
                          const RestartSchedule& schedule, int horizon,
                          const std::vector<double>& x0) {
    if (horizon < 0) throw config_error("horizon must be >= 0");
    const std::size_t n = spectrum.size();

    CoreSpec cs;
    cs.transitions.reserve(n);
    cs.sigmas.reserve(n);
    cs.weights.reserve(n);
    for (const SpectrumMode& mode : spectrum.modes()) {
        cs.transitions.push_back(make_transition(mode.sigma, h, kind));
        cs.sigmas.push_back(mode.sigma.value());
        cs.weights.push_back(mode.weight);
    }
    cs.x0 = resolve_x0(x0, n);

    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NoRestart>) {
                cs.periods.assign(n, 0);
            } else if constexpr (std::is_same_v<T, GlobalRestart>) {
                cs.periods.assign(n, v.period);
            } else if constexpr (std::is_same_v<T, PerModeRestart>) {
                if (v.periods.size() != n)
                    throw config_error("per-mode schedule needs one period per mode");
                cs.periods = v.periods;
            } else if constexpr (std::is_same_v<T, BlockwiseRestart>) {
                throw config_error("blockwise schedule requires block simulation");
            } else {  // SoftRestart
                cs.periods.assign(n, v.period);
                cs.soft = true;
                cs.retain = v.retain_alpha;
                cs.inject = v.inject_beta;
            }
        },
        schedule.variant());

    return run_core(cs, horizon);
}

RestartSchedule blockwise_schedule_from(const std::vector<Block>& blocks) {
    std::vector<int> periods;
    periods.reserve(blocks.size());
    for (const Block& b : blocks) {
        if (!b.period)
            throw config_error("block '" + b.label + "' has no restart period");
        periods.push_back(*b.period);
    }
    return RestartSchedule::blockwise(std::move(periods));
}

Trajectory simulate_blocks(const std::vector<Block>& blocks, const OuterHyperparams& global_hyper,
                           TransitionKind kind, const RestartSchedule& schedule, int horizon) {
    if (horizon < 0) throw config_error("horizon must be >= 0");
    if (blocks.empty()) throw config_error("block simulation needs at least one block");

    std::vector<int> block_periods(blocks.size(), 0);
    bool soft = false;
    double retain = 0.0, inject = 0.0;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NoRestart>) {
                // all zero
            } else if constexpr (std::is_same_v<T, GlobalRestart>) {
                block_periods.assign(blocks.size(), v.period);
            } else if constexpr (std::is_same_v<T, BlockwiseRestart>) {
                if (v.periods.size() != blocks.size())
                    throw config_error("blockwise schedule needs one period per block");
                block_periods = v.periods;
            } else if constexpr (std::is_same_v<T, SoftRestart>) {
                block_periods.assign(blocks.size(), v.period);
                soft = true;
                retain = v.retain_alpha;
                inject = v.inject_beta;
            } else {
                throw config_error("per-mode schedule is not defined for block simulation");
            }
        },
        schedule.variant());

    CoreSpec cs;
    cs.soft = soft;
    cs.retain = retain;
    cs.inject = inject;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const OuterHyperparams& h = blocks[b].hyper ? *blocks[b].hyper : global_hyper;
        for (const SpectrumMode& mode : blocks[b].spectrum.modes()) {
            cs.transitions.push_back(make_transition(mode.sigma, h, kind));
            cs.sigmas.push_back(mode.sigma.value());
            cs.weights.push_back(mode.weight);
            cs.periods.push_back(block_periods[b]);
            cs.x0.push_back(1.0);
        }
    }
    return run_core(cs, horizon);
}

namespace {

void validate_curvature(const Eigen::MatrixXd& h, const InnerConfig& inner, const char* what) {
    if (h.rows() != h.cols()) throw config_error(std::string(what) + " must be square");
    const double scale = h.norm();
    if (scale > 0.0 && (h - h.transpose()).norm() > 1e-12 * scale)
        throw config_error(std::string(what) + " must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo < -1e-10)
        throw config_error(std::string(what) + " must be positive semidefinite (min eigenvalue " +
                           std::to_string(lo) + ")");
    if (inner.eta * hi > 1.0 + 1e-9)
        throw config_error("eta * lambda_max = " + std::to_string(inner.eta * hi) +
                           " exceeds 1: the inner loop is not a contraction");
}

}  // namespace

Trajectory simulate_full_quadratic(const QuadraticProblem& problem, const InnerConfig& inner,
                                   const OuterHyperparams& h, TransitionKind kind,
                                   const RestartSchedule& schedule, int rounds) {
    if (rounds < 0) throw config_error("rounds must be >= 0");
    const Eigen::Index n = problem.hessian.rows();
    if (problem.x0.size() != n) throw config_error("x0 must match the curvature dimension");
    if (!problem.x0.allFinite()) throw config_error("x0 entries must be finite");
    if (problem.workers < 1) throw config_error("worker count must be >= 1");
    if (!problem.worker_hessians.empty() &&
        problem.worker_hessians.size() != static_cast<std::size_t>(problem.workers))
        throw config_error("per-worker curvature list must match the worker count");

    validate_curvature(problem.hessian, inner, "curvature matrix");
    for (const Eigen::MatrixXd& hw : problem.worker_hessians) {
        if (hw.rows() != n || hw.cols() != n)
            throw config_error("per-worker curvature must match the shared dimension");
        validate_curvature(hw, inner, "per-worker curvature matrix");
    }

    int period = 0;
    bool soft = false;
    double retain = 0.0, inject = 0.0;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NoRestart>) {
                // never fires
            } else if constexpr (std::is_same_v<T, GlobalRestart>) {
                period = v.period;
            } else if constexpr (std::is_same_v<T, SoftRestart>) {
                period = v.period;
                soft = true;
                retain = v.retain_alpha;
                inject = v.inject_beta;
            } else {
                throw config_error(
                    "per-mode/blockwise schedules are undefined for the full-vector simulation");
            }
        },
        schedule.variant());

    Eigen::VectorXd x = problem.x0;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd g(n), gsum(n), xw(n);

    Trajectory traj;
    traj.records.reserve(static_cast<std::size_t>(rounds) + 1);
    auto push_record = [&](int t, bool fired) {
        const double loss = 0.5 * x.dot(problem.hessian * x);
        if (!x.allFinite() || !m.allFinite() || !std::isfinite(loss)) {
            traj.diverged_at = t;
            return false;
        }
        TrajectoryRecord rec{t, {}, loss};
        rec.modes.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) rec.modes.push_back({x[i], m[i], fired});
        traj.records.push_back(std::move(rec));
        return true;
    };
    push_record(0, false);

    for (int t = 1; t <= rounds; ++t) {
        // Worker inner loops run from the shared iterate; displacements are
        // combined in fixed worker order so the result is bit-reproducible.
        gsum.setZero();
        for (int w = 0; w < problem.workers; ++w) {
            const Eigen::MatrixXd& hw =
                problem.worker_hessians.empty() ? problem.hessian : problem.worker_hessians[w];
            xw = x;
            for (int s = 0; s < inner.steps; ++s) xw -= inner.eta * (hw * xw);
            gsum += x - xw;
        }
        g = gsum / static_cast<double>(problem.workers);

        if (kind == TransitionKind::HB) {
            m = h.beta * m + (1.0 - h.beta) * g;
            x -= h.nu * m;
        } else {
            const Eigen::VectorXd m_new = h.beta * m + (1.0 - h.beta) * g;
            x -= h.nu * ((1.0 + h.beta) * m_new - h.beta * m);
            m = m_new;
        }

        const bool fired = period > 0 && t % period == 0;
        if (fired) {
            if (soft) {
                m = retain * m + inject * g;
                for (Eigen::Index i = 0; i < n; ++i)
                    if (m[i] == 0.0) m[i] = 0.0;
            } else {
                m.setZero();
            }
            traj.restart_rounds.push_back(t);
        }
        if (!push_record(t, fired)) break;
    }
    if (traj.diverged_at && !traj.restart_rounds.empty() &&
        traj.restart_rounds.back() == *traj.diverged_at)
        traj.restart_rounds.pop_back();
    return traj;
}

}  // namespace restartlab
