#include "restartlab/sweep_harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <tuple>

#include "restartlab/format.hpp"

namespace restartlab {

SweepConfig SweepConfig::toy_default() {
    SweepConfig cfg;
    cfg.beta_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
    cfg.nu_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
    cfg.k_grid.resize(64);
    for (int k = 1; k <= 64; ++k) cfg.k_grid[static_cast<std::size_t>(k - 1)] = k;
    cfg.kinds = {TransitionKind::HB, TransitionKind::NAG};
    cfg.model = Spectrum::direct({0.95, 0.85, 0.75, 0.60, 0.45, 0.30});
    cfg.horizon = 80;
    cfg.clip_lo = -12.0;
    cfg.clip_hi = 2.0;
    cfg.best_k_reduction = false;
    return cfg;
}

namespace {

void validate_config(const SweepConfig& cfg) {
    if (cfg.beta_grid.empty() || cfg.nu_grid.empty() || cfg.kinds.empty())
        throw config_error("sweep grids (beta, nu, kinds) must be nonempty");
    if (!(cfg.clip_lo < cfg.clip_hi)) throw config_error("loss clip needs lo < hi");
    if (cfg.horizon < 0) throw config_error("horizon must be >= 0");
    for (int k : cfg.k_grid)
        if (k < 1) throw config_error("k_grid entries must be >= 1");
    if (const auto* blocks = std::get_if<std::vector<Block>>(&cfg.model)) {
        if (blocks->empty()) throw config_error("sweep model has no blocks");
        for (const Block& b : *blocks)
            if (b.hyper)
                throw config_error("sweep blocks may not carry per-block hyperparameters; the "
                                   "grid defines (beta, nu)");
    }
}

double clip_value(const Trajectory& traj, double lo, double hi) {
    if (traj.diverged_at) return hi;
    const double loss = traj.final_loss();
    if (!std::isfinite(loss)) return hi;
    if (loss <= 0.0) return lo;
    return std::clamp(std::log10(loss), lo, hi);
}

double eval_cell(const SweepConfig& cfg, TransitionKind kind, const OuterHyperparams& h,
                 const RestartSchedule& sched) {
    const Trajectory traj = std::visit(
        [&](const auto& model) {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, Spectrum>) {
                return simulate_modes(model, h, kind, sched, cfg.horizon);
            } else {
                return simulate_blocks(model, h, kind, sched, cfg.horizon);
            }
        },
        cfg.model);
    return clip_value(traj, cfg.clip_lo, cfg.clip_hi);
}

std::tuple<std::string, std::string, int, double, double> cell_key(const SweepCell& c) {
    return {to_string(c.kind), c.schedule, c.period, c.beta, c.nu};
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg) {
    validate_config(cfg);

    SweepResult result;
    result.config = cfg;
    for (TransitionKind kind : cfg.kinds) {
        for (double beta : cfg.beta_grid) {
            for (double nu : cfg.nu_grid) {
                const OuterHyperparams h(nu, beta);
                result.cells.push_back(
                    {kind, "none", 0, beta, nu, eval_cell(cfg, kind, h, RestartSchedule::none())});
                if (cfg.k_grid.empty()) continue;
                if (cfg.best_k_reduction) {
                    int best_k = cfg.k_grid.front();
                    double best = eval_cell(cfg, kind, h, RestartSchedule::global(best_k));
                    for (std::size_t i = 1; i < cfg.k_grid.size(); ++i) {
                        const int k = cfg.k_grid[i];
                        const double v = eval_cell(cfg, kind, h, RestartSchedule::global(k));
                        if (v < best) {
                            best = v;
                            best_k = k;
                        }
                    }
                    result.cells.push_back({kind, "best", best_k, beta, nu, best});
                } else {
                    for (int k : cfg.k_grid)
                        result.cells.push_back(
                            {kind, "global", k, beta, nu,
                             eval_cell(cfg, kind, h, RestartSchedule::global(k))});
                }
            }
        }
    }
    std::sort(result.cells.begin(), result.cells.end(),
              [](const SweepCell& a, const SweepCell& b) { return cell_key(a) < cell_key(b); });
    return result;
}

void SweepResult::write_csv(std::ostream& os) const {
    os << "kind,schedule,K,beta_out,nu,clipped_log10_loss\n";
    for (const SweepCell& c : cells) {
        os << to_string(c.kind) << ',' << c.schedule << ',' << c.period << ','
           << format_full(c.beta) << ',' << format_full(c.nu) << ',' << format_full(c.value)
           << '\n';
    }
}

std::vector<RobustnessEntry> robustness_metric(const SweepResult& result, double threshold) {
    if (threshold < result.config.clip_lo || threshold > result.config.clip_hi)
        throw config_error("robustness threshold must lie within the clip bounds");

    std::vector<RobustnessEntry> entries;
    for (TransitionKind kind : result.config.kinds) {
        std::size_t none_total = 0, none_below = 0;
        std::map<std::pair<double, double>, double> best;  // (beta, nu) -> min over K
        for (const SweepCell& c : result.cells) {
            if (c.kind != kind) continue;
            if (c.schedule == "none") {
                ++none_total;
                if (c.value <= threshold) ++none_below;
            } else {  // "global" rows aggregate to best; "best" rows are already reduced
                auto [it, inserted] = best.try_emplace({c.beta, c.nu}, c.value);
                if (!inserted && c.value < it->second) it->second = c.value;
            }
        }
        entries.push_back({kind, "none",
                           none_total ? static_cast<double>(none_below) / none_total : 0.0});
        if (!best.empty()) {
            std::size_t below = 0;
            for (const auto& [key, v] : best)
                if (v <= threshold) ++below;
            entries.push_back({kind, "best", static_cast<double>(below) / best.size()});
        }
    }
    return entries;
}

}  // namespace restartlab
