#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "restartlab/trajectory_sim.hpp"

namespace restartlab {

struct SweepConfig {
    std::vector<double> beta_grid;
    std::vector<double> nu_grid;
    std::vector<int> k_grid;                            // restart periods; NoRestart is always added
    std::vector<TransitionKind> kinds;
    std::variant<Spectrum, std::vector<Block>> model = std::vector<Block>{};
    int horizon = 80;
    double clip_lo = -12.0;                             // log10 units
    double clip_hi = 2.0;
    bool best_k_reduction = false;                      // collapse restart cells to min over k_grid

    /// Heterogeneous six-mode benchmark over the default (beta, nu) grids with
    /// k_grid = {1..64} and horizon 80.
    static SweepConfig toy_default();
};

struct SweepCell {
    TransitionKind kind;
    std::string schedule;  // "none", "global" or "best"
    int period;            // 0 for "none"
    double beta;
    double nu;
    double value;          // clipped log10 final loss; divergence maps to clip_hi
};

struct SweepResult {
    SweepConfig config;
    std::vector<SweepCell> cells;  // canonical order (kind, schedule, period, beta, nu)
    bool deterministic = true;     // the model is noise-free; repeated runs are bitwise equal

    /// Columns: kind,schedule,K,beta_out,nu,clipped_log10_loss.
    /// Stable lexicographic row order, 17 significant digits.
    void write_csv(std::ostream& os) const;
};

SweepResult run_sweep(const SweepConfig& cfg);

struct RobustnessEntry {
    TransitionKind kind;
    std::string schedule;  // "none" or "best"
    double fraction;       // fraction of (beta, nu) cells with value <= threshold
};

/// Fraction of grid cells at or below the loss threshold, per kind, for the
/// no-restart cells and for the best-over-k_grid restart reduction.
std::vector<RobustnessEntry> robustness_metric(const SweepResult& result, double threshold);

}  // namespace restartlab
