#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "restartlab/mode_dynamics.hpp"

namespace restartlab {

struct NoRestart {};
struct GlobalRestart {
    int period;
};
struct PerModeRestart {
    std::vector<int> periods;
};
struct BlockwiseRestart {
    std::vector<int> periods;
};
// Boundary rewrite m <- retain_alpha*m + inject_beta*g_bar instead of m <- 0.
struct SoftRestart {
    int period;
    double retain_alpha;
    double inject_beta;
};

class RestartSchedule {
public:
    using Variant = std::variant<NoRestart, GlobalRestart, PerModeRestart, BlockwiseRestart, SoftRestart>;

    RestartSchedule() : v_(NoRestart{}) {}

    static RestartSchedule none();
    static RestartSchedule global(int period);
    static RestartSchedule per_mode(std::vector<int> periods);
    static RestartSchedule blockwise(std::vector<int> periods);
    static RestartSchedule soft(int period, double retain_alpha, double inject_beta);

    const Variant& variant() const { return v_; }

private:
    explicit RestartSchedule(Variant v) : v_(std::move(v)) {}

    Variant v_;
};

struct ModeSample {
    double x;
    double m;
    bool restarted;
};

struct TrajectoryRecord {
    int round;
    std::vector<ModeSample> modes;
    double loss;  // 0.5 * sum_j w_j x_j^2
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;     // horizon+1 records unless diverged earlier
    std::optional<int> diverged_at;            // first non-finite round
    std::vector<int> restart_rounds;           // rounds where any buffer rewrite fired

    double final_loss() const { return records.back().loss; }

    /// Columns: round,mode_or_dim,x,m,loss,restarted. Header row included;
    /// numbers at 17 significant digits.
    void write_csv(std::ostream& os) const;
};

/// Evolves every mode of the spectrum under the chosen outer transition.
/// Each mode starts at (x0_j, 0), default x0_j = 1. The buffer rewrite fires
/// after the outer update of rounds t = K, 2K, ...; round 0 never fires.
Trajectory simulate_modes(const Spectrum& spectrum, const OuterHyperparams& h, TransitionKind kind,
                          const RestartSchedule& schedule, int horizon,
                          const std::vector<double>& x0 = {});

struct Block {
    std::string label;
    Spectrum spectrum;
    std::optional<OuterHyperparams> hyper;  // defaults to the global hyperparameters
    std::optional<int> period;              // blockwise restart period
};

/// Blockwise schedule built from each block's own period field.
RestartSchedule blockwise_schedule_from(const std::vector<Block>& blocks);

/// Each block evolves independently under its own hyperparameters and period;
/// the loss is the weighted sum over all blocks' modes.
Trajectory simulate_blocks(const std::vector<Block>& blocks, const OuterHyperparams& global_hyper,
                           TransitionKind kind, const RestartSchedule& schedule, int horizon);

struct QuadraticProblem {
    Eigen::MatrixXd hessian;                      // symmetric positive-semidefinite
    Eigen::VectorXd x0;
    int workers = 1;
    std::vector<Eigen::MatrixXd> worker_hessians;  // empty: all workers share `hessian`
};

/// Full-vector two-phase dynamics: per round every worker runs S inner GD
/// steps from the shared iterate, the averaged displacement forms the
/// pseudo-gradient, and the outer HB/NAG update runs in vector form with a
/// buffer m in R^n. Only NoRestart/Global/Soft schedules apply (per-mode
/// schedules are undefined without an eigenbasis).
Trajectory simulate_full_quadratic(const QuadraticProblem& problem, const InnerConfig& inner,
                                   const OuterHyperparams& h, TransitionKind kind,
                                   const RestartSchedule& schedule, int rounds);

}  // namespace restartlab
