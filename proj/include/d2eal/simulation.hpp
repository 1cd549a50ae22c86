// The closed-loop tracking simulation, Monte Carlo campaigns, the strategy
// comparison and the scalability sweep.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "d2eal/scenario.hpp"

namespace d2eal::sim {

/// One robot at one step. Losses are absent at t == 0; alpha and the
/// persistence loss only exist for D2EAL; weight rows are empty for
/// strategies that do not combine by weights (median, covariance methods).
struct RobotLog {
    world::Pose pose;
    std::optional<double> expert_loss;       ///< l(f_t, y_t)
    std::optional<double> persistence_loss;  ///< l(f^_{t-1}, y_t)
    std::optional<double> individual_loss;   ///< l(f-_t, y_t)
    std::optional<double> social_loss;       ///< l(f^_t, y_t)
    std::optional<double> alpha;
    std::optional<double> w_hat_self;
    std::int64_t nrmcnt{0};
    Vec2 expert;      ///< f_{t+1}
    Vec2 individual;  ///< f-_{t+1}
    Vec2 social;      ///< f^_{t+1}
    Vec2 social_tau;  ///< f^p_{t+tau}
    std::vector<double> weights;             ///< w_ij(t) for j in [0, N), zero outside Lambda_i(t)
    std::vector<std::size_t> neighborhood;   ///< Lambda_i(t)
    unsigned flags{0};
};

struct StepLog {
    int t{0};
    Vec2 target;                 ///< y_t
    double divergence{0};        ///< max pairwise distance of the expert predictions scored at t
    std::size_t dropped_links{0};
    std::vector<RobotLog> robots;
};

/// Log entry for one engine agent in an N-agent network.
[[nodiscard]] RobotLog robot_log_from(const engine::AgentRecord& record, std::size_t agents);

struct RobotTotals {
    double expert{0};
    double persistence{0};
    double individual{0};
    double social{0};
};

struct RunSummary {
    fusion::Strategy strategy{fusion::Strategy::D2EAL};
    std::uint64_t seed{0};
    std::size_t robots{0};
    int steps{0};
    std::vector<RobotTotals> totals;  ///< cumulative over t = 1..T
    double total_social{0};           ///< sum_i of social totals
    double delta_o{0};                ///< sum of divergences over t = 1..T
    std::size_t dropped_links{0};
    std::vector<double> gamma_initial;  ///< gamma at t = 0, per robot
    unsigned flags_seen{0};
};

struct RunOutput {
    std::vector<StepLog> log;  ///< empty unless requested
    RunSummary summary;
    /// cumulative[t][i] = social cumulative loss of robot i after step t (t = 0..T).
    std::vector<std::vector<double>> cumulative;
    std::vector<std::size_t> dropped_per_step;  ///< t = 0..T
};

struct RunOptions {
    bool keep_log{true};
    bool keep_curves{true};
};

/// One closed-loop run. The configured seed drives every random stream.
/// Throws NumericalFailure (with the step index) on any non-finite value.
[[nodiscard]] RunOutput run_once(const scenario::ScenarioConfig& config, const RunOptions& options = {});

struct FailedRun {
    std::uint64_t seed{0};
    std::string message;
};

struct Campaign {
    fusion::Strategy strategy{fusion::Strategy::D2EAL};
    int requested_runs{0};
    std::vector<RunSummary> runs;  ///< successful runs, ascending seed
    std::vector<FailedRun> failed;
    /// Mean and population standard deviation over successful runs,
    /// [t][i] for t = 0..T (empty when curves were not kept).
    std::vector<std::vector<double>> mean_curve;
    std::vector<std::vector<double>> std_curve;
    std::vector<double> mean_total_curve;
    std::vector<double> std_total_curve;
    std::vector<double> mean_robot_total;  ///< per robot social total
    double mean_total{0};
    double std_total{0};
};

/// Worker count from D2EAL_THREADS, else the hardware concurrency (>= 1).
[[nodiscard]] unsigned worker_count();

/// Runs seeds seed + 0 .. seed + runs - 1 on `threads` workers (0 = worker_count()).
/// Aggregates are formed in seed order, so the thread count never changes them.
/// Throws NumericalFailure when more than 1% of the runs fail.
[[nodiscard]] Campaign monte_carlo(const scenario::ScenarioConfig& config, int runs, unsigned threads = 0,
                                   bool keep_curves = true);

/// Every strategy on the same seeds (common random numbers).
[[nodiscard]] std::vector<Campaign> compare(const scenario::ScenarioConfig& config, int runs, unsigned threads = 0,
                                            bool keep_curves = true);

struct SweepCell {
    std::size_t robots{0};
    fusion::Strategy strategy{fusion::Strategy::D2EAL};
    int runs{0};
    std::size_t failed_runs{0};
    double per_robot_mean{0};  ///< (1/N) sum_i social total, averaged over runs
    double per_robot_std{0};
    double reliability_cost{0};  ///< c / N
};

/// Scalability construction: for every N, a path of N robots with the
/// scalability gamma rule, each strategy on common seeds.
[[nodiscard]] scenario::ScenarioConfig sweep_config(const scenario::ScenarioConfig& base, std::size_t robots);
[[nodiscard]] std::vector<SweepCell> scalability_sweep(const scenario::ScenarioConfig& base,
                                                       const std::vector<std::size_t>& robot_counts,
                                                       const std::vector<fusion::Strategy>& strategies, int runs,
                                                       unsigned threads = 0);

/// c / N.
[[nodiscard]] double reliability_cost(double c, std::size_t robots);

}  // namespace d2eal::sim
