// Regret-bound and weight-convergence audits computed from step logs.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "d2eal/simulation.hpp"

namespace d2eal::audit {

/// eta T / 8 + log 2 / eta.
[[nodiscard]] double individual_bound(double eta_alpha, int horizon);
/// eta T / 8 + log d / eta.
[[nodiscard]] double social_bound(double eta_w, int horizon, std::size_t degree);
/// sqrt(8 log 2 / T).
[[nodiscard]] double optimal_eta_alpha(int horizon);
/// sqrt(8 log d / T); zero for an isolated agent (d == 1).
[[nodiscard]] double optimal_eta_w(int horizon, std::size_t degree);

struct SublinearFit {
    bool fitted{false};
    double c0{0};
    double alpha{0};  ///< L_t ~ c0 * t^(1 - alpha)
};

/// Least squares of log L_t on log t over the last half of the horizon.
/// cumulative[k] is L after step k + 1. L_T == 0 gives c0 = 0 without a fit.
[[nodiscard]] SublinearFit fit_sublinear(std::span<const double> cumulative);

struct Check {
    double empirical{0};
    double bound{0};
    bool holds{true};
};

struct RobotBounds {
    std::size_t robot{0};
    std::size_t degree0{0};  ///< d_i(0), from the base graph
    double expert_total{0};
    double persistence_total{0};
    double individual_total{0};
    double social_total{0};
    std::size_t best_neighbor{0};  ///< argmin of individual totals over Lambda_i(T)
    Check individual;               ///< individual vs its two inputs
    Check social;                   ///< social vs best neighbour individual
    Check global_individual;        ///< individual vs best expert
    Check best_expert;              ///< social vs best expert
    Check global_social;            ///< social vs best individual
    double optimal_eta_w{0};
};

struct BoundAudit {
    bool reset_enabled{false};
    int horizon{0};
    double eta_alpha{0};
    double eta_w{0};
    double lipschitz{0};  ///< 1 / loss_scale
    double delta_o{0};
    std::size_t best_expert{0};
    std::size_t best_individual{0};
    SublinearFit fit;
    double sublinear_term{0};  ///< c0 * T^(1 - alpha)
    double assumption1_violation_fraction{0};
    double optimal_eta_alpha{0};
    std::vector<RobotBounds> robots;
    std::size_t lemma_violations{0};   ///< failed individual + social checks
    std::size_t global_violations{0};  ///< failed global / best-expert checks
};

/// Needs a D2EAL log (persistence losses present). Never mutates anything.
[[nodiscard]] BoundAudit audit_bounds(std::span<const sim::StepLog> log, const scenario::ScenarioConfig& config);

struct RobotConvergence {
    std::size_t robot{0};
    std::size_t best_agent{0};              ///< final j'*
    std::vector<double> trajectory;         ///< w_{i j'*(t)}(t), t = 0..T
    double final_weight{0};
    std::optional<int> crossing_step;       ///< first t with weight >= threshold
    std::optional<double> margin;           ///< mean per-step individual-loss gap to the runner-up
    bool converged{false};
};

struct ConvergenceAudit {
    double threshold{0.99};
    std::vector<RobotConvergence> robots;
    bool all_converged{false};
    std::optional<int> crossing_step;  ///< latest crossing over all robots
};

[[nodiscard]] ConvergenceAudit audit_convergence(std::span<const sim::StepLog> log, double threshold = 0.99);

/// ceil(log((N - 1) / (1 - threshold)) / (eta_w * margin)).
[[nodiscard]] int convergence_steps(std::size_t agents, double eta_w, double margin, double threshold = 0.99);

struct ConvergenceScenario {
    std::size_t agents{6};
    std::size_t best_agent{5};
    double margin{0.1};
    double eta_w{2.0};
    /// Large so that the mixing weight settles on the expert after one step.
    double eta_alpha{50.0};
    double loss_scale{50.0};
    double target_step{60.0};  ///< metres per step, saturates the persistence loss
    int steps{80};
};

/// Fixed complete graph, reset off. Every expert is exact except for a
/// constant offset of margin * loss_scale on all agents but the best one.
[[nodiscard]] std::vector<sim::StepLog> convergence_scenario_log(const ConvergenceScenario& scenario);

}  // namespace d2eal::audit
