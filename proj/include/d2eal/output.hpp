// CSV / JSON serialization of logs, summaries, campaigns and audits.
// CSV floats use 17 significant digits; absent values are empty fields.

#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "d2eal/audit.hpp"
#include "d2eal/simulation.hpp"

namespace d2eal::output {

/// printf("%.17g"); NaN and infinities are written as empty fields.
[[nodiscard]] std::string format_double(double v);

void write_steps_csv(std::ostream& out, std::span<const sim::StepLog> log);
/// t,dropped for every logged step.
void write_linkdrops_csv(std::ostream& out, std::span<const std::size_t> dropped_per_step);
/// dropped,steps,percent over steps 1..T, one row per count 0..edges.
void write_linkdrop_histogram_csv(std::ostream& out, std::span<const std::size_t> dropped_per_step,
                                  std::size_t edges);
/// strategy,runs,failed_runs,total_mean,total_std,robot_<i>_mean...
void write_comparison_csv(std::ostream& out, std::span<const sim::Campaign> campaigns);
/// strategy,t,total_mean,total_std,robot_<i>_mean,robot_<i>_std...
void write_curves_csv(std::ostream& out, std::span<const sim::Campaign> campaigns);
void write_sweep_csv(std::ostream& out, std::span<const sim::SweepCell> cells);

[[nodiscard]] std::string summary_json(const sim::RunSummary& summary, const scenario::ScenarioConfig& config);
[[nodiscard]] std::string campaign_json(const sim::Campaign& campaign, const scenario::ScenarioConfig& config);

struct RunAudit {
    std::uint64_t seed{0};
    audit::BoundAudit configured;   ///< reset as configured
    audit::BoundAudit lemma_scope;  ///< same seed, reset disabled
    audit::ConvergenceAudit convergence;
};

struct DesignatedConvergence {
    audit::ConvergenceScenario scenario;
    audit::ConvergenceAudit result;
    int closed_form_steps{0};
    int step_limit{0};  ///< closed form plus 10 %
    bool within_limit{false};
};

[[nodiscard]] DesignatedConvergence designated_convergence(const audit::ConvergenceScenario& scenario = {});

[[nodiscard]] std::string audit_json(std::span<const RunAudit> runs, const DesignatedConvergence& designated);
/// audit.json for strategies without learning weights.
[[nodiscard]] std::string audit_not_applicable_json(fusion::Strategy strategy,
                                                    const DesignatedConvergence& designated);

/// Write `text` to `path`, creating parent directories. Throws std::runtime_error on I/O failure.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace d2eal::output
