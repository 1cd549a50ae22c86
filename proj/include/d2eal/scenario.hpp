// Scenario configuration: every knob of one simulation, loadable from JSON.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "d2eal/comm_graph.hpp"
#include "d2eal/engine.hpp"
#include "d2eal/expert.hpp"
#include "d2eal/fusion.hpp"
#include "d2eal/world.hpp"

namespace d2eal::scenario {

struct GammaSpec {
    enum class Kind { Reference, Table, Constant, Scalability };
    Kind kind{Kind::Reference};
    std::vector<expert::GammaSchedule::Segment> segments;  ///< Kind::Table
    std::vector<double> values;                            ///< Kind::Constant
    // Kind::Scalability: first robot `low`, last robot `high`, every robot in
    // between draws unif(0, inserted_range) * inserted_scale once per run.
    double low{0.01};
    double high{0.8};
    double inserted_scale{0.405};
    double inserted_range{2.0};
};

struct TopologySpec {
    enum class Kind { Path, Ring, Complete, Edges };
    Kind kind{Kind::Path};
    std::vector<comm::Edge> edges;  ///< Kind::Edges
};

struct TargetSpec {
    world::TargetSchedule schedule{world::SinusoidInput{}};
    world::Pose initial{};
};

struct FormationSpec {
    double radius{10.0};
    double arc_span{1.5707963267948966};
};

struct ScenarioConfig {
    std::size_t robots{6};
    int steps{1400};
    double dt{0.1};
    int tau{1};
    engine::LearningConfig learning{};
    double drift_reset_p{0.1};
    bool shared_drift_clock{false};
    double link_drop_p{0.1};
    GammaSpec gamma{};
    TopologySpec topology{};
    world::ControlParams control{};
    TargetSpec target{};
    FormationSpec formation{};
    fusion::Strategy fusion{fusion::Strategy::D2EAL};
    fusion::FusionOptions fusion_options{};
    std::uint64_t seed{1};
    int num_runs{100};
    double reliability_cost{1.0};
    std::vector<std::size_t> sweep_robots{2, 4, 6, 8, 10, 12, 16, 20};

    /// Throws ConfigError on any out-of-range field.
    void validate() const;
};

/// Parse a JSON document. Missing keys keep their defaults; unknown keys,
/// wrong types and invalid values raise ConfigError.
[[nodiscard]] ScenarioConfig parse_config(std::string_view json_text);
[[nodiscard]] ScenarioConfig load_config(const std::filesystem::path& path);

/// Full JSON document (every key written) that parses back to the same config.
[[nodiscard]] std::string dump_config(const ScenarioConfig& config);

/// Gamma schedule for one run; Scalability draws from `rng`.
[[nodiscard]] expert::GammaSchedule build_gamma(const ScenarioConfig& config, Rng& rng);
[[nodiscard]] comm::BaseGraph build_topology(const ScenarioConfig& config);

}  // namespace d2eal::scenario
