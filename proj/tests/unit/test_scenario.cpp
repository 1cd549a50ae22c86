#include <string>

#include "d2eal/scenario.hpp"
#include "doctest.h"

using namespace d2eal;
using namespace d2eal::scenario;

TEST_CASE("defaults describe the six-robot reference scenario") {
    const ScenarioConfig c = parse_config("{}");
    CHECK(c.robots == 6);
    CHECK(c.steps == 1400);
    CHECK(c.dt == 0.1);
    CHECK(c.tau == 1);
    CHECK(c.learning.eta_alpha == 2.0);
    CHECK(c.learning.eta_w == 2.0);
    CHECK(c.learning.reset_period == 200);
    CHECK(c.learning.loss_scale == 50.0);
    CHECK(c.link_drop_p == 0.1);
    CHECK(c.drift_reset_p == 0.1);
    CHECK(c.num_runs == 100);
    CHECK(c.gamma.kind == GammaSpec::Kind::Reference);
    CHECK(c.topology.kind == TopologySpec::Kind::Path);
    CHECK(c.fusion == fusion::Strategy::D2EAL);
    CHECK(build_topology(c).edges().size() == 5);
}

TEST_CASE("parsing overrides and round trip") {
    const ScenarioConfig c = parse_config(R"({
        "robots": 4, "steps": 300, "tau": 3, "eta_w": 0.5, "reset_period": 0,
        "gamma": {"kind": "table", "segments": [{"from": 0, "gamma": [0.1, 0.2, 0.3, 0.4]},
                                                  {"from": 0.5, "gamma": [0.4, 0.3, 0.2, 0.1]}]},
        "topology": {"kind": "edges", "edges": [[0, 1], [1, 2], [1, 3]]},
        "target": {"kind": "waypoints", "points": [[10, 0], [10, 10]], "speed": 3},
        "fusion": "cu", "cu_exact_mean": true, "seed": 42, "sweep_robots": [2, 3]
    })");
    CHECK(c.robots == 4);
    CHECK(c.tau == 3);
    CHECK(c.learning.reset_period == 0);
    CHECK(c.fusion == fusion::Strategy::CovarianceUnion);
    CHECK(c.fusion_options.cu_exact_mean);
    CHECK(build_topology(c).degree(1) == 4);
    Rng rng(1, 2);
    CHECK(build_gamma(c, rng).gamma(150, 3) == 0.1);
    const std::string dumped = dump_config(c);
    CHECK(dump_config(parse_config(dumped)) == dumped);
    CHECK(dump_config(parse_config(dump_config(ScenarioConfig{}))) == dump_config(ScenarioConfig{}));
}

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_AS((void)parse_config(R"({"robotz": 3})"), Error);
    CHECK_THROWS_AS((void)parse_config(R"({"control": {"k9": 1}})"), Error);
    CHECK_THROWS_AS((void)parse_config(R"({"target": {"kind": "circle", "radius": 3}})"), Error);
    CHECK_THROWS_AS((void)parse_config(R"({"gamma": {"kind": "constant", "values": [1,1,1,1,1,1], "x": 1}})"), Error);
}

TEST_CASE("invalid values are config errors") {
    auto code_of = [](const char* text) {
        try {
            (void)parse_config(text);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    CHECK(code_of(R"({"robots": 0})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"steps": -5})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"dt": 0})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"link_drop_p": 1.5})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"eta_alpha": -1})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"fusion": "magic"})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"robots": "six"})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"robots": 5})") == ErrorCode::ConfigError);  // reference gamma needs six
    CHECK(code_of(R"({"topology": {"kind": "edges", "edges": [[0, 1]]}})") == ErrorCode::ConfigError);
    CHECK(code_of("{not json") == ErrorCode::ConfigError);
    CHECK(code_of("[1, 2]") == ErrorCode::ConfigError);
    CHECK_THROWS_AS((void)load_config("/nonexistent/path.json"), Error);
}

TEST_CASE("scalability gamma pins the end robots") {
    ScenarioConfig c;
    c.robots = 10;
    c.gamma.kind = GammaSpec::Kind::Scalability;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed, 2);
        const expert::GammaSchedule g = build_gamma(c, rng);
        CHECK(g.gamma(0, 0) == 0.01);
        CHECK(g.gamma(0, 9) == 0.8);
        for (std::size_t i = 1; i < 9; ++i) {
            CHECK(g.gamma(0, i) >= 0.0);
            CHECK(g.gamma(0, i) <= 0.81);
            CHECK(g.gamma(1399, i) == g.gamma(0, i));
        }
    }
}
