#include "d2eal/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "json.hpp"

namespace d2eal::scenario {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

/// Reads keys from one JSON object and remembers which were consumed so the
/// leftovers can be rejected.
class Reader {
public:
    Reader(const json& object, std::string where) : object_(object), where_(std::move(where)) {
        if (!object_.is_object()) {
            fail(where_ + " must be a JSON object");
        }
    }

    [[nodiscard]] bool has(const std::string& key) const { return object_.contains(key); }

    [[nodiscard]] const json& raw(const std::string& key) {
        seen_.insert(key);
        return object_.at(key);
    }

    template <typename T>
    void read(const std::string& key, T& target) {
        if (!has(key)) {
            return;
        }
        const json& v = raw(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) {
                    fail(path(key) + " must be a boolean");
                }
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) {
                    fail(path(key) + " must be an integer");
                }
                if constexpr (std::is_unsigned_v<T>) {
                    if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
                        fail(path(key) + " must be non-negative");
                    }
                }
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) {
                    fail(path(key) + " must be a number");
                }
            }
            target = v.get<T>();
        } catch (const json::exception& e) {
            fail(path(key) + ": " + e.what());
        }
    }

    void finish() const {
        for (auto it = object_.begin(); it != object_.end(); ++it) {
            if (!seen_.contains(it.key())) {
                fail("unknown key " + path(it.key()));
            }
        }
    }

    [[nodiscard]] std::string path(const std::string& key) const { return where_ + "." + key; }

private:
    const json& object_;
    std::string where_;
    std::set<std::string> seen_;
};

std::vector<double> number_list(const json& v, const std::string& where) {
    if (!v.is_array()) {
        fail(where + " must be an array of numbers");
    }
    std::vector<double> out;
    for (const json& x : v) {
        if (!x.is_number()) {
            fail(where + " must be an array of numbers");
        }
        out.push_back(x.get<double>());
    }
    return out;
}

Vec2 point(const json& v, const std::string& where) {
    const std::vector<double> xy = number_list(v, where);
    if (xy.size() != 2) {
        fail(where + " must be [x, y]");
    }
    return {xy[0], xy[1]};
}

GammaSpec parse_gamma(const json& v) {
    Reader r(v, "gamma");
    GammaSpec g;
    std::string kind = "reference";
    r.read("kind", kind);
    if (kind == "reference") {
        g.kind = GammaSpec::Kind::Reference;
    } else if (kind == "table") {
        g.kind = GammaSpec::Kind::Table;
        if (!r.has("segments") || !r.raw("segments").is_array()) {
            fail("gamma.segments must be an array");
        }
        for (const json& s : r.raw("segments")) {
            Reader sr(s, "gamma.segments[]");
            expert::GammaSchedule::Segment seg;
            sr.read("from", seg.from);
            if (!sr.has("gamma")) {
                fail("gamma.segments[].gamma is required");
            }
            seg.gamma = number_list(sr.raw("gamma"), "gamma.segments[].gamma");
            sr.finish();
            g.segments.push_back(std::move(seg));
        }
    } else if (kind == "constant") {
        g.kind = GammaSpec::Kind::Constant;
        if (!r.has("values")) {
            fail("gamma.values is required for kind constant");
        }
        g.values = number_list(r.raw("values"), "gamma.values");
    } else if (kind == "scalability") {
        g.kind = GammaSpec::Kind::Scalability;
        r.read("low", g.low);
        r.read("high", g.high);
        r.read("inserted_scale", g.inserted_scale);
        r.read("inserted_range", g.inserted_range);
    } else {
        fail("gamma.kind must be reference, table, constant or scalability");
    }
    r.finish();
    return g;
}

TopologySpec parse_topology(const json& v) {
    Reader r(v, "topology");
    TopologySpec t;
    std::string kind = "path";
    r.read("kind", kind);
    if (kind == "path") {
        t.kind = TopologySpec::Kind::Path;
    } else if (kind == "ring") {
        t.kind = TopologySpec::Kind::Ring;
    } else if (kind == "complete") {
        t.kind = TopologySpec::Kind::Complete;
    } else if (kind == "edges") {
        t.kind = TopologySpec::Kind::Edges;
        if (!r.has("edges") || !r.raw("edges").is_array()) {
            fail("topology.edges must be an array of [i, j] pairs");
        }
        for (const json& e : r.raw("edges")) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
                fail("topology.edges entries must be [i, j] with non-negative integers");
            }
            t.edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
        }
    } else {
        fail("topology.kind must be path, ring, complete or edges");
    }
    r.finish();
    return t;
}

TargetSpec parse_target(const json& v) {
    Reader r(v, "target");
    TargetSpec t;
    std::string kind = "sinusoid";
    r.read("kind", kind);
    r.read("x", t.initial.position.x);
    r.read("y", t.initial.position.y);
    r.read("heading", t.initial.heading);
    if (kind == "sinusoid") {
        world::SinusoidInput s;
        r.read("speed", s.speed);
        r.read("amplitude", s.amplitude);
        r.read("period_s", s.period_s);
        t.schedule = s;
    } else if (kind == "circle") {
        world::CircleInput c;
        r.read("speed", c.speed);
        r.read("yaw_rate", c.yaw_rate);
        t.schedule = c;
    } else if (kind == "constant") {
        world::ConstantInput c;
        r.read("vx", c.body_velocity.x);
        r.read("vy", c.body_velocity.y);
        r.read("yaw_rate", c.yaw_rate);
        t.schedule = c;
    } else if (kind == "waypoints") {
        world::WaypointInput w;
        if (!r.has("points") || !r.raw("points").is_array() || r.raw("points").empty()) {
            fail("target.points must be a non-empty array of [x, y]");
        }
        for (const json& p : r.raw("points")) {
            w.points.push_back(point(p, "target.points[]"));
        }
        r.read("speed", w.speed);
        r.read("turn_gain", w.turn_gain);
        r.read("max_yaw_rate", w.max_yaw_rate);
        r.read("capture_radius", w.capture_radius);
        t.schedule = w;
    } else {
        fail("target.kind must be sinusoid, circle, constant or waypoints");
    }
    r.finish();
    return t;
}

json gamma_json(const GammaSpec& g) {
    switch (g.kind) {
        case GammaSpec::Kind::Reference: return {{"kind", "reference"}};
        case GammaSpec::Kind::Table: {
            json segs = json::array();
            for (const auto& s : g.segments) {
                segs.push_back({{"from", s.from}, {"gamma", s.gamma}});
            }
            return {{"kind", "table"}, {"segments", segs}};
        }
        case GammaSpec::Kind::Constant: return {{"kind", "constant"}, {"values", g.values}};
        case GammaSpec::Kind::Scalability:
            return {{"kind", "scalability"},
                    {"low", g.low},
                    {"high", g.high},
                    {"inserted_scale", g.inserted_scale},
                    {"inserted_range", g.inserted_range}};
    }
    return {};
}

json topology_json(const TopologySpec& t) {
    switch (t.kind) {
        case TopologySpec::Kind::Path: return {{"kind", "path"}};
        case TopologySpec::Kind::Ring: return {{"kind", "ring"}};
        case TopologySpec::Kind::Complete: return {{"kind", "complete"}};
        case TopologySpec::Kind::Edges: {
            json edges = json::array();
            for (const auto& [a, b] : t.edges) {
                edges.push_back({a, b});
            }
            return {{"kind", "edges"}, {"edges", edges}};
        }
    }
    return {};
}

json target_json(const TargetSpec& t) {
    json out = std::visit(
        [](const auto& s) -> json {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, world::SinusoidInput>) {
                return {{"kind", "sinusoid"}, {"speed", s.speed}, {"amplitude", s.amplitude}, {"period_s", s.period_s}};
            } else if constexpr (std::is_same_v<S, world::CircleInput>) {
                return {{"kind", "circle"}, {"speed", s.speed}, {"yaw_rate", s.yaw_rate}};
            } else if constexpr (std::is_same_v<S, world::ConstantInput>) {
                return {{"kind", "constant"},
                        {"vx", s.body_velocity.x},
                        {"vy", s.body_velocity.y},
                        {"yaw_rate", s.yaw_rate}};
            } else {
                json pts = json::array();
                for (const Vec2& p : s.points) {
                    pts.push_back({p.x, p.y});
                }
                return {{"kind", "waypoints"},
                        {"points", pts},
                        {"speed", s.speed},
                        {"turn_gain", s.turn_gain},
                        {"max_yaw_rate", s.max_yaw_rate},
                        {"capture_radius", s.capture_radius}};
            }
        },
        t.schedule);
    out["x"] = t.initial.position.x;
    out["y"] = t.initial.position.y;
    out["heading"] = t.initial.heading;
    return out;
}

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void ScenarioConfig::validate() const {
    if (robots < 1) {
        fail("robots must be >= 1");
    }
    if (steps < 1) {
        fail("steps must be >= 1");
    }
    if (tau < 1) {
        fail("tau must be >= 1");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        fail("dt must be positive");
    }
    learning.validate();
    control.validate();
    if (!probability(drift_reset_p)) {
        fail("drift_reset_p must lie in [0, 1]");
    }
    if (!probability(link_drop_p)) {
        fail("link_drop_p must lie in [0, 1]");
    }
    if (num_runs < 1) {
        fail("num_runs must be >= 1");
    }
    if (!(reliability_cost >= 0.0) || !std::isfinite(reliability_cost)) {
        fail("reliability_cost must be non-negative");
    }
    if (!(fusion_options.regularization > 0.0)) {
        fail("regularization must be positive");
    }
    if (!(formation.radius >= 0.0) || !std::isfinite(formation.radius) || !std::isfinite(formation.arc_span)) {
        fail("formation radius must be non-negative and finite");
    }
    for (std::size_t n : sweep_robots) {
        if (n < 2) {
            fail("sweep_robots entries must be >= 2");
        }
    }
    switch (gamma.kind) {
        case GammaSpec::Kind::Reference:
            if (robots != 6) {
                fail("the reference gamma table is defined for 6 robots");
            }
            break;
        case GammaSpec::Kind::Table:
            (void)expert::GammaSchedule(gamma.segments, steps);
            if (gamma.segments.front().gamma.size() != robots) {
                fail("gamma table needs one value per robot");
            }
            break;
        case GammaSpec::Kind::Constant:
            (void)expert::GammaSchedule::constant(gamma.values, steps);
            if (gamma.values.size() != robots) {
                fail("gamma.values needs one value per robot");
            }
            break;
        case GammaSpec::Kind::Scalability:
            for (double v : {gamma.low, gamma.high, gamma.inserted_scale, gamma.inserted_range}) {
                if (!(v >= 0.0) || !std::isfinite(v)) {
                    fail("scalability gamma parameters must be non-negative");
                }
            }
            break;
    }
    (void)build_topology(*this);
    const bool target_ok = std::visit(
        [](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, world::ConstantInput>) {
                return s.body_velocity.is_finite() && std::isfinite(s.yaw_rate);
            } else if constexpr (std::is_same_v<S, world::SinusoidInput>) {
                return std::isfinite(s.speed) && std::isfinite(s.amplitude) && s.period_s > 0.0;
            } else if constexpr (std::is_same_v<S, world::CircleInput>) {
                return std::isfinite(s.speed) && std::isfinite(s.yaw_rate);
            } else {
                return std::isfinite(s.speed) && std::isfinite(s.turn_gain) && s.max_yaw_rate > 0.0 &&
                       s.capture_radius > 0.0;
            }
        },
        target.schedule);
    if (!target_ok || !target.initial.position.is_finite() || !std::isfinite(target.initial.heading)) {
        fail("target parameters must be finite, with positive periods and radii");
    }
}

ScenarioConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(std::string("malformed JSON: ") + e.what());
    }
    Reader r(doc, "config");
    ScenarioConfig c;
    r.read("robots", c.robots);
    r.read("steps", c.steps);
    r.read("dt", c.dt);
    r.read("tau", c.tau);
    r.read("reset_period", c.learning.reset_period);
    r.read("eta_alpha", c.learning.eta_alpha);
    r.read("eta_w", c.learning.eta_w);
    r.read("loss_scale", c.learning.loss_scale);
    r.read("normalization_delta", c.learning.delta);
    r.read("drift_reset_p", c.drift_reset_p);
    r.read("shared_drift_clock", c.shared_drift_clock);
    r.read("link_drop_p", c.link_drop_p);
    if (r.has("gamma")) {
        c.gamma = parse_gamma(r.raw("gamma"));
    }
    if (r.has("topology")) {
        c.topology = parse_topology(r.raw("topology"));
    }
    if (r.has("control")) {
        Reader cr(r.raw("control"), "control");
        cr.read("k1", c.control.k1);
        cr.read("k2", c.control.k2);
        cr.read("k3", c.control.k3);
        cr.read("standoff", c.control.standoff);
        cr.read("v_max", c.control.v_max);
        cr.read("w_max", c.control.w_max);
        cr.finish();
    }
    if (r.has("target")) {
        c.target = parse_target(r.raw("target"));
    }
    if (r.has("formation")) {
        Reader fr(r.raw("formation"), "formation");
        fr.read("radius", c.formation.radius);
        fr.read("arc_span", c.formation.arc_span);
        fr.finish();
    }
    if (r.has("fusion")) {
        std::string key;
        r.read("fusion", key);
        const auto s = fusion::parse_strategy(key);
        if (!s) {
            fail("unknown fusion strategy '" + key + "'");
        }
        c.fusion = *s;
    }
    r.read("ci_exact", c.fusion_options.ci_exact);
    r.read("cu_exact_mean", c.fusion_options.cu_exact_mean);
    r.read("regularization", c.fusion_options.regularization);
    r.read("seed", c.seed);
    r.read("num_runs", c.num_runs);
    r.read("reliability_cost", c.reliability_cost);
    r.read("sweep_robots", c.sweep_robots);
    r.finish();
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        fail("cannot open config file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string dump_config(const ScenarioConfig& c) {
    json doc{
        {"robots", c.robots},
        {"steps", c.steps},
        {"dt", c.dt},
        {"tau", c.tau},
        {"reset_period", c.learning.reset_period},
        {"eta_alpha", c.learning.eta_alpha},
        {"eta_w", c.learning.eta_w},
        {"loss_scale", c.learning.loss_scale},
        {"normalization_delta", c.learning.delta},
        {"drift_reset_p", c.drift_reset_p},
        {"shared_drift_clock", c.shared_drift_clock},
        {"link_drop_p", c.link_drop_p},
        {"gamma", gamma_json(c.gamma)},
        {"topology", topology_json(c.topology)},
        {"control",
         {{"k1", c.control.k1},
          {"k2", c.control.k2},
          {"k3", c.control.k3},
          {"standoff", c.control.standoff},
          {"v_max", c.control.v_max},
          {"w_max", c.control.w_max}}},
        {"target", target_json(c.target)},
        {"formation", {{"radius", c.formation.radius}, {"arc_span", c.formation.arc_span}}},
        {"fusion", std::string(fusion::to_string(c.fusion))},
        {"ci_exact", c.fusion_options.ci_exact},
        {"cu_exact_mean", c.fusion_options.cu_exact_mean},
        {"regularization", c.fusion_options.regularization},
        {"seed", c.seed},
        {"num_runs", c.num_runs},
        {"reliability_cost", c.reliability_cost},
        {"sweep_robots", c.sweep_robots},
    };
    return doc.dump(2);
}

expert::GammaSchedule build_gamma(const ScenarioConfig& c, Rng& rng) {
    switch (c.gamma.kind) {
        case GammaSpec::Kind::Reference: return expert::GammaSchedule::reference_table(c.steps);
        case GammaSpec::Kind::Table: return expert::GammaSchedule(c.gamma.segments, c.steps);
        case GammaSpec::Kind::Constant: return expert::GammaSchedule::constant(c.gamma.values, c.steps);
        case GammaSpec::Kind::Scalability: {
            std::vector<double> g(c.robots);
            for (std::size_t i = 0; i < c.robots; ++i) {
                // Always draw, so robot i's value does not depend on N.
                const double inserted = rng.uniform(0.0, c.gamma.inserted_range) * c.gamma.inserted_scale;
                g[i] = inserted;
            }
            g.front() = c.gamma.low;
            if (c.robots > 1) {
                g.back() = c.gamma.high;
            }
            return expert::GammaSchedule::constant(std::move(g), c.steps);
        }
    }
    fail("unhandled gamma kind");
}

comm::BaseGraph build_topology(const ScenarioConfig& c) {
    switch (c.topology.kind) {
        case TopologySpec::Kind::Path: return comm::BaseGraph::path(c.robots);
        case TopologySpec::Kind::Ring: return comm::BaseGraph::ring(c.robots);
        case TopologySpec::Kind::Complete: return comm::BaseGraph::complete(c.robots);
        case TopologySpec::Kind::Edges: return comm::BaseGraph(c.robots, c.topology.edges);
    }
    fail("unhandled topology kind");
}

}  // namespace d2eal::scenario
