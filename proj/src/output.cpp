#include "d2eal/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace d2eal::output {

using nlohmann::json;

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json check_json(const audit::Check& c) {
    return {{"empirical", c.empirical}, {"bound", c.bound}, {"holds", c.holds}};
}

json bounds_json(const audit::BoundAudit& a) {
    json robots = json::array();
    for (const audit::RobotBounds& b : a.robots) {
        robots.push_back({
            {"robot", b.robot},
            {"degree0", b.degree0},
            {"expert_total", b.expert_total},
            {"persistence_total", b.persistence_total},
            {"individual_total", b.individual_total},
            {"social_total", b.social_total},
            {"best_neighbor", b.best_neighbor},
            {"individual", check_json(b.individual)},
            {"social", check_json(b.social)},
            {"global_individual", check_json(b.global_individual)},
            {"best_expert", check_json(b.best_expert)},
            {"global_social", check_json(b.global_social)},
            {"optimal_eta_w", b.optimal_eta_w},
        });
    }
    return {
        {"reset_enabled", a.reset_enabled},
        {"horizon", a.horizon},
        {"eta_alpha", a.eta_alpha},
        {"eta_w", a.eta_w},
        {"lipschitz", a.lipschitz},
        {"delta_o", a.delta_o},
        {"best_expert", a.best_expert},
        {"best_individual", a.best_individual},
        {"sublinear_fit", {{"fitted", a.fit.fitted}, {"c0", a.fit.c0}, {"alpha", a.fit.alpha}}},
        {"sublinear_term", a.sublinear_term},
        {"assumption1_violation_fraction", a.assumption1_violation_fraction},
        {"optimal_eta_alpha", a.optimal_eta_alpha},
        {"lemma_violations", a.lemma_violations},
        {"global_violations", a.global_violations},
        {"robots", robots},
    };
}

json convergence_json(const audit::ConvergenceAudit& c) {
    json robots = json::array();
    for (const audit::RobotConvergence& r : c.robots) {
        robots.push_back({
            {"robot", r.robot},
            {"best_agent", r.best_agent},
            {"final_weight", r.final_weight},
            {"crossing_step", r.crossing_step ? json(*r.crossing_step) : json(nullptr)},
            {"margin", opt_json(r.margin)},
            {"converged", r.converged},
            {"trajectory", r.trajectory},
        });
    }
    return {
        {"threshold", c.threshold},
        {"all_converged", c.all_converged},
        {"crossing_step", c.crossing_step ? json(*c.crossing_step) : json(nullptr)},
        {"robots", robots},
    };
}

json designated_json(const DesignatedConvergence& d) {
    return {
        {"agents", d.scenario.agents},
        {"best_agent", d.scenario.best_agent},
        {"margin", d.scenario.margin},
        {"eta_w", d.scenario.eta_w},
        {"eta_alpha", d.scenario.eta_alpha},
        {"steps", d.scenario.steps},
        {"closed_form_steps", d.closed_form_steps},
        {"step_limit", d.step_limit},
        {"within_limit", d.within_limit},
        {"result", convergence_json(d.result)},
    };
}

json config_json(const scenario::ScenarioConfig& c) { return json::parse(scenario::dump_config(c)); }

}  // namespace

std::string format_double(double v) {
    if (!std::isfinite(v)) {
        return {};
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_steps_csv(std::ostream& out, std::span<const sim::StepLog> log) {
    const std::size_t n = log.empty() ? 0 : log.front().robots.size();
    out << "t,robot,x,y,heading,target_x,target_y,expert_loss,persistence_loss,individual_loss,social_loss,"
           "alpha,w_hat_self,nrmcnt,expert_x,expert_y,individual_x,individual_y,social_x,social_y,"
           "social_tau_x,social_tau_y,neighbors";
    for (std::size_t j = 0; j < n; ++j) {
        out << ",w_" << j;
    }
    out << ",flags\n";
    for (const sim::StepLog& row : log) {
        for (std::size_t i = 0; i < n; ++i) {
            const sim::RobotLog& r = row.robots[i];
            out << row.t << ',' << i << ',' << format_double(r.pose.position.x) << ','
                << format_double(r.pose.position.y) << ',' << format_double(r.pose.heading) << ','
                << format_double(row.target.x) << ',' << format_double(row.target.y) << ',' << opt(r.expert_loss)
                << ',' << opt(r.persistence_loss) << ',' << opt(r.individual_loss) << ',' << opt(r.social_loss)
                << ',' << opt(r.alpha) << ',' << opt(r.w_hat_self) << ',';
            if (r.w_hat_self) {
                out << r.nrmcnt;
            }
            out << ',' << format_double(r.expert.x) << ',' << format_double(r.expert.y) << ','
                << format_double(r.individual.x) << ',' << format_double(r.individual.y) << ','
                << format_double(r.social.x) << ',' << format_double(r.social.y) << ','
                << format_double(r.social_tau.x) << ',' << format_double(r.social_tau.y) << ',';
            for (std::size_t k = 0; k < r.neighborhood.size(); ++k) {
                out << (k ? ";" : "") << r.neighborhood[k];
            }
            for (std::size_t j = 0; j < n; ++j) {
                out << ',';
                if (!r.weights.empty()) {
                    out << format_double(r.weights[j]);
                }
            }
            out << ',' << r.flags << '\n';
        }
    }
}

void write_linkdrops_csv(std::ostream& out, std::span<const std::size_t> dropped_per_step) {
    out << "t,dropped\n";
    for (std::size_t t = 0; t < dropped_per_step.size(); ++t) {
        out << t << ',' << dropped_per_step[t] << '\n';
    }
}

void write_linkdrop_histogram_csv(std::ostream& out, std::span<const std::size_t> dropped_per_step,
                                  std::size_t edges) {
    std::vector<std::size_t> counts(edges + 1, 0);
    std::size_t steps = 0;
    for (std::size_t t = 1; t < dropped_per_step.size(); ++t) {
        ++counts.at(dropped_per_step[t]);
        ++steps;
    }
    out << "dropped,steps,percent\n";
    for (std::size_t k = 0; k <= edges; ++k) {
        const double pct = steps ? 100.0 * static_cast<double>(counts[k]) / static_cast<double>(steps) : 0.0;
        out << k << ',' << counts[k] << ',' << format_double(pct) << '\n';
    }
}

void write_comparison_csv(std::ostream& out, std::span<const sim::Campaign> campaigns) {
    const std::size_t n = campaigns.empty() ? 0 : campaigns.front().mean_robot_total.size();
    out << "strategy,runs,failed_runs,total_mean,total_std";
    for (std::size_t i = 0; i < n; ++i) {
        out << ",robot_" << i << "_mean";
    }
    out << '\n';
    for (const sim::Campaign& c : campaigns) {
        out << fusion::to_string(c.strategy) << ',' << c.runs.size() << ',' << c.failed.size() << ','
            << format_double(c.mean_total) << ',' << format_double(c.std_total);
        for (double v : c.mean_robot_total) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

void write_curves_csv(std::ostream& out, std::span<const sim::Campaign> campaigns) {
    const std::size_t n = campaigns.empty() ? 0 : campaigns.front().mean_robot_total.size();
    out << "strategy,t,total_mean,total_std";
    for (std::size_t i = 0; i < n; ++i) {
        out << ",robot_" << i << "_mean,robot_" << i << "_std";
    }
    out << '\n';
    for (const sim::Campaign& c : campaigns) {
        for (std::size_t t = 0; t < c.mean_curve.size(); ++t) {
            out << fusion::to_string(c.strategy) << ',' << t << ',' << format_double(c.mean_total_curve[t]) << ','
                << format_double(c.std_total_curve[t]);
            for (std::size_t i = 0; i < n; ++i) {
                out << ',' << format_double(c.mean_curve[t][i]) << ',' << format_double(c.std_curve[t][i]);
            }
            out << '\n';
        }
    }
}

void write_sweep_csv(std::ostream& out, std::span<const sim::SweepCell> cells) {
    out << "robots,strategy,runs,failed_runs,per_robot_mean,per_robot_std,reliability_cost\n";
    for (const sim::SweepCell& c : cells) {
        out << c.robots << ',' << fusion::to_string(c.strategy) << ',' << c.runs << ',' << c.failed_runs << ','
            << format_double(c.per_robot_mean) << ',' << format_double(c.per_robot_std) << ','
            << format_double(c.reliability_cost) << '\n';
    }
}

std::string summary_json(const sim::RunSummary& s, const scenario::ScenarioConfig& config) {
    const bool learning = s.strategy == fusion::Strategy::D2EAL;
    json robots = json::array();
    for (std::size_t i = 0; i < s.totals.size(); ++i) {
        const sim::RobotTotals& t = s.totals[i];
        robots.push_back({
            {"robot", i},
            {"gamma_initial", s.gamma_initial[i]},
            {"expert_total", t.expert},
            {"persistence_total", learning ? json(t.persistence) : json(nullptr)},
            {"individual_total", t.individual},
            {"social_total", t.social},
        });
    }
    json doc{
        {"strategy", std::string(fusion::to_string(s.strategy))},
        {"seed", s.seed},
        {"robots", s.robots},
        {"steps", s.steps},
        {"total_social_loss", s.total_social},
        {"delta_o", s.delta_o},
        {"dropped_links", s.dropped_links},
        {"flags_seen", describe_flags(s.flags_seen)},
        {"per_robot", robots},
        {"config", config_json(config)},
    };
    return doc.dump(2) + "\n";
}

std::string campaign_json(const sim::Campaign& c, const scenario::ScenarioConfig& config) {
    json failed = json::array();
    for (const sim::FailedRun& f : c.failed) {
        failed.push_back({{"seed", f.seed}, {"message", f.message}});
    }
    json runs = json::array();
    for (const sim::RunSummary& r : c.runs) {
        std::vector<double> per_robot;
        for (const sim::RobotTotals& t : r.totals) {
            per_robot.push_back(t.social);
        }
        runs.push_back({{"seed", r.seed}, {"total_social_loss", r.total_social}, {"per_robot", per_robot}});
    }
    json doc{
        {"strategy", std::string(fusion::to_string(c.strategy))},
        {"requested_runs", c.requested_runs},
        {"successful_runs", c.runs.size()},
        {"failed", failed},
        {"mean_total", c.mean_total},
        {"std_total", c.std_total},
        {"mean_robot_total", c.mean_robot_total},
        {"runs", runs},
        {"config", config_json(config)},
    };
    return doc.dump(2) + "\n";
}

DesignatedConvergence designated_convergence(const audit::ConvergenceScenario& scenario) {
    DesignatedConvergence d;
    d.scenario = scenario;
    const std::vector<sim::StepLog> log = audit::convergence_scenario_log(scenario);
    d.result = audit::audit_convergence(log);
    d.closed_form_steps = audit::convergence_steps(scenario.agents, scenario.eta_w, scenario.margin);
    d.step_limit = static_cast<int>(std::floor(1.1 * d.closed_form_steps));
    d.within_limit = d.result.all_converged && d.result.crossing_step && *d.result.crossing_step <= d.step_limit;
    return d;
}

std::string audit_json(std::span<const RunAudit> runs, const DesignatedConvergence& designated) {
    json list = json::array();
    std::size_t configured = 0;
    std::size_t lemma_scope = 0;
    for (const RunAudit& r : runs) {
        configured += r.configured.lemma_violations;
        lemma_scope += r.lemma_scope.lemma_violations;
        list.push_back({
            {"seed", r.seed},
            {"configured", bounds_json(r.configured)},
            {"lemma_scope", bounds_json(r.lemma_scope)},
            {"convergence", convergence_json(r.convergence)},
        });
    }
    json doc{
        {"applicable", true},
        {"lemma_violations_configured", configured},
        {"lemma_violations_lemma_scope", lemma_scope},
        {"runs", list},
        {"designated_convergence", designated_json(designated)},
    };
    return doc.dump(2) + "\n";
}

std::string audit_not_applicable_json(fusion::Strategy strategy, const DesignatedConvergence& designated) {
    json doc{
        {"applicable", false},
        {"reason", "strategy " + std::string(fusion::to_string(strategy)) + " has no learning weights"},
        {"designated_convergence", designated_json(designated)},
    };
    return doc.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

}  // namespace d2eal::output
