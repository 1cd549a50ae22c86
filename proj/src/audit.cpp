#include "d2eal/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace d2eal::audit {

namespace {

Check check(double empirical, double bound) { return {empirical, bound, empirical <= bound}; }

void require_log(std::span<const sim::StepLog> log) {
    if (log.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "audit needs a log with at least one scored step");
    }
}

std::size_t argmin(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

double individual_bound(double eta_alpha, int horizon) {
    return eta_alpha * horizon / 8.0 + std::log(2.0) / eta_alpha;
}

double social_bound(double eta_w, int horizon, std::size_t degree) {
    return eta_w * horizon / 8.0 + std::log(static_cast<double>(degree)) / eta_w;
}

double optimal_eta_alpha(int horizon) { return std::sqrt(8.0 * std::log(2.0) / horizon); }

double optimal_eta_w(int horizon, std::size_t degree) {
    return std::sqrt(8.0 * std::log(static_cast<double>(degree)) / horizon);
}

SublinearFit fit_sublinear(std::span<const double> cumulative) {
    SublinearFit out;
    if (cumulative.empty() || cumulative.back() <= 0.0) {
        return out;
    }
    const std::size_t n = cumulative.size();
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    double m = 0.0;
    for (std::size_t k = n / 2; k < n; ++k) {
        if (cumulative[k] <= 0.0) {
            continue;
        }
        const double x = std::log(static_cast<double>(k + 1));
        const double y = std::log(cumulative[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        m += 1.0;
    }
    const double denom = m * sxx - sx * sx;
    if (m < 2.0 || denom <= 0.0) {
        // Single usable point: treat the horizon value as linear growth.
        out.fitted = true;
        out.alpha = 0.0;
        out.c0 = cumulative.back() / static_cast<double>(n);
        return out;
    }
    const double slope = (m * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / m;
    out.fitted = true;
    out.alpha = 1.0 - slope;
    out.c0 = std::exp(intercept);
    return out;
}

BoundAudit audit_bounds(std::span<const sim::StepLog> log, const scenario::ScenarioConfig& config) {
    require_log(log);
    const std::size_t n = log.front().robots.size();
    const comm::BaseGraph base = scenario::build_topology(config);
    const int horizon = static_cast<int>(log.size()) - 1;

    BoundAudit a;
    a.reset_enabled = config.learning.reset_period > 0;
    a.horizon = horizon;
    a.eta_alpha = config.learning.eta_alpha;
    a.eta_w = config.learning.eta_w;
    a.lipschitz = 1.0 / config.learning.loss_scale;
    a.optimal_eta_alpha = optimal_eta_alpha(horizon);

    std::vector<double> expert(n, 0.0);
    std::vector<double> persistence(n, 0.0);
    std::vector<double> individual(n, 0.0);
    std::vector<double> social(n, 0.0);
    std::vector<std::vector<double>> expert_curve(n);
    std::size_t shrink_violations = 0;
    for (std::size_t k = 1; k < log.size(); ++k) {
        const sim::StepLog& row = log[k];
        a.delta_o += row.divergence;
        for (std::size_t i = 0; i < n; ++i) {
            const sim::RobotLog& r = row.robots[i];
            if (!r.expert_loss || !r.persistence_loss || !r.individual_loss || !r.social_loss) {
                throw Error(ErrorCode::InvalidArgument, "bound audit needs the losses of a D2EAL run");
            }
            expert[i] += *r.expert_loss;
            persistence[i] += *r.persistence_loss;
            individual[i] += *r.individual_loss;
            social[i] += *r.social_loss;
            expert_curve[i].push_back(expert[i]);
            const auto& before = log[k - 1].robots[i].neighborhood;
            if (!std::includes(before.begin(), before.end(), r.neighborhood.begin(), r.neighborhood.end())) {
                ++shrink_violations;
            }
        }
    }
    a.assumption1_violation_fraction =
        static_cast<double>(shrink_violations) / (static_cast<double>(horizon) * static_cast<double>(n));
    a.best_expert = argmin(expert);
    a.best_individual = argmin(individual);
    a.fit = fit_sublinear(expert_curve[a.best_expert]);
    a.sublinear_term = a.fit.fitted ? a.fit.c0 * std::pow(static_cast<double>(horizon), 1.0 - a.fit.alpha) : 0.0;

    const double lemma1 = individual_bound(a.eta_alpha, horizon);
    const double divergence_term = a.lipschitz * a.delta_o;
    const double best_expert_total = expert[a.best_expert];
    const double best_individual_total = individual[a.best_individual];
    for (std::size_t i = 0; i < n; ++i) {
        RobotBounds b;
        b.robot = i;
        b.degree0 = base.degree(i);
        b.expert_total = expert[i];
        b.persistence_total = persistence[i];
        b.individual_total = individual[i];
        b.social_total = social[i];
        const auto& lambda = log.back().robots[i].neighborhood;
        b.best_neighbor = *std::min_element(lambda.begin(), lambda.end(), [&](std::size_t x, std::size_t y) {
            return individual[x] < individual[y] || (individual[x] == individual[y] && x < y);
        });
        const double lemma2 = social_bound(a.eta_w, horizon, b.degree0);
        b.individual = check(individual[i] - std::min(expert[i], persistence[i]), lemma1);
        b.social = check(social[i] - individual[b.best_neighbor], lemma2);
        b.global_individual = check(individual[i] - best_expert_total, lemma1 + divergence_term);
        b.best_expert = check(social[i] - best_expert_total, lemma1 + lemma2 + divergence_term);
        b.global_social =
            check(social[i] - best_individual_total, lemma1 + lemma2 + divergence_term + a.sublinear_term);
        b.optimal_eta_w = optimal_eta_w(horizon, b.degree0);
        a.lemma_violations += (b.individual.holds ? 0 : 1) + (b.social.holds ? 0 : 1);
        a.global_violations +=
            (b.global_individual.holds ? 0 : 1) + (b.best_expert.holds ? 0 : 1) + (b.global_social.holds ? 0 : 1);
        a.robots.push_back(b);
    }
    return a;
}

ConvergenceAudit audit_convergence(std::span<const sim::StepLog> log, double threshold) {
    ConvergenceAudit out;
    out.threshold = threshold;
    if (log.empty()) {
        return out;
    }
    const std::size_t n = log.front().robots.size();
    std::vector<double> individual(n, 0.0);
    std::vector<double> gap_sum(n, 0.0);
    std::vector<std::size_t> gap_count(n, 0);
    out.robots.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.robots[i].robot = i;
    }
    for (const sim::StepLog& row : log) {
        for (std::size_t j = 0; j < n; ++j) {
            if (row.robots[j].individual_loss) {
                individual[j] += *row.robots[j].individual_loss;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            const sim::RobotLog& r = row.robots[i];
            RobotConvergence& rc = out.robots[i];
            const auto& lambda = r.neighborhood;
            if (r.weights.empty() || lambda.empty()) {
                throw Error(ErrorCode::InvalidArgument, "convergence audit needs weight rows and neighbourhoods");
            }
            std::size_t best = lambda.front();
            for (std::size_t j : lambda) {
                if (individual[j] < individual[best]) {
                    best = j;
                }
            }
            rc.best_agent = best;
            const double w = r.weights[best];
            rc.trajectory.push_back(w);
            if (!rc.crossing_step && w >= threshold) {
                rc.crossing_step = row.t;
            }
            if (r.individual_loss && lambda.size() > 1) {
                double runner_up = std::numeric_limits<double>::infinity();
                for (std::size_t j : lambda) {
                    if (j != best && row.robots[j].individual_loss) {
                        runner_up = std::min(runner_up, *row.robots[j].individual_loss);
                    }
                }
                if (std::isfinite(runner_up) && row.robots[best].individual_loss) {
                    gap_sum[i] += runner_up - *row.robots[best].individual_loss;
                    ++gap_count[i];
                }
            }
        }
    }
    out.all_converged = true;
    for (std::size_t i = 0; i < n; ++i) {
        RobotConvergence& rc = out.robots[i];
        rc.final_weight = rc.trajectory.back();
        rc.converged = rc.final_weight >= threshold;
        if (gap_count[i] > 0) {
            rc.margin = gap_sum[i] / static_cast<double>(gap_count[i]);
        }
        out.all_converged = out.all_converged && rc.converged;
        if (rc.crossing_step) {
            out.crossing_step = std::max(out.crossing_step.value_or(0), *rc.crossing_step);
        }
    }
    if (!out.all_converged) {
        out.crossing_step.reset();
    }
    return out;
}

int convergence_steps(std::size_t agents, double eta_w, double margin, double threshold) {
    if (agents < 2 || !(eta_w > 0.0) || !(margin > 0.0) || !(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "convergence step count needs N >= 2 and positive rates");
    }
    return static_cast<int>(
        std::ceil(std::log(static_cast<double>(agents - 1) / (1.0 - threshold)) / (eta_w * margin)));
}

std::vector<sim::StepLog> convergence_scenario_log(const ConvergenceScenario& s) {
    if (s.best_agent >= s.agents || !(s.margin > 0.0 && s.margin < 1.0) || s.steps < 1) {
        throw Error(ErrorCode::InvalidArgument, "invalid convergence scenario");
    }
    engine::LearningConfig learning;
    learning.eta_alpha = s.eta_alpha;
    learning.eta_w = s.eta_w;
    learning.loss_scale = s.loss_scale;
    learning.reset_period = 0;
    engine::Network network(s.agents, learning);
    const comm::BaseGraph graph = comm::BaseGraph::complete(s.agents);
    const Vec2 offset{0.0, s.margin * s.loss_scale};

    auto truth = [&](int t) { return Vec2{s.target_step * t, 0.0}; };
    std::vector<sim::StepLog> log;
    std::vector<Vec2> experts(s.agents);
    for (int t = 0; t <= s.steps; ++t) {
        for (std::size_t i = 0; i < s.agents; ++i) {
            experts[i] = truth(t + 1) + (i == s.best_agent ? Vec2{} : offset);
        }
        const std::optional<Vec2> outcome = t > 0 ? std::optional<Vec2>(truth(t)) : std::nullopt;
        const auto records = network.step(t, experts, experts, outcome, comm::CommSnapshot::intact(graph, t));
        sim::StepLog row;
        row.t = t;
        row.target = truth(t);
        for (std::size_t i = 0; i < s.agents; ++i) {
            row.robots.push_back(sim::robot_log_from(records[i], s.agents));
            row.robots.back().expert = experts[i];
        }
        log.push_back(std::move(row));
    }
    return log;
}

}  // namespace d2eal::audit
