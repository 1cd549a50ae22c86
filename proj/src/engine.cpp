#include "d2eal/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace d2eal::engine {

void LearningConfig::validate() const {
    if (!(eta_alpha > 0.0) || !(eta_w > 0.0) || !std::isfinite(eta_alpha) || !std::isfinite(eta_w)) {
        throw Error(ErrorCode::ConfigError, "learning rates must be positive and finite");
    }
    if (!(loss_scale > 0.0) || !std::isfinite(loss_scale)) {
        throw Error(ErrorCode::ConfigError, "loss scale must be positive");
    }
    if (reset_period < 0) {
        throw Error(ErrorCode::ConfigError, "reset period must be >= 1 (or 0 to disable)");
    }
    if (!(delta >= 0.0 && delta < 1.0)) {
        throw Error(ErrorCode::ConfigError, "normalization delta must lie in [0, 1)");
    }
}

double mixing_alpha(const AgentWeights& w, double delta) noexcept {
    if (w.alpha_count == w.alpha_prime_count || delta <= 0.0) {
        const double sum = w.alpha_hat + w.alpha_hat_prime;
        return sum > 0.0 ? w.alpha_hat / sum : 0.5;
    }
    // alpha = 1 / (1 + a'/a * delta^(c' - c)), evaluated in logs.
    const double log_ratio = std::log(w.alpha_hat_prime) - std::log(w.alpha_hat) +
                             static_cast<double>(w.alpha_prime_count - w.alpha_count) * std::log(delta);
    if (log_ratio > 700.0) {
        return 0.0;
    }
    return 1.0 / (1.0 + std::exp(log_ratio));
}

Vec2 individual_predict(const AgentWeights& weights, const Vec2& expert, const Vec2& social_prev,
                        double delta) noexcept {
    const double a = mixing_alpha(weights, delta);
    return a * expert + (1.0 - a) * social_prev;
}

Vec2 individual_predict_tau(const AgentWeights& weights, const Vec2& expert_tau, const Vec2& social_prev_tau,
                            double delta) noexcept {
    return individual_predict(weights, expert_tau, social_prev_tau, delta);
}

std::vector<bool> excluded_by_counter(std::span<const std::int64_t> counters) {
    std::vector<bool> excluded(counters.size(), false);
    if (counters.empty()) {
        return excluded;
    }
    const std::int64_t lowest = *std::min_element(counters.begin(), counters.end());
    for (std::size_t k = 0; k < counters.size(); ++k) {
        excluded[k] = counters[k] > lowest;
    }
    return excluded;
}

SocialResult social_predict(const Message& own, std::span<const Message> inbox) {
    std::vector<const Message*> members;
    members.reserve(inbox.size() + 1);
    members.push_back(&own);
    for (const Message& m : inbox) {
        members.push_back(&m);
    }
    std::sort(members.begin(), members.end(),
              [](const Message* a, const Message* b) { return a->sender < b->sender; });
    for (std::size_t k = 1; k < members.size(); ++k) {
        if (members[k]->sender == members[k - 1]->sender) {
            throw Error(ErrorCode::InvalidArgument,
                        "duplicate sender " + std::to_string(members[k]->sender) + " in neighbourhood");
        }
    }

    std::vector<std::int64_t> counters;
    counters.reserve(members.size());
    for (const Message* m : members) {
        counters.push_back(m->nrmcnt);
    }
    const std::vector<bool> excluded = excluded_by_counter(counters);

    SocialResult out;
    out.weights.reserve(members.size());
    double total = 0.0;
    for (std::size_t k = 0; k < members.size(); ++k) {
        const double w = excluded[k] ? 0.0 : members[k]->w_hat_self;
        out.weights.emplace_back(members[k]->sender, w);
        total += w;
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        const double uniform = 1.0 / static_cast<double>(members.size());
        for (auto& entry : out.weights) {
            entry.second = uniform;
        }
        out.flags |= kFlagWeightCollapse;
    } else {
        for (auto& entry : out.weights) {
            entry.second /= total;
        }
    }

    // Fixed ascending-agent accumulation order.
    for (std::size_t k = 0; k < members.size(); ++k) {
        const double w = out.weights[k].second;
        out.one_step += w * members[k]->individual_1;
        out.tau_step += w * members[k]->individual_tau;
    }
    return out;
}

AgentWeights learn_from_losses(AgentWeights weights, const Losses& losses, double eta_alpha, double eta_w) noexcept {
    weights.alpha_hat *= std::exp(-eta_alpha * losses.expert);
    weights.alpha_hat_prime *= std::exp(-eta_alpha * losses.persistence);
    weights.w_hat_self *= std::exp(-eta_w * losses.individual);
    return weights;
}

AgentWeights learn(AgentWeights weights, const Vec2& expert_prev, const Vec2& social_prev,
                   const Vec2& individual_prev, const Vec2& outcome, double eta_alpha, double eta_w,
                   double loss_scale) {
    Losses l;
    l.expert = loss(expert_prev, outcome, loss_scale);
    l.persistence = loss(social_prev, outcome, loss_scale);
    l.individual = loss(individual_prev, outcome, loss_scale);
    return learn_from_losses(weights, l, eta_alpha, eta_w);
}

AgentWeights periodic_reset(AgentWeights weights, int step, int period) noexcept {
    if (period > 0 && step > 0 && step % period == 0) {
        return AgentWeights{};
    }
    return weights;
}

NormalizeResult normalize_weights(AgentWeights w, double delta) noexcept {
    NormalizeResult out{w, false};
    if (delta <= 0.0) {
        return out;
    }
    auto rescale = [&](double& value, std::int64_t& counter) {
        if (value <= delta) {
            value /= delta;
            ++counter;
            out.rescaled = true;
        }
    };
    rescale(out.weights.w_hat_self, out.weights.nrmcnt);
    rescale(out.weights.alpha_hat, out.weights.alpha_count);
    rescale(out.weights.alpha_hat_prime, out.weights.alpha_prime_count);
    return out;
}

// ---------------------------------------------------------------------------

Agent::Agent(std::size_t id, LearningConfig config) : id_(id), config_(config) {
    config_.validate();
    message_.sender = id_;
}

Losses Agent::observe(int step, const Vec2& outcome) {
    if (!started_) {
        throw Error(ErrorCode::InvalidArgument, "observe called before the first prediction");
    }
    flags_ = 0;
    Losses l;
    l.expert = loss(expert_prev_, outcome, config_.loss_scale);
    l.persistence = loss(social_mixed_prev_, outcome, config_.loss_scale);
    l.individual = loss(message_.individual_1, outcome, config_.loss_scale);
    l.social = loss(social_prev_, outcome, config_.loss_scale);

    weights_ = learn_from_losses(weights_, l, config_.eta_alpha, config_.eta_w);
    weights_ = periodic_reset(weights_, step, config_.reset_period);
    const NormalizeResult norm = normalize_weights(weights_, config_.delta);
    weights_ = norm.weights;
    if (norm.rescaled) {
        flags_ |= kFlagNormalized;
    }
    return l;
}

const Message& Agent::predict_individual(const Vec2& expert_1, const Vec2& expert_tau) {
    if (!started_) {
        social_prev_ = expert_1;
        social_tau_prev_ = expert_tau;
        started_ = true;
    }
    message_.individual_1 = individual_predict(weights_, expert_1, social_prev_, config_.delta);
    message_.individual_tau = individual_predict_tau(weights_, expert_tau, social_tau_prev_, config_.delta);
    message_.w_hat_self = weights_.w_hat_self;
    message_.nrmcnt = weights_.nrmcnt;
    expert_prev_ = expert_1;
    social_mixed_prev_ = social_prev_;
    return message_;
}

const SocialResult& Agent::fuse(std::span<const Message> inbox) {
    social_ = social_predict(message_, inbox);
    flags_ |= social_.flags;
    social_prev_ = social_.one_step;
    social_tau_prev_ = social_.tau_step;
    return social_;
}

// ---------------------------------------------------------------------------

Network::Network(std::size_t agents, LearningConfig config) {
    if (agents == 0) {
        throw Error(ErrorCode::InvalidArgument, "network needs at least one agent");
    }
    agents_.reserve(agents);
    for (std::size_t i = 0; i < agents; ++i) {
        agents_.emplace_back(i, config);
    }
}

std::vector<AgentRecord> Network::step(int t, std::span<const Vec2> expert_1, std::span<const Vec2> expert_tau,
                                       const std::optional<Vec2>& outcome, const comm::CommSnapshot& snapshot) {
    const std::size_t n = agents_.size();
    if (expert_1.size() != n || expert_tau.size() != n || snapshot.nodes() != n) {
        throw Error(ErrorCode::InvalidArgument, "network step inputs do not match the agent count");
    }
    std::vector<AgentRecord> records(n);

    // Phase one: learn from y_t, then form and publish individual predictions.
    for (std::size_t i = 0; i < n; ++i) {
        Agent& agent = agents_[i];
        if (t > 0) {
            if (!outcome) {
                throw Error(ErrorCode::InvalidArgument, "outcome required after the first step");
            }
            records[i].losses = agent.observe(t, *outcome);
        }
        records[i].alpha = agent.alpha();
        agent.predict_individual(expert_1[i], expert_tau[i]);
    }

    // Barrier: every message exists before any fusion reads it.
    std::vector<Message> messages;
    messages.reserve(n);
    for (const Agent& agent : agents_) {
        messages.push_back(agent.message());
    }

    // Phase two: social fusion over Lambda_i(t).
    std::vector<Message> inbox;
    for (std::size_t i = 0; i < n; ++i) {
        inbox.clear();
        for (std::size_t j : snapshot.neighbors(i)) {
            inbox.push_back(messages[j]);
        }
        Agent& agent = agents_[i];
        agent.fuse(inbox);
        AgentRecord& rec = records[i];
        rec.weights = agent.weights();
        rec.individual_1 = agent.message().individual_1;
        rec.individual_tau = agent.message().individual_tau;
        rec.social = agent.social();
        rec.neighborhood = snapshot.closed_neighborhood(i);
        rec.flags = agent.flags();
    }
    return records;
}

}  // namespace d2eal::engine
