// Decentralized expert-assisted learning: per-agent individual prediction,
// neighbourhood exchange, social fusion and exponential-weight learning with
// periodic reset and counter-based weight normalization.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "d2eal/comm_graph.hpp"
#include "d2eal/flags.hpp"
#include "d2eal/geometry.hpp"

namespace d2eal::engine {

struct LearningConfig {
    double eta_alpha{2.0};
    double eta_w{2.0};
    double loss_scale{50.0};
    int reset_period{200};  ///< T_o; 0 disables the periodic reset
    double delta{1e-300};   ///< normalization threshold; 0 disables normalization

    void validate() const;
};

/// Unnormalized learning weights of one agent. The true value of each weight is
/// the stored value times delta^count; alpha_count / alpha_prime_count never
/// leave the agent, nrmcnt is exchanged with the self weight.
struct AgentWeights {
    double alpha_hat{1.0};
    double alpha_hat_prime{1.0};
    double w_hat_self{1.0};
    std::int64_t nrmcnt{0};
    std::int64_t alpha_count{0};
    std::int64_t alpha_prime_count{0};

    friend bool operator==(const AgentWeights&, const AgentWeights&) = default;
};

/// alpha_i(t) = alpha_hat / (alpha_hat + alpha_hat_prime), reconciled for the
/// private counters in the log domain so it never divides by zero.
[[nodiscard]] double mixing_alpha(const AgentWeights& weights, double delta = 1e-300) noexcept;

/// alpha * expert + (1 - alpha) * previous social prediction.
[[nodiscard]] Vec2 individual_predict(const AgentWeights& weights, const Vec2& expert, const Vec2& social_prev,
                                      double delta = 1e-300) noexcept;

/// Same convex form for the tau-step horizon; social_prev_tau is the agent's
/// previous tau-step social prediction.
[[nodiscard]] Vec2 individual_predict_tau(const AgentWeights& weights, const Vec2& expert_tau,
                                          const Vec2& social_prev_tau, double delta = 1e-300) noexcept;

struct Message {
    std::size_t sender{0};
    Vec2 individual_1;
    Vec2 individual_tau;
    double w_hat_self{1.0};
    std::int64_t nrmcnt{0};
};

struct SocialResult {
    Vec2 one_step;
    Vec2 tau_step;
    /// (agent, w_ij) for every j in Lambda_i, ascending by agent.
    std::vector<std::pair<std::size_t, double>> weights;
    unsigned flags{0};
};

/// Members whose counter exceeds the neighbourhood minimum.
[[nodiscard]] std::vector<bool> excluded_by_counter(std::span<const std::int64_t> counters);

/// Fuse own and neighbour individual predictions with w_ij = w_jj / sum.
/// The inbox must hold distinct senders other than own.sender.
[[nodiscard]] SocialResult social_predict(const Message& own, std::span<const Message> inbox);

struct Losses {
    double expert{0};       ///< l(f_t, y_t)
    double persistence{0};  ///< l(f^_{t-1}, y_t)
    double individual{0};   ///< l(f-_t, y_t)
    double social{0};       ///< l(f^_t, y_t)
};

/// Exponential-weights update from already computed losses.
[[nodiscard]] AgentWeights learn_from_losses(AgentWeights weights, const Losses& losses, double eta_alpha,
                                             double eta_w) noexcept;

/// Exponential-weights update from the three predictions that were scored on
/// `outcome`: expert f_t, previous social f^_{t-1}, individual f-_t.
[[nodiscard]] AgentWeights learn(AgentWeights weights, const Vec2& expert_prev, const Vec2& social_prev,
                                 const Vec2& individual_prev, const Vec2& outcome, double eta_alpha, double eta_w,
                                 double loss_scale);

/// All weights back to 1 and counters to 0 when t > 0 and t % period == 0.
[[nodiscard]] AgentWeights periodic_reset(AgentWeights weights, int step, int period) noexcept;

struct NormalizeResult {
    AgentWeights weights;
    bool rescaled{false};
};

/// Rescale any weight that fell to or below delta by 1/delta and bump its counter.
[[nodiscard]] NormalizeResult normalize_weights(AgentWeights weights, double delta) noexcept;

/// One agent running the algorithm. Each step: observe() (skipped at t == 0),
/// then predict_individual(), then fuse() with the neighbours' messages.
class Agent {
public:
    Agent(std::size_t id, LearningConfig config);

    /// Score the previous predictions on y_t, learn, reset, normalize.
    Losses observe(int step, const Vec2& outcome);

    /// Form individual predictions and the outgoing message. At the first call
    /// the previous social predictions are initialized to the expert's.
    const Message& predict_individual(const Vec2& expert_1, const Vec2& expert_tau);

    /// Social fusion over the messages received from the current neighbours.
    const SocialResult& fuse(std::span<const Message> inbox);

    [[nodiscard]] std::size_t id() const noexcept { return id_; }
    [[nodiscard]] const AgentWeights& weights() const noexcept { return weights_; }
    [[nodiscard]] double alpha() const noexcept { return mixing_alpha(weights_, config_.delta); }
    [[nodiscard]] const Message& message() const noexcept { return message_; }
    [[nodiscard]] const SocialResult& social() const noexcept { return social_; }
    [[nodiscard]] unsigned flags() const noexcept { return flags_; }

private:
    std::size_t id_;
    LearningConfig config_;
    AgentWeights weights_;
    bool started_{false};
    unsigned flags_{0};

    Vec2 expert_prev_;         // f_t
    Vec2 social_mixed_prev_;   // f^_{t-1}, the second term inside f-_t
    Vec2 social_prev_;         // f^_t
    Vec2 social_tau_prev_;     // f^p_{t-1+tau}
    Message message_;
    SocialResult social_;
};

struct AgentRecord {
    std::optional<Losses> losses;  ///< absent at t == 0
    double alpha{0.5};             ///< alpha used for this step's individual predictions
    AgentWeights weights;          ///< after learning, reset and normalization
    Vec2 individual_1;
    Vec2 individual_tau;
    SocialResult social;
    std::vector<std::size_t> neighborhood;  ///< Lambda_i(t)
    unsigned flags{0};
};

/// All agents with a synchronous exchange over the step's snapshot. Phase one
/// (observe + individual) runs for every agent before any phase-two fusion.
class Network {
public:
    Network(std::size_t agents, LearningConfig config);

    std::vector<AgentRecord> step(int t, std::span<const Vec2> expert_1, std::span<const Vec2> expert_tau,
                                  const std::optional<Vec2>& outcome, const comm::CommSnapshot& snapshot);

    [[nodiscard]] std::size_t size() const noexcept { return agents_.size(); }
    [[nodiscard]] const Agent& agent(std::size_t i) const { return agents_.at(i); }

private:
    std::vector<Agent> agents_;
};

}  // namespace d2eal::engine
