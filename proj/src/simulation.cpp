#include "d2eal/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace d2eal::sim {

namespace {

// RNG stream ids. Per-robot streams are offset by the robot index.
constexpr std::uint64_t kStreamLinks = 1;
constexpr std::uint64_t kStreamGamma = 2;
constexpr std::uint64_t kStreamSharedDrift = 3;
constexpr std::uint64_t kStreamDrift = 0x1000;
constexpr std::uint64_t kStreamNoise = 0x2000;
constexpr std::uint64_t kStreamNoiseTau = 0x3000;

void require_finite(const Vec2& v, int t, const char* what) {
    if (!v.is_finite()) {
        throw NumericalFailure(t, std::string("non-finite ") + what);
    }
}

std::vector<world::Pose> starting_poses(const scenario::ScenarioConfig& c) {
    std::vector<world::Pose> poses = world::initial_robot_poses(c.robots, c.formation.radius, c.formation.arc_span);
    const Mat2 r = world::rotation(c.target.initial.heading);
    for (world::Pose& p : poses) {
        p.position = c.target.initial.position + r * p.position;
        p.heading = world::wrap_angle(p.heading + c.target.initial.heading);
    }
    return poses;
}

class Simulator {
public:
    Simulator(const scenario::ScenarioConfig& c, const RunOptions& options)
        : c_(c),
          options_(options),
          n_(c.robots),
          base_(scenario::build_topology(c)),
          link_rng_(c.seed, kStreamLinks),
          shared_drift_rng_(c.seed, kStreamSharedDrift) {
        Rng gamma_rng(c.seed, kStreamGamma);
        schedule_ = scenario::build_gamma(c, gamma_rng);
        for (std::size_t i = 0; i < n_; ++i) {
            drift_rng_.emplace_back(c.seed, kStreamDrift + i);
            noise_rng_.emplace_back(c.seed, kStreamNoise + i);
            noise_tau_rng_.emplace_back(c.seed, kStreamNoiseTau + i);
        }
        drift_.assign(n_, {});
        poses_ = starting_poses(c);
        world::TargetState start{c.target.initial, 0};
        trajectory_ = world::target_trajectory(start, c.steps + c.tau, c.target.schedule, c.dt);
        if (c.fusion == fusion::Strategy::D2EAL) {
            network_.emplace(n_, c.learning);
        }
        prev_expert_.assign(n_, {});
        prev_social_.assign(n_, {});
        greedy_cumulative_.assign(n_, 0.0);
        expert_1_.resize(n_);
        expert_tau_.resize(n_);
        cov_1_.resize(n_);
        cov_tau_.resize(n_);
    }

    RunOutput run() {
        RunOutput out;
        RunSummary& s = out.summary;
        s.strategy = c_.fusion;
        s.seed = c_.seed;
        s.robots = n_;
        s.steps = c_.steps;
        s.totals.assign(n_, {});
        for (std::size_t i = 0; i < n_; ++i) {
            s.gamma_initial.push_back(schedule_.gamma(0, i));
        }
        if (options_.keep_log) {
            out.log.reserve(static_cast<std::size_t>(c_.steps) + 1);
        }
        if (options_.keep_curves) {
            out.cumulative.reserve(static_cast<std::size_t>(c_.steps) + 1);
        }
        out.dropped_per_step.reserve(static_cast<std::size_t>(c_.steps) + 1);

        std::vector<double> running(n_, 0.0);
        for (int t = 0; t <= c_.steps; ++t) {
            StepLog row = step(t);
            for (std::size_t i = 0; i < n_; ++i) {
                const RobotLog& r = row.robots[i];
                if (t > 0) {
                    RobotTotals& tot = s.totals[i];
                    tot.expert += *r.expert_loss;
                    tot.individual += *r.individual_loss;
                    tot.social += *r.social_loss;
                    if (r.persistence_loss) {
                        tot.persistence += *r.persistence_loss;
                    }
                    running[i] += *r.social_loss;
                }
                s.flags_seen |= r.flags;
            }
            if (t > 0) {
                s.delta_o += row.divergence;
            }
            s.dropped_links += row.dropped_links;
            out.dropped_per_step.push_back(row.dropped_links);
            if (options_.keep_curves) {
                out.cumulative.push_back(running);
            }
            if (options_.keep_log) {
                out.log.push_back(std::move(row));
            }
        }
        for (const RobotTotals& tot : s.totals) {
            s.total_social += tot.social;
        }
        return out;
    }

private:
    StepLog step(int t) {
        StepLog row;
        row.t = t;
        row.target = trajectory_[static_cast<std::size_t>(t)].pose.position;
        const comm::CommSnapshot snapshot = comm::sample_graph(base_, c_.link_drop_p, t, link_rng_);
        row.dropped_links = snapshot.dropped();
        row.robots.resize(n_);

        const Vec2 future_1 = trajectory_[static_cast<std::size_t>(t) + 1].pose.position;
        const Vec2 future_tau = trajectory_[static_cast<std::size_t>(t + c_.tau)].pose.position;
        for (std::size_t i = 0; i < n_; ++i) {
            const expert::DriftState d = c_.shared_drift_clock ? shared_drift_ : drift_[i];
            try {
                const auto p1 = expert::predict(future_1, i, t, 1, d, schedule_, noise_rng_[i]);
                expert_1_[i] = p1.mean;
                cov_1_[i] = p1.cov;
                if (c_.tau == 1) {
                    expert_tau_[i] = p1.mean;
                    cov_tau_[i] = p1.cov;
                } else {
                    const auto pt = expert::predict(future_tau, i, t, c_.tau, d, schedule_, noise_tau_rng_[i]);
                    expert_tau_[i] = pt.mean;
                    cov_tau_[i] = pt.cov;
                }
            } catch (const Error& e) {
                throw NumericalFailure(t, e.what());
            }
            require_finite(expert_1_[i], t, "expert prediction");
            require_finite(expert_tau_[i], t, "expert prediction");
        }
        if (t > 0) {
            row.divergence = expert::expert_divergence_bound(prev_expert_);
        }

        try {
            if (network_) {
                step_d2eal(t, row, snapshot);
            } else {
                step_baseline(t, row, snapshot);
            }
        } catch (const NumericalFailure&) {
            throw;
        } catch (const Error& e) {
            throw NumericalFailure(t, e.what());
        }

        for (std::size_t i = 0; i < n_; ++i) {
            RobotLog& r = row.robots[i];
            r.pose = poses_[i];
            r.expert = expert_1_[i];
            require_finite(r.individual, t, "individual prediction");
            require_finite(r.social, t, "social prediction");
            require_finite(r.social_tau, t, "social prediction");
            prev_expert_[i] = expert_1_[i];
            prev_social_[i] = r.social;
        }

        // Every robot steers from the same pre-step poses.
        std::vector<world::ControlInput> inputs(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            const world::RobotCommand cmd = world::robot_control(i, poses_, row.target, row.robots[i].social_tau,
                                                                 c_.control);
            inputs[i] = cmd.input;
            row.robots[i].flags |= cmd.flags;
        }
        for (std::size_t i = 0; i < n_; ++i) {
            poses_[i] = world::step_kinematics(poses_[i], inputs[i], c_.dt);
            require_finite(poses_[i].position, t, "robot pose");
        }

        if (c_.shared_drift_clock) {
            shared_drift_ = expert::advance_drift(shared_drift_, c_.drift_reset_p, shared_drift_rng_);
        } else {
            for (std::size_t i = 0; i < n_; ++i) {
                drift_[i] = expert::advance_drift(drift_[i], c_.drift_reset_p, drift_rng_[i]);
            }
        }
        return row;
    }

    void step_d2eal(int t, StepLog& row, const comm::CommSnapshot& snapshot) {
        const std::optional<Vec2> outcome = t > 0 ? std::optional<Vec2>(row.target) : std::nullopt;
        const std::vector<engine::AgentRecord> records = network_->step(t, expert_1_, expert_tau_, outcome, snapshot);
        for (std::size_t i = 0; i < n_; ++i) {
            row.robots[i] = robot_log_from(records[i], n_);
        }
    }

    void step_baseline(int t, StepLog& row, const comm::CommSnapshot& snapshot) {
        const double scale = c_.learning.loss_scale;
        const int period = c_.learning.reset_period;
        if (t > 0) {
            for (std::size_t i = 0; i < n_; ++i) {
                RobotLog& r = row.robots[i];
                r.expert_loss = loss(prev_expert_[i], row.target, scale);
                r.individual_loss = r.expert_loss;
                r.social_loss = loss(prev_social_[i], row.target, scale);
                greedy_cumulative_[i] += *r.expert_loss;
                if (period > 0 && t % period == 0) {
                    greedy_cumulative_[i] = 0.0;
                }
            }
        }
        std::vector<fusion::FusionEntry> entries_1;
        std::vector<fusion::FusionEntry> entries_tau;
        for (std::size_t i = 0; i < n_; ++i) {
            RobotLog& r = row.robots[i];
            r.neighborhood = snapshot.closed_neighborhood(i);
            entries_1.clear();
            entries_tau.clear();
            for (std::size_t j : r.neighborhood) {
                entries_1.push_back({j, expert_1_[j], cov_1_[j], greedy_cumulative_[j]});
                entries_tau.push_back({j, expert_tau_[j], cov_tau_[j], greedy_cumulative_[j]});
            }
            const fusion::FusedPrediction f1 = fusion::fuse(c_.fusion, entries_1, i, c_.fusion_options);
            const fusion::FusedPrediction ft =
                c_.tau == 1 ? f1 : fusion::fuse(c_.fusion, entries_tau, i, c_.fusion_options);
            r.individual = expert_1_[i];
            r.social = f1.mean;
            r.social_tau = ft.mean;
            r.flags = f1.flags | ft.flags;
            switch (c_.fusion) {
                case fusion::Strategy::NoComm:
                    r.weights.assign(n_, 0.0);
                    r.weights[i] = 1.0;
                    break;
                case fusion::Strategy::Mean:
                    r.weights.assign(n_, 0.0);
                    for (std::size_t j : r.neighborhood) {
                        r.weights[j] = 1.0 / static_cast<double>(r.neighborhood.size());
                    }
                    break;
                case fusion::Strategy::Greedy:
                    r.weights.assign(n_, 0.0);
                    r.weights[*f1.chosen] = 1.0;
                    break;
                default: break;
            }
        }
    }

    const scenario::ScenarioConfig& c_;
    RunOptions options_;
    std::size_t n_;
    comm::BaseGraph base_;
    expert::GammaSchedule schedule_;
    Rng link_rng_;
    Rng shared_drift_rng_;
    std::vector<Rng> drift_rng_;
    std::vector<Rng> noise_rng_;
    std::vector<Rng> noise_tau_rng_;
    std::vector<expert::DriftState> drift_;
    expert::DriftState shared_drift_{};
    std::vector<world::Pose> poses_;
    std::vector<world::TargetState> trajectory_;
    std::optional<engine::Network> network_;
    std::vector<Vec2> prev_expert_;
    std::vector<Vec2> prev_social_;
    std::vector<double> greedy_cumulative_;
    std::vector<Vec2> expert_1_;
    std::vector<Vec2> expert_tau_;
    std::vector<Mat2> cov_1_;
    std::vector<Mat2> cov_tau_;
};

struct Slot {
    std::optional<RunOutput> output;
    std::optional<FailedRun> failure;
    int failure_step{0};
};

}  // namespace

RobotLog robot_log_from(const engine::AgentRecord& rec, std::size_t agents) {
    RobotLog r;
    if (rec.losses) {
        r.expert_loss = rec.losses->expert;
        r.persistence_loss = rec.losses->persistence;
        r.individual_loss = rec.losses->individual;
        r.social_loss = rec.losses->social;
    }
    r.alpha = rec.alpha;
    r.w_hat_self = rec.weights.w_hat_self;
    r.nrmcnt = rec.weights.nrmcnt;
    r.individual = rec.individual_1;
    r.social = rec.social.one_step;
    r.social_tau = rec.social.tau_step;
    r.weights.assign(agents, 0.0);
    for (const auto& [j, w] : rec.social.weights) {
        r.weights.at(j) = w;
    }
    r.neighborhood = rec.neighborhood;
    r.flags = rec.flags;
    return r;
}

RunOutput run_once(const scenario::ScenarioConfig& config, const RunOptions& options) {
    config.validate();
    Simulator sim(config, options);
    return sim.run();
}

unsigned worker_count() {
    if (const char* env = std::getenv("D2EAL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

Campaign monte_carlo(const scenario::ScenarioConfig& config, int runs, unsigned threads, bool keep_curves) {
    config.validate();
    if (runs < 1) {
        throw Error(ErrorCode::ConfigError, "a campaign needs at least one run");
    }
    const auto count = static_cast<std::size_t>(runs);
    std::vector<Slot> slots(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;

    auto worker = [&] {
        for (std::size_t k = next.fetch_add(1); k < count; k = next.fetch_add(1)) {
            scenario::ScenarioConfig c = config;
            c.seed = config.seed + k;
            try {
                slots[k].output = run_once(c, {false, keep_curves});
            } catch (const NumericalFailure& e) {
                slots[k].failure = FailedRun{c.seed, e.what()};
                slots[k].failure_step = e.step();
            } catch (...) {
                std::lock_guard lock(fatal_mutex);
                if (!fatal) {
                    fatal = std::current_exception();
                }
            }
        }
    };
    const unsigned workers = std::min<std::size_t>(threads == 0 ? worker_count() : threads, count);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (std::thread& th : pool) {
            th.join();
        }
    }
    if (fatal) {
        std::rethrow_exception(fatal);
    }

    Campaign out;
    out.strategy = config.fusion;
    out.requested_runs = runs;
    std::vector<const RunOutput*> ok;
    for (const Slot& s : slots) {
        if (s.output) {
            ok.push_back(&*s.output);
            out.runs.push_back(s.output->summary);
        } else if (s.failure) {
            out.failed.push_back(*s.failure);
        }
    }
    if (out.failed.size() * 100 > count) {
        const Slot& first = *std::find_if(slots.begin(), slots.end(), [](const Slot& s) { return s.failure.has_value(); });
        throw NumericalFailure(first.failure_step, std::to_string(out.failed.size()) + " of " + std::to_string(count) +
                                                       " runs failed; first: " + first.failure->message);
    }
    if (ok.empty()) {
        return out;
    }

    const std::size_t n = config.robots;
    const double m = static_cast<double>(ok.size());
    out.mean_robot_total.assign(n, 0.0);
    for (const RunSummary& s : out.runs) {
        out.mean_total += s.total_social;
        for (std::size_t i = 0; i < n; ++i) {
            out.mean_robot_total[i] += s.totals[i].social;
        }
    }
    out.mean_total /= m;
    for (double& v : out.mean_robot_total) {
        v /= m;
    }
    for (const RunSummary& s : out.runs) {
        out.std_total += (s.total_social - out.mean_total) * (s.total_social - out.mean_total);
    }
    out.std_total = std::sqrt(out.std_total / m);

    if (keep_curves) {
        const std::size_t steps = ok.front()->cumulative.size();
        out.mean_curve.assign(steps, std::vector<double>(n, 0.0));
        out.std_curve.assign(steps, std::vector<double>(n, 0.0));
        out.mean_total_curve.assign(steps, 0.0);
        out.std_total_curve.assign(steps, 0.0);
        for (std::size_t t = 0; t < steps; ++t) {
            for (const RunOutput* r : ok) {
                double total = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    out.mean_curve[t][i] += r->cumulative[t][i];
                    total += r->cumulative[t][i];
                }
                out.mean_total_curve[t] += total;
            }
            for (std::size_t i = 0; i < n; ++i) {
                out.mean_curve[t][i] /= m;
            }
            out.mean_total_curve[t] /= m;
            for (const RunOutput* r : ok) {
                double total = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = r->cumulative[t][i] - out.mean_curve[t][i];
                    out.std_curve[t][i] += d * d;
                    total += r->cumulative[t][i];
                }
                const double d = total - out.mean_total_curve[t];
                out.std_total_curve[t] += d * d;
            }
            for (std::size_t i = 0; i < n; ++i) {
                out.std_curve[t][i] = std::sqrt(out.std_curve[t][i] / m);
            }
            out.std_total_curve[t] = std::sqrt(out.std_total_curve[t] / m);
        }
    }
    return out;
}

std::vector<Campaign> compare(const scenario::ScenarioConfig& config, int runs, unsigned threads, bool keep_curves) {
    std::vector<Campaign> out;
    for (fusion::Strategy s : fusion::all_strategies()) {
        scenario::ScenarioConfig c = config;
        c.fusion = s;
        out.push_back(monte_carlo(c, runs, threads, keep_curves));
    }
    return out;
}

double reliability_cost(double c, std::size_t robots) {
    if (robots == 0) {
        throw Error(ErrorCode::InvalidArgument, "reliability cost needs at least one robot");
    }
    return c / static_cast<double>(robots);
}

scenario::ScenarioConfig sweep_config(const scenario::ScenarioConfig& base, std::size_t robots) {
    scenario::ScenarioConfig c = base;
    c.robots = robots;
    c.topology = {};
    if (c.gamma.kind != scenario::GammaSpec::Kind::Scalability) {
        c.gamma = scenario::GammaSpec{};
        c.gamma.kind = scenario::GammaSpec::Kind::Scalability;
    }
    return c;
}

std::vector<SweepCell> scalability_sweep(const scenario::ScenarioConfig& base,
                                         const std::vector<std::size_t>& robot_counts,
                                         const std::vector<fusion::Strategy>& strategies, int runs,
                                         unsigned threads) {
    std::vector<SweepCell> out;
    for (std::size_t n : robot_counts) {
        if (n < 2) {
            throw Error(ErrorCode::ConfigError, "sweep robot counts must be >= 2");
        }
        for (fusion::Strategy s : strategies) {
            scenario::ScenarioConfig c = sweep_config(base, n);
            c.fusion = s;
            const Campaign camp = monte_carlo(c, runs, threads, false);
            SweepCell cell;
            cell.robots = n;
            cell.strategy = s;
            cell.runs = static_cast<int>(camp.runs.size());
            cell.failed_runs = camp.failed.size();
            cell.reliability_cost = reliability_cost(base.reliability_cost, n);
            const double m = static_cast<double>(camp.runs.size());
            for (const RunSummary& r : camp.runs) {
                cell.per_robot_mean += r.total_social / static_cast<double>(n);
            }
            cell.per_robot_mean /= m;
            for (const RunSummary& r : camp.runs) {
                const double d = r.total_social / static_cast<double>(n) - cell.per_robot_mean;
                cell.per_robot_std += d * d;
            }
            cell.per_robot_std = std::sqrt(cell.per_robot_std / m);
            out.push_back(cell);
        }
    }
    return out;
}

}  // namespace d2eal::sim
