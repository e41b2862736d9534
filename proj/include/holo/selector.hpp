#pragma once

// Model-selection policies. The heuristic policy is simply pool order (see
// reasoner.hpp); this header provides the learned alternative: a deterministic
// count-feature state encoder, the step reward, a small feed-forward Q
// function trained with DQN (replay buffer, target network, epsilon-greedy
// exploration), and checkpoint/serialization support.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "holo/builder.hpp"
#include "holo/equation.hpp"
#include "holo/hologram.hpp"
#include "holo/model.hpp"
#include "holo/reasoner.hpp"

namespace holo {

// ---------------------------------------------------------------------------
// State encoding
// ---------------------------------------------------------------------------
//
// A fixed-length feature vector over the global hologram and equation set:
//   [0..7]   vertex counts: Point, Line, Angle, Arc, Circle, Polygon3,
//            Polygon4, Polygon5+           (each squashed by min(c,16)/16)
//   [8..13]  edge counts per kind          (min(c,32)/32)
//   [14..25] known/unknown slot counts per slot type (min(c,16)/16)
//   [26..32] target one-hot: one slot bit for a value target, last bit for
//            an expression target
//   [33]     step index / max steps
// Equal holograms (same counters) encode identically.

constexpr int kStateDim = 34;

inline std::vector<double> encode_state(const Hologram& g, const EquationSet& es, int step,
                                        int max_steps) {
    (void)es;
    std::vector<double> s(kStateDim, 0.0);
    auto squash = [](int c, double cap) { return std::min((double)c, cap) / cap; };

    int vk[8] = {0};
    for (const auto& v : g.vertices()) {
        switch (v.kind.tag) {
            case VertexKind::Point: ++vk[0]; break;
            case VertexKind::Line: ++vk[1]; break;
            case VertexKind::Angle: ++vk[2]; break;
            case VertexKind::Arc: ++vk[3]; break;
            case VertexKind::Circle: ++vk[4]; break;
            case VertexKind::Polygon:
                ++vk[v.kind.arity == 3 ? 5 : v.kind.arity == 4 ? 6 : 7];
                break;
        }
    }
    for (int i = 0; i < 8; ++i) s[i] = squash(vk[i], 16.0);

    int ek[kEdgeKindCount] = {0};
    for (const auto& e : g.edges()) ++ek[(int)e.kind];
    for (int i = 0; i < kEdgeKindCount; ++i) s[8 + i] = squash(ek[i], 32.0);

    int known[kSlotCount] = {0};
    int unknown[kSlotCount] = {0};
    for (const auto& v : g.vertices()) {
        for (const auto& [slot, attr] : v.attrs) {
            ++(attr.known() ? known : unknown)[(int)slot];
        }
    }
    for (int i = 0; i < kSlotCount; ++i) {
        s[14 + 2 * i] = squash(known[i], 16.0);
        s[14 + 2 * i + 1] = squash(unknown[i], 16.0);
    }

    const Target& t = g.target();
    if (t.kind == Target::ValueOf) {
        s[26 + (int)t.slot] = 1.0;
    } else if (t.kind == Target::ExpressionOf) {
        s[32] = 1.0;
    }
    s[33] = max_steps > 0 ? std::min(1.0, (double)step / (double)max_steps) : 0.0;
    return s;
}

// ---------------------------------------------------------------------------
// Reward
// ---------------------------------------------------------------------------

struct RewardParams {
    double alpha = 0.1;  // time-penalty scale, in [0, 1]
    double sigma = 1.0;  // time scale in seconds
};

// Step reward: positive only when the step satisfied the target; a small
// time-shaped penalty when the state advanced without reaching it; -1 when
// the step changed nothing.
inline double compute_reward(const StateDigest& prev, const StateDigest& next,
                             bool target_satisfied, double theta, const RewardParams& p) {
    double time_penalty = p.alpha * std::exp(-theta / p.sigma);
    if (target_satisfied) return 1.0 - time_penalty;
    if (!(next == prev)) return -time_penalty;
    return -1.0;
}

struct Transition {
    std::vector<double> s;
    int action = 0;
    double reward = 0.0;
    std::vector<double> s2;
    bool terminal = false;
};

// ---------------------------------------------------------------------------
// Q network (input -> 64 relu -> |pool| linear) with Adam updates
// ---------------------------------------------------------------------------

struct QConfig {
    int hidden = 64;
    int replay_capacity = 10000;
    int batch_size = 32;
    double gamma = 0.95;
    double lr = 1e-3;
    int target_sync_period = 500;
    double eps_start = 1.0;
    double eps_end = 0.05;
    int eps_anneal_steps = 20000;
    int pretrain_steps = 5000;
    int max_episode_steps = 30;
    unsigned seed = 1;
    bool virtual_clock = false;   // use matching-attempt counts as time
    RewardParams reward;
};

class QNetwork {
public:
    QNetwork() = default;

    QNetwork(int in, int hidden, int out, std::mt19937& rng)
        : in_(in), hidden_(hidden), out_(out) {
        auto init = [&](std::vector<double>& w, int fan_in, std::size_t n) {
            std::normal_distribution<double> d(0.0, std::sqrt(2.0 / fan_in));
            w.resize(n);
            for (double& x : w) x = d(rng);
        };
        init(w1_, in, (std::size_t)in * hidden);
        b1_.assign(hidden, 0.0);
        init(w2_, hidden, (std::size_t)hidden * out);
        b2_.assign(out, 0.0);
        reset_adam();
    }

    std::vector<double> forward(const std::vector<double>& s,
                                std::vector<double>* hidden_out = nullptr) const {
        std::vector<double> h(hidden_);
        for (int j = 0; j < hidden_; ++j) {
            double z = b1_[j];
            for (int i = 0; i < in_; ++i) z += w1_[(std::size_t)j * in_ + i] * s[i];
            h[j] = z > 0 ? z : 0;
        }
        std::vector<double> q(out_);
        for (int k = 0; k < out_; ++k) {
            double z = b2_[k];
            for (int j = 0; j < hidden_; ++j) z += w2_[(std::size_t)k * hidden_ + j] * h[j];
            q[k] = z;
        }
        if (hidden_out) *hidden_out = std::move(h);
        return q;
    }

    // Single (state, action, target) squared-error step.
    void update(const std::vector<double>& s, int action, double target, double lr) {
        std::vector<double> h;
        std::vector<double> q = forward(s, &h);
        double err = q[action] - target;  // d(loss)/d(q_a) with loss = err^2/2

        ++adam_t_;
        auto adam = [&](std::vector<double>& w, std::vector<double>& m, std::vector<double>& v,
                        std::size_t idx, double grad) {
            m[idx] = 0.9 * m[idx] + 0.1 * grad;
            v[idx] = 0.999 * v[idx] + 0.001 * grad * grad;
            double mh = m[idx] / (1 - std::pow(0.9, adam_t_));
            double vh = v[idx] / (1 - std::pow(0.999, adam_t_));
            w[idx] -= lr * mh / (std::sqrt(vh) + 1e-8);
        };

        // output layer: only the chosen action's row gets gradient
        std::vector<double> dh(hidden_, 0.0);
        for (int j = 0; j < hidden_; ++j) {
            std::size_t idx = (std::size_t)action * hidden_ + j;
            dh[j] = err * w2_[idx];
            adam(w2_, m2_, v2_, idx, err * h[j]);
        }
        adam(b2_, mb2_, vb2_, (std::size_t)action, err);

        for (int j = 0; j < hidden_; ++j) {
            if (h[j] <= 0) continue;  // relu gate
            for (int i = 0; i < in_; ++i) {
                adam(w1_, m1_, v1_, (std::size_t)j * in_ + i, dh[j] * s[i]);
            }
            adam(b1_, mb1_, vb1_, (std::size_t)j, dh[j]);
        }
    }

    int input_dim() const { return in_; }
    int output_dim() const { return out_; }

    nlohmann::json to_json() const {
        return {{"in", in_},     {"hidden", hidden_}, {"out", out_}, {"w1", w1_},
                {"b1", b1_},     {"w2", w2_},         {"b2", b2_}};
    }

    static QNetwork from_json(const nlohmann::json& j) {
        QNetwork n;
        n.in_ = j.at("in").get<int>();
        n.hidden_ = j.at("hidden").get<int>();
        n.out_ = j.at("out").get<int>();
        n.w1_ = j.at("w1").get<std::vector<double>>();
        n.b1_ = j.at("b1").get<std::vector<double>>();
        n.w2_ = j.at("w2").get<std::vector<double>>();
        n.b2_ = j.at("b2").get<std::vector<double>>();
        n.reset_adam();
        return n;
    }

private:
    void reset_adam() {
        m1_.assign(w1_.size(), 0.0);
        v1_.assign(w1_.size(), 0.0);
        mb1_.assign(b1_.size(), 0.0);
        vb1_.assign(b1_.size(), 0.0);
        m2_.assign(w2_.size(), 0.0);
        v2_.assign(w2_.size(), 0.0);
        mb2_.assign(b2_.size(), 0.0);
        vb2_.assign(b2_.size(), 0.0);
    }

    int in_ = 0, hidden_ = 0, out_ = 0;
    std::vector<double> w1_, b1_, w2_, b2_;
    std::vector<double> m1_, v1_, mb1_, vb1_, m2_, v2_, mb2_, vb2_;
    long adam_t_ = 0;
};

// ---------------------------------------------------------------------------
// Policy
// ---------------------------------------------------------------------------

enum class SelectMode { Greedy, EpsGreedy };

class QPolicy {
public:
    QPolicy() = default;

    QPolicy(int state_dim, int actions, const QConfig& cfg)
        : cfg_(cfg), rng_(cfg.seed), net_(state_dim, cfg.hidden, actions, rng_),
          target_(net_) {}

    // Greedy: argmax Q with lowest-index tie-break. EpsGreedy: uniform random
    // action with probability eps.
    int select(const std::vector<double>& s, SelectMode mode, double eps = 0.0) {
        if (mode == SelectMode::EpsGreedy) {
            if (uniform() < eps) return (int)(rng_() % (unsigned)net_.output_dim());
        }
        std::vector<double> q = net_.forward(s);
        int best = 0;
        for (int a = 1; a < (int)q.size(); ++a) {
            if (q[a] > q[best]) best = a;
        }
        return best;
    }

    std::vector<double> q_values(const std::vector<double>& s) const {
        return net_.forward(s);
    }

    void push(Transition t) {
        if ((int)replay_.size() >= cfg_.replay_capacity) replay_.pop_front();
        replay_.push_back(std::move(t));
    }

    // One TD update on a sampled minibatch. Returns false until the buffer
    // has a batch worth of data.
    bool learn() {
        if ((int)replay_.size() < cfg_.batch_size) return false;
        for (int b = 0; b < cfg_.batch_size; ++b) {
            const Transition& t = replay_[rng_() % replay_.size()];
            double target = t.reward;
            if (!t.terminal) {
                std::vector<double> q2 = target_.forward(t.s2);
                target += cfg_.gamma * *std::max_element(q2.begin(), q2.end());
            }
            net_.update(t.s, t.action, target, cfg_.lr);
            ++updates_;
            if (updates_ % cfg_.target_sync_period == 0) target_ = net_;
        }
        return true;
    }

    // Supervised pretraining: fit Q(s, a) toward the recorded reward.
    void pretrain(const std::vector<Transition>& samples, int steps) {
        if (samples.empty()) return;
        for (int i = 0; i < steps; ++i) {
            const Transition& t = samples[rng_() % samples.size()];
            net_.update(t.s, t.action, t.reward, cfg_.lr);
        }
    }

    double epsilon(long env_steps) const {
        if (env_steps >= cfg_.eps_anneal_steps) return cfg_.eps_end;
        double f = (double)env_steps / (double)cfg_.eps_anneal_steps;
        return cfg_.eps_start + f * (cfg_.eps_end - cfg_.eps_start);
    }

    const QConfig& config() const { return cfg_; }
    long updates() const { return updates_; }
    long episodes_trained() const { return episodes_trained_; }
    void set_episodes_trained(long n) { episodes_trained_ = n; }
    void bump_episodes() { ++episodes_trained_; }
    std::size_t replay_size() const { return replay_.size(); }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["version"] = 1;
        j["net"] = net_.to_json();
        j["episodes_trained"] = episodes_trained_;
        j["updates"] = updates_;
        j["config"] = {{"hidden", cfg_.hidden},
                       {"gamma", cfg_.gamma},
                       {"lr", cfg_.lr},
                       {"seed", cfg_.seed}};
        return j;
    }

    static QPolicy from_json(const nlohmann::json& j, const QConfig& cfg) {
        QPolicy p;
        p.cfg_ = cfg;
        p.rng_.seed(cfg.seed);
        p.net_ = QNetwork::from_json(j.at("net"));
        p.target_ = p.net_;
        p.episodes_trained_ = j.value("episodes_trained", 0L);
        p.updates_ = j.value("updates", 0L);
        return p;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write checkpoint: " + path);
        out << to_json().dump();
    }

    static QPolicy load(const std::string& path, QConfig cfg = {}) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot read checkpoint: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j, cfg);
    }

private:
    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    }

    QConfig cfg_;
    std::mt19937 rng_{1};
    QNetwork net_;
    QNetwork target_;
    std::deque<Transition> replay_;
    long updates_ = 0;
    long episodes_trained_ = 0;
};

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct EpisodeLog {
    long episode = 0;
    double cumulative_reward = 0.0;
    bool solved = false;
    int steps = 0;
};

struct TrainResult {
    QPolicy policy;
    std::vector<EpisodeLog> log;
};

namespace detail {

// Runs one agent-driven episode, optionally exploring and recording
// transitions/updating the policy in place.
struct EpisodeOutcome {
    double cumulative_reward = 0.0;
    bool solved = false;
    int steps = 0;
};

template <typename PickFn>
inline EpisodeOutcome drive_episode(BuiltProblem& bp, const ModelPool& pool,
                                    const QConfig& cfg, PickFn&& pick,
                                    std::vector<Transition>* sink) {
    ReasonerConfig rcfg;
    rcfg.strategy = Strategy::Agent;
    rcfg.max_steps = cfg.max_episode_steps;
    ReasonSession session(bp, pool, rcfg);
    session.initial_solve();

    EpisodeOutcome out;
    for (int step = 0; step < cfg.max_episode_steps; ++step) {
        if (session.target_value()) break;
        std::vector<double> s =
            encode_state(bp.hologram, bp.equations, step, cfg.max_episode_steps);
        int action = pick(s, step);

        StateDigest before = session.digest();
        long attempts_before = session.attempts();
        auto t0 = std::chrono::steady_clock::now();
        session.try_model(action);
        session.solve_and_update(nullptr);
        double theta =
            cfg.virtual_clock
                ? 0.001 * (double)(session.attempts() - attempts_before)
                : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
        StateDigest after = session.digest();
        bool satisfied = session.target_value().has_value();
        double r = compute_reward(before, after, satisfied, theta, cfg.reward);

        out.cumulative_reward += r;
        out.steps = step + 1;
        if (sink) {
            Transition t;
            t.s = s;
            t.action = action;
            t.reward = r;
            t.s2 = encode_state(bp.hologram, bp.equations, step + 1, cfg.max_episode_steps);
            t.terminal = satisfied;
            sink->push_back(std::move(t));
        }
        if (satisfied) {
            out.solved = true;
            break;
        }
    }
    return out;
}

}  // namespace detail

// Pretraining samples: heuristic runs contribute the actions the heuristic
// actually applied (reward-positive); random selection contributes mostly
// failed picks (reward-negative).
inline std::vector<Transition> generate_pretrain_samples(
    const std::vector<ProblemInput>& problems, const ModelPool& pool, const QConfig& cfg,
    int random_episodes_per_problem = 2) {
    std::vector<Transition> samples;
    std::mt19937 rng(cfg.seed);

    for (const auto& input : problems) {
        // heuristic trace: replay pool-order scanning step by step
        BuiltProblem bp = build_hologram(input);
        ReasonerConfig rcfg;
        rcfg.max_steps = cfg.max_episode_steps;
        ReasonSession session(bp, pool, rcfg);
        session.initial_solve();
        for (int step = 0; step < cfg.max_episode_steps && !session.target_value(); ++step) {
            std::vector<double> s =
                encode_state(bp.hologram, bp.equations, step, cfg.max_episode_steps);
            StateDigest before = session.digest();
            std::size_t trace_before = session.trace().size();
            bool changed = session.proving_pass();
            changed = session.property_pass() || changed;
            session.solve_and_update(nullptr);
            if (!changed) break;
            // one sample per model the heuristic applied this iteration
            StateDigest after = session.digest();
            bool satisfied = session.target_value().has_value();
            for (std::size_t i = trace_before; i < session.trace().size(); ++i) {
                int action = -1;
                for (std::size_t k = 0; k < pool.models.size(); ++k) {
                    if (pool.models[k].name == session.trace()[i].model) action = (int)k;
                }
                if (action < 0) continue;
                Transition t;
                t.s = s;
                t.action = action;
                t.reward = compute_reward(before, after, satisfied, 0.0, cfg.reward);
                t.s2 = encode_state(bp.hologram, bp.equations, step + 1,
                                    cfg.max_episode_steps);
                t.terminal = satisfied;
                samples.push_back(std::move(t));
            }
        }

        for (int e = 0; e < random_episodes_per_problem; ++e) {
            BuiltProblem rp = build_hologram(input);
            detail::drive_episode(
                rp, pool, cfg,
                [&](const std::vector<double>&, int) {
                    return (int)(rng() % pool.models.size());
                },
                &samples);
        }
    }
    return samples;
}

// Full training pipeline: optional supervised pretraining, then DQN.
inline TrainResult train_policy(const std::vector<ProblemInput>& problems,
                                const ModelPool& pool, const QConfig& cfg, long episodes,
                                const std::vector<Transition>* pretrain_samples = nullptr,
                                QPolicy* resume_from = nullptr) {
    if (problems.empty()) throw ValidationError({"training corpus is empty"});
    TrainResult result;
    if (resume_from) {
        result.policy = std::move(*resume_from);
    } else {
        result.policy = QPolicy(kStateDim, (int)pool.models.size(), cfg);
        std::vector<Transition> generated;
        if (!pretrain_samples) {
            generated = generate_pretrain_samples(problems, pool, cfg);
            pretrain_samples = &generated;
        }
        result.policy.pretrain(*pretrain_samples, cfg.pretrain_steps);
    }

    long env_steps = 0;
    for (long ep = 0; ep < episodes; ++ep) {
        const ProblemInput& input = problems[(std::size_t)(ep % (long)problems.size())];
        BuiltProblem bp = build_hologram(input);
        std::vector<Transition> transitions;
        auto outcome = detail::drive_episode(
            bp, pool, cfg,
            [&](const std::vector<double>& s, int) {
                return result.policy.select(s, SelectMode::EpsGreedy,
                                            result.policy.epsilon(env_steps));
            },
            &transitions);
        for (auto& t : transitions) {
            result.policy.push(std::move(t));
            ++env_steps;
            result.policy.learn();
        }
        result.policy.bump_episodes();
        result.log.push_back({result.policy.episodes_trained(), outcome.cumulative_reward,
                              outcome.solved, outcome.steps});
    }
    return result;
}

// Greedy evaluation-time selection callback for run_session.
inline SelectFn greedy_select_fn(QPolicy& policy, int max_steps) {
    return [&policy, max_steps](const Hologram& g, const EquationSet& es, int step) {
        std::vector<double> s = encode_state(g, es, step, max_steps);
        return policy.select(s, SelectMode::Greedy);
    };
}

}  // namespace holo
