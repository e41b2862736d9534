#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <random>

#include "holo/selector.hpp"

using namespace holo;

namespace {

const std::string kDataDir = HOLO_DATA_DIR;

ProblemInput make_input(std::vector<std::string> text, std::vector<std::string> diagram,
                        std::map<std::string, std::pair<double, double>> coords = {},
                        std::array<double, 4> choices = {1, 2, 3, 4}) {
    ProblemInput p;
    static int n = 0;
    p.id = "train" + std::to_string(n++);
    for (const auto& s : text) p.text_literals.push_back(parse_literal(s));
    for (const auto& s : diagram) p.diagram_literals.push_back(parse_literal(s));
    p.point_coords = std::move(coords);
    p.choices = choices;
    return p;
}

std::vector<ProblemInput> tiny_corpus() {
    std::vector<ProblemInput> v;
    // triangle angle sums with different numbers
    v.push_back(make_input({"Equals(MeasureOf(Angle(A, B, C)), 70)",
                            "Equals(MeasureOf(Angle(B, C, A)), 60)",
                            "Find(MeasureOf(Angle(C, A, B)))"},
                           {"Triangle(A, B, C)"},
                           {{"A", {2.32, 6.37}}, {"B", {0, 0}}, {"C", {6, 0}}},
                           {40, 50, 60, 70}));
    v.push_back(make_input({"Equals(MeasureOf(Angle(A, B, C)), 80)",
                            "Equals(MeasureOf(Angle(B, C, A)), 40)",
                            "Find(MeasureOf(Angle(C, A, B)))"},
                           {"Triangle(A, B, C)"},
                           {{"A", {1.26, 4.6}}, {"B", {0, 0}}, {"C", {6, 0}}},
                           {50, 60, 70, 80}));
    // circle area
    v.push_back(make_input({"Equals(RadiusOf(Circle(O)), 3)", "Find(AreaOf(Circle(O)))"},
                           {"Circle(O)"}, {}, {9.42, 18.85, 28.27, 37.7}));
    return v;
}

}  // namespace

TEST_CASE("reward function implements the three cases") {
    RewardParams p;  // alpha = 0.1, sigma = 1
    StateDigest a{10, 20, 5, 3};
    StateDigest changed{10, 21, 5, 3};

    CHECK(compute_reward(a, changed, true, 0.0, p) == Catch::Approx(0.9));
    CHECK(compute_reward(a, changed, false, 0.0, p) == Catch::Approx(-0.1));
    CHECK(compute_reward(a, a, false, 0.0, p) == Catch::Approx(-1.0));

    // the time penalty decays with theta
    CHECK(compute_reward(a, changed, true, 1.0, p) ==
          Catch::Approx(1.0 - 0.1 * std::exp(-1.0)));
    CHECK(compute_reward(a, changed, false, 2.5, p) ==
          Catch::Approx(-0.1 * std::exp(-2.5)));
}

TEST_CASE("reward stays within [-1, 1] and exactly one case fires") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> theta_d(0.0, 50.0);
    std::uniform_real_distribution<double> alpha_d(0.0, 1.0);
    std::uniform_real_distribution<double> sigma_d(0.01, 10.0);
    for (int i = 0; i < 2000; ++i) {
        RewardParams p;
        p.alpha = alpha_d(rng);
        p.sigma = sigma_d(rng);
        StateDigest prev{(int)(rng() % 50), rng() % 100, rng() % 40, rng() % 30};
        StateDigest next = prev;
        bool changed = rng() % 2 == 0;
        if (changed) next.edges += 1 + rng() % 3;
        bool satisfied = rng() % 3 == 0;
        double r = compute_reward(prev, next, satisfied, theta_d(rng), p);
        CHECK(r >= -1.0);
        CHECK(r <= 1.0);

        int cases = 0;
        if (satisfied) ++cases;
        if (!satisfied && !(next == prev)) ++cases;
        if (!satisfied && next == prev) ++cases;
        CHECK(cases == 1);
    }
}

TEST_CASE("state encoding is deterministic and fixed-length") {
    ProblemInput p = make_input({"Equals(MeasureOf(Angle(A, B, C)), 70)", "Find(x)"},
                                {"Triangle(A, B, C)"});
    BuiltProblem b1 = build_hologram(p);
    BuiltProblem b2 = build_hologram(p);
    auto s1 = encode_state(b1.hologram, b1.equations, 3, 30);
    auto s2 = encode_state(b2.hologram, b2.equations, 3, 30);
    CHECK(s1.size() == kStateDim);
    CHECK(s1 == s2);
    // step index enters the encoding
    auto s3 = encode_state(b1.hologram, b1.equations, 4, 30);
    CHECK(s1 != s3);
    // expression target sets the last one-hot bit
    CHECK(s1[32] == 1.0);
}

TEST_CASE("greedy selection takes the argmax with low-index ties") {
    QConfig cfg;
    cfg.seed = 3;
    QPolicy policy(3, 3, cfg);
    // craft states and check consistency with q_values rather than weights
    std::vector<double> s{0.2, -0.1, 0.7};
    auto q = policy.q_values(s);
    int best = 0;
    for (int i = 1; i < 3; ++i) {
        if (q[i] > q[best]) best = i;
    }
    CHECK(policy.select(s, SelectMode::Greedy) == best);
    for (int i = 0; i < 10; ++i) CHECK(policy.select(s, SelectMode::Greedy) == best);
}

TEST_CASE("epsilon-greedy with eps=1 is a seeded reproducible sequence") {
    QConfig cfg;
    cfg.seed = 11;
    std::vector<double> s(4, 0.5);
    std::vector<int> run1, run2;
    {
        QPolicy p(4, 5, cfg);
        for (int i = 0; i < 20; ++i) run1.push_back(p.select(s, SelectMode::EpsGreedy, 1.0));
    }
    {
        QPolicy p(4, 5, cfg);
        for (int i = 0; i < 20; ++i) run2.push_back(p.select(s, SelectMode::EpsGreedy, 1.0));
    }
    CHECK(run1 == run2);
    std::set<int> seen(run1.begin(), run1.end());
    CHECK(seen.size() > 1);  // actually explores
}

TEST_CASE("with gamma zero the TD target reduces to the immediate reward") {
    QConfig cfg;
    cfg.gamma = 0.0;
    cfg.batch_size = 4;
    cfg.lr = 5e-3;
    cfg.seed = 7;
    QPolicy policy(2, 2, cfg);
    std::vector<double> s{0.3, 0.6};
    std::vector<double> s2{0.9, 0.1};
    for (int i = 0; i < 8; ++i) {
        Transition t;
        t.s = s;
        t.action = 1;
        t.reward = 0.7;
        t.s2 = s2;
        t.terminal = false;
        policy.push(std::move(t));
    }
    for (int i = 0; i < 800; ++i) policy.learn();
    CHECK(policy.q_values(s)[1] == Catch::Approx(0.7).margin(0.05));
}

TEST_CASE("checkpoints round trip") {
    QConfig cfg;
    cfg.seed = 9;
    QPolicy policy(kStateDim, 7, cfg);
    policy.set_episodes_trained(42);
    std::string path = std::string(HOLO_TEST_TMP) + "_ckpt.json";
    policy.save(path);
    QPolicy back = QPolicy::load(path, cfg);
    CHECK(back.episodes_trained() == 42);
    std::vector<double> s(kStateDim, 0.25);
    CHECK(back.q_values(s) == policy.q_values(s));
    std::remove(path.c_str());
}

TEST_CASE("epsilon anneals linearly to its floor") {
    QConfig cfg;
    cfg.eps_start = 1.0;
    cfg.eps_end = 0.05;
    cfg.eps_anneal_steps = 100;
    QPolicy policy(2, 2, cfg);
    CHECK(policy.epsilon(0) == Catch::Approx(1.0));
    CHECK(policy.epsilon(50) == Catch::Approx(0.525));
    CHECK(policy.epsilon(100) == Catch::Approx(0.05));
    CHECK(policy.epsilon(100000) == Catch::Approx(0.05));
}

TEST_CASE("pretraining samples mix positive and negative rewards") {
    ModelPool pool = load_pool(kDataDir + "/pool.json");
    QConfig cfg;
    cfg.seed = 13;
    cfg.virtual_clock = true;
    auto samples = generate_pretrain_samples(tiny_corpus(), pool, cfg, 2);
    REQUIRE_FALSE(samples.empty());
    int positive = 0, negative = 0;
    for (const auto& t : samples) {
        if (t.reward > 0) ++positive;
        if (t.reward <= -0.99) ++negative;
    }
    CHECK(positive > 0);   // heuristic runs reach targets
    CHECK(negative > 0);   // random picks mostly fail
}

TEST_CASE("short training run learns to solve the tiny corpus") {
    ModelPool pool = load_pool(kDataDir + "/pool.json");
    QConfig cfg;
    cfg.seed = 17;
    cfg.virtual_clock = true;
    cfg.pretrain_steps = 1500;
    cfg.eps_anneal_steps = 400;
    cfg.max_episode_steps = 12;
    auto corpus = tiny_corpus();
    TrainResult result = train_policy(corpus, pool, cfg, 120);
    REQUIRE(result.log.size() == 120);
    CHECK(result.policy.episodes_trained() == 120);

    // greedy evaluation should now solve every training problem
    int solved = 0;
    long attempts = 0;
    for (const auto& input : corpus) {
        BuiltProblem bp = build_hologram(input);
        ReasonerConfig rcfg;
        rcfg.strategy = Strategy::Agent;
        rcfg.max_steps = 20;
        SolveOutcome out =
            run_session(bp, pool, rcfg, greedy_select_fn(result.policy, rcfg.max_steps));
        solved += out.status == SolveOutcome::TargetSatisfied ? 1 : 0;
        attempts += out.matching_attempts;
    }
    CHECK(solved == (int)corpus.size());
    // and do so with few matching attempts
    CHECK(attempts <= 20 * (long)corpus.size());
}
