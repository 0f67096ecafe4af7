#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "mfrl/episode.hpp"
#include "mfrl/plants.hpp"

namespace {

// Replays a fixed trajectory no matter what input it receives.
struct ScriptedProcess {
    std::vector<double> values;
    std::size_t pos = 0;
    double output() const { return values.at(pos); }
    double step(double) { return values.at(++pos); }
};

struct ScriptedReference {
    std::vector<double> values;
    std::size_t pos = 0;
    double output() const { return values.at(pos); }
    double step() { return values.at(++pos); }
};

std::vector<double> sine_trajectory(std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = std::sin(0.05 * static_cast<double>(k));
    return v;
}

}  // namespace

TEST_CASE("a reference matching the free response freezes the weights") {
    const mfrl::Dimensions dims{1, 1, 2};
    const auto weights = mfrl::CostWeights::diagonal(dims, 0.05, 0.01);
    mfrl::LearnerConfig cfg;
    cfg.exploration_steps = 0;
    const long steps = 100;

    ScriptedProcess plant{sine_trajectory(steps + 1)};
    ScriptedReference reference{sine_trajectory(steps + 1)};
    const mfrl::LearnerState init = mfrl::make_initial_state(dims);
    mfrl::ProbingNoise silent{mfrl::NoiseKind::uniform, 0.0, 0, 1};

    const auto result =
        mfrl::run_online_episode(plant, reference, weights, cfg, init, silent, steps);

    REQUIRE(result.trace.size() == static_cast<std::size_t>(steps));
    for (const auto& rec : result.trace) {
        REQUIRE(rec.error == 0.0);
        REQUIRE(rec.mu_applied == 0.0);
        REQUIRE(rec.u == 0.0);
    }
    CHECK(result.state.theta_bar == init.theta_bar);
    CHECK(result.state.omega == init.omega);
    CHECK(result.converged);
    CHECK(result.convergence_step == cfg.window - 1);
}

TEST_CASE("episode aborts when the process output leaves the safe region") {
    const mfrl::Dimensions dims{1, 1, 2};
    const auto weights = mfrl::CostWeights::diagonal(dims, 0.05, 0.01);
    mfrl::LearnerConfig cfg;
    cfg.blow_up_bound = 1e6;
    cfg.exploration_steps = 0;

    std::vector<double> doubling(64);
    for (std::size_t k = 0; k < doubling.size(); ++k) {
        doubling[k] = std::pow(2.0, static_cast<double>(k));
    }
    ScriptedProcess plant{doubling};
    ScriptedReference reference{std::vector<double>(64, 0.0)};

    long rows_seen = 0;
    const mfrl::TraceSink counter = [&rows_seen](const mfrl::TraceRecord&) { ++rows_seen; };
    try {
        mfrl::run_online_episode(plant, reference, weights, cfg, mfrl::make_initial_state(dims),
                                 mfrl::ProbingNoise{}, 60, counter);
        FAIL("expected PlantDivergenceError");
    } catch (const mfrl::PlantDivergenceError& err) {
        CHECK(err.step == 19);       // 2^20 is the first output beyond 1e6
        CHECK(rows_seen == err.step);  // partial trace was streamed before the abort
    }
}

TEST_CASE("episode validates its inputs") {
    const mfrl::Dimensions dims{1, 1, 2};
    const auto weights = mfrl::CostWeights::diagonal(dims, 0.05, 0.01);
    auto plant = mfrl::benchmarks::case1_plant();
    auto reference = mfrl::benchmarks::case1_reference();

    mfrl::LearnerState bad = mfrl::make_initial_state(dims);
    bad.theta_bar = -bad.theta_bar;  // negative definite kernel
    CHECK_THROWS_AS(mfrl::run_online_episode(plant, reference, weights, mfrl::LearnerConfig{},
                                             bad, mfrl::ProbingNoise{}, 10),
                    std::invalid_argument);

    mfrl::LearnerConfig bad_cfg;
    bad_cfg.delta_v = 2.5;
    CHECK_THROWS_AS(mfrl::run_online_episode(plant, reference, weights, bad_cfg,
                                             mfrl::make_initial_state(dims),
                                             mfrl::ProbingNoise{}, 10),
                    std::invalid_argument);
}

TEST_CASE("probing stops at the exploration window") {
    const mfrl::Dimensions dims{1, 1, 2};
    const auto weights = mfrl::CostWeights::diagonal(dims, 0.05, 0.01);
    mfrl::LearnerConfig cfg;
    cfg.exploration_steps = 5;
    auto plant = mfrl::benchmarks::case1_plant();
    auto reference = mfrl::benchmarks::case1_reference();
    mfrl::ProbingNoise noise{mfrl::NoiseKind::uniform, 0.5, 5, 9};

    const auto result = mfrl::run_online_episode(plant, reference, weights, cfg,
                                                 mfrl::make_initial_state(dims), noise, 40,
                                                 {}, 0.01);
    bool probed = false;
    for (const auto& rec : result.trace) {
        if (rec.k < 5) {
            probed = probed || rec.mu_applied != rec.mu_clean;
        } else {
            REQUIRE(rec.mu_applied == rec.mu_clean);
        }
        REQUIRE(rec.time == Approx(0.01 * static_cast<double>(rec.k)));
    }
    CHECK(probed);
}

TEST_CASE("adaptation stops at the step budget while the run continues") {
    const mfrl::Dimensions dims{1, 1, 2};
    const auto weights = mfrl::CostWeights::diagonal(dims, 0.05, 0.01);
    mfrl::LearnerConfig cfg;
    cfg.max_steps = 20;
    cfg.exploration_steps = 10;
    auto plant = mfrl::benchmarks::case1_plant();
    auto reference = mfrl::benchmarks::case1_reference();
    Eigen::MatrixXd omega0(1, 3);
    omega0 << 2.0, 0.0, -1.0;

    const auto result = mfrl::run_online_episode(plant, reference, weights, cfg,
                                                 mfrl::make_initial_state(dims, 1.0, omega0),
                                                 mfrl::ProbingNoise{}, 60, {}, 0.01);
    REQUIRE(result.trace.size() == 60);
    bool adapted_early = false;
    for (const auto& rec : result.trace) {
        if (rec.k <= 20) {
            adapted_early = adapted_early || rec.theta_change != 0.0;
        } else {
            REQUIRE(rec.theta_change == 0.0);
            REQUIRE(rec.omega_change == 0.0);
        }
    }
    CHECK(adapted_early);
}

TEST_CASE("episodes with identical seeds replay bit-identically") {
    const mfrl::Dimensions dims{1, 1, 2};
    const auto weights = mfrl::CostWeights::diagonal(dims, 0.05, 0.01);
    const mfrl::LearnerConfig cfg;
    const mfrl::ProbingNoise noise{mfrl::NoiseKind::uniform, 0.1, 250, 3};

    auto run = [&]() {
        auto plant = mfrl::benchmarks::case1_plant();
        auto reference = mfrl::benchmarks::case1_reference();
        return mfrl::run_online_episode(plant, reference, weights, cfg,
                                        mfrl::make_initial_state(dims), noise, 400, {}, 0.01);
    };
    const auto first = run();
    const auto second = run();
    REQUIRE(first.trace.size() == second.trace.size());
    for (std::size_t k = 0; k < first.trace.size(); ++k) {
        REQUIRE(first.trace[k].u == second.trace[k].u);
        REQUIRE(first.trace[k].error == second.trace[k].error);
        REQUIRE(first.trace[k].value == second.trace[k].value);
    }
    CHECK(first.state.theta_bar == second.state.theta_bar);
    CHECK(first.state.omega == second.state.omega);
    CHECK(first.converged == second.converged);
}
