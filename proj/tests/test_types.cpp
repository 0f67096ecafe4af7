#include <catch2/catch.hpp>

#include "mfrl/types.hpp"
#include "test_util.hpp"

using mfrl::CostWeights;
using mfrl::Dimensions;
using mfrl::ErrorStack;

TEST_CASE("dimensions derive stack, augmented, and packed sizes") {
    const Dimensions d{1, 1, 2};
    CHECK(d.error_size() == 3);
    CHECK(d.augmented_size() == 4);
    CHECK(d.packed_size() == 10);

    const Dimensions wide{2, 3, 1};
    CHECK(wide.error_size() == 4);
    CHECK(wide.augmented_size() == 7);
    CHECK(wide.packed_size() == 28);

    CHECK_THROWS_AS((Dimensions{0, 1, 0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((Dimensions{1, 0, 0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((Dimensions{1, 1, -1}.validate()), std::invalid_argument);
}

TEST_CASE("error stack shifts newest first and pads with zeros") {
    ErrorStack stack(Dimensions{1, 1, 2});
    CHECK(stack.vector().isZero());

    stack.push(1.0);
    stack.push(2.0);
    stack.push(3.0);
    Eigen::Vector3d expected(3.0, 2.0, 1.0);
    CHECK(stack.vector().isApprox(expected));

    // r+1 pushes starting from zeros leave exactly the pushed values.
    stack.push(4.0);
    expected << 4.0, 3.0, 2.0;
    CHECK(stack.vector().isApprox(expected));
}

TEST_CASE("error stack keeps vector-output blocks in order") {
    ErrorStack stack(Dimensions{2, 1, 1});
    Eigen::VectorXd first(2), second(2);
    first << 1.0, 2.0;
    second << 3.0, 4.0;
    stack.push(first);
    stack.push(second);
    Eigen::VectorXd expected(4);
    expected << 3.0, 4.0, 1.0, 2.0;
    CHECK(stack.vector() == expected);

    Eigen::VectorXd wrong(3);
    wrong.setZero();
    CHECK_THROWS_AS(stack.push(wrong), std::invalid_argument);
}

TEST_CASE("augmented state stacks errors then control") {
    ErrorStack stack(Dimensions{1, 1, 2});
    stack.push(0.5);
    Eigen::VectorXd mu(1);
    mu << -2.0;
    const auto z = mfrl::AugmentedState::from(stack, mu);
    REQUIRE(z.z.size() == 4);
    CHECK(z.z(0) == 0.5);
    CHECK(z.z(3) == -2.0);

    Eigen::VectorXd bad(2);
    bad.setZero();
    CHECK_THROWS_AS(mfrl::AugmentedState::from(stack, bad), std::invalid_argument);
}

TEST_CASE("stage cost evaluates the quadratic form") {
    const Dimensions d{1, 1, 2};
    const CostWeights w = CostWeights::diagonal(d, 0.05, 0.01);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(1);
    CHECK(mfrl::stage_cost(e, mu, w) == 0.0);

    e << 1.0, 0.0, 0.0;
    CHECK(mfrl::stage_cost(e, mu, w) == Approx(0.025).epsilon(1e-14));

    e << 1.0, 1.0, 1.0;
    mu << 2.0;
    CHECK(mfrl::stage_cost(e, mu, w) == Approx(0.095).epsilon(1e-14));
}

TEST_CASE("stage cost rejects mismatched weight dimensions") {
    const Dimensions d{1, 1, 2};
    const CostWeights w = CostWeights::diagonal(d, 0.05, 0.01);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(1);
    CHECK_THROWS_AS(mfrl::stage_cost(e, mu, w), std::invalid_argument);
    e = Eigen::VectorXd::Zero(3);
    mu = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(mfrl::stage_cost(e, mu, w), std::invalid_argument);
}

TEST_CASE("stage cost is nonnegative for valid weights") {
    std::mt19937_64 rng(42);
    const Dimensions d{1, 1, 3};
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::MatrixXd m = testutil::random_symmetric(rng, d.error_size());
        CostWeights w;
        w.Q = m.transpose() * m;  // PSD
        w.R = Eigen::MatrixXd::Identity(1, 1) * testutil::uniform(rng, 0.001, 2.0);
        w.validate(d);
        const Eigen::VectorXd e = testutil::random_vector(rng, d.error_size(), -5.0, 5.0);
        const Eigen::VectorXd mu = testutil::random_vector(rng, 1, -5.0, 5.0);
        CHECK(mfrl::stage_cost(e, mu, w) >= 0.0);
    }
}

TEST_CASE("cost weights validation rejects bad matrices") {
    const Dimensions d{1, 1, 1};
    CostWeights w = CostWeights::diagonal(d, 0.05, 0.01);
    w.validate(d);

    CostWeights asym = w;
    asym.Q(0, 1) = 1.0;  // breaks symmetry
    CHECK_THROWS_AS(asym.validate(d), std::invalid_argument);

    CostWeights indefinite = w;
    indefinite.Q(0, 0) = -1.0;
    CHECK_THROWS_AS(indefinite.validate(d), std::invalid_argument);

    CostWeights singular_r = w;
    singular_r.R(0, 0) = 0.0;
    CHECK_THROWS_AS(singular_r.validate(d), std::invalid_argument);
}
