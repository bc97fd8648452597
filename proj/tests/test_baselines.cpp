#include "coevo/baselines.h"

#include "test_support.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace coevo;
namespace t = coevo::testing;

namespace {

RegressionPanel single_regressor(const std::vector<std::vector<double>>& x,
                                 const std::vector<std::vector<double>>& y) {
    RegressionPanel p;
    p.names = {"x"};
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t s = 0; s < y[i].size(); ++s) {
            p.add_row(static_cast<ActorId>(i), static_cast<int>(s + 2), y[i][s], {x[i][s]});
        }
    }
    return p;
}

} // namespace

TEST(RegressionPanel, FriendPostsAndLagStructure) {
    Network w1(4);
    w1.add_tie(0, 1);
    w1.add_tie(0, 2);
    Network w2 = w1;
    w2.add_tie(0, 3);
    Network w3 = w2;
    w3.add_tie(1, 2);
    const std::vector<std::vector<std::int64_t>> counts{{5, 10, 20, 7}, {1, 2, 3, 4}, {0, 0, 0, 0}};
    auto cov = CovariateTable::zeros(4);
    cov.gender = {1, 2, 1, 2};
    const auto panel = build_regression_panel(counts, {w1, w2, w3}, cov);
    EXPECT_EQ(panel.rows(), 2u * 4u);
    ASSERT_EQ(panel.names.size(), 5u);
    EXPECT_EQ(panel.names[4], "gender[2]");
    // wave 2 row of actor 0: friends 1 and 2 posted 10 and 20 at wave 1
    EXPECT_EQ(panel.columns[1][0], 30.0);
    EXPECT_EQ(panel.columns[0][0], 1.0);
    // actor 3 was an isolate at wave 1
    EXPECT_EQ(panel.columns[1][3], 0.0);
    EXPECT_EQ(panel.period[4], 3);
    EXPECT_EQ(panel.columns[0][5], 1.0);
    EXPECT_EQ(panel.y[4], 0.0);
    EXPECT_EQ(panel.columns[4][1], 1.0);
    EXPECT_NO_THROW(panel.validate());
}

TEST(RegressionPanel, MisalignedWavesThrow) {
    const std::vector<std::vector<std::int64_t>> counts{{1, 2}, {1, 2}};
    EXPECT_THROW(build_regression_panel(counts, {Network(2)}, CovariateTable::zeros(2)), DataError);
    EXPECT_THROW(build_regression_panel(counts, {Network(2), Network(3)}, CovariateTable::zeros(2)),
                 DataError);
}

TEST(RegressionPanel, RowsPerPeriod) {
    Rng rng(2);
    const auto data = t::random_dataset(7, 5, 3, rng);
    const auto panel = build_regression_panel(data);
    EXPECT_EQ(panel.rows(), 7u * 4u);
}

TEST(FeOls, ExactRecoveryWithActorAndTimeEffects) {
    Rng rng(3);
    std::vector<std::vector<double>> x(30, std::vector<double>(4));
    std::vector<std::vector<double>> y(30, std::vector<double>(4));
    const std::vector<double> time_effect{0.0, 1.5, -2.0, 0.7};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double alpha = rng.uniform() * 10.0;
        for (std::size_t s = 0; s < 4; ++s) {
            x[i][s] = rng.uniform() * 5.0;
            y[i][s] = 2.0 * x[i][s] + alpha + time_effect[s];
        }
    }
    const auto r = fe_ols(single_regressor(x, y));
    EXPECT_NEAR(r.term("x").estimate, 2.0, 1e-8);
    EXPECT_EQ(r.n_groups, 30u);
    EXPECT_EQ(r.n_observations, 120u);
    EXPECT_NEAR(r.fit, 1.0, 1e-10);
}

TEST(FeOls, TimeInvariantColumnsAreOmitted) {
    Rng rng(4);
    const auto data = t::random_dataset(40, 4, 5, rng, 0.1, 0.1);
    const auto r = fe_ols(build_regression_panel(data));
    EXPECT_TRUE(r.term("age").omitted);
    EXPECT_TRUE(r.term("tenure").omitted);
    EXPECT_TRUE(r.term("gender[1]").omitted);
    EXPECT_FALSE(r.term("new_friends").omitted);
    EXPECT_FALSE(r.term("friend_posts").omitted);
}

TEST(FeOls, InvariantToPerActorShift) {
    Rng rng(5);
    std::vector<std::vector<double>> x(20, std::vector<double>(3));
    std::vector<std::vector<double>> y(20, std::vector<double>(3));
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t s = 0; s < 3; ++s) {
            x[i][s] = rng.uniform();
            y[i][s] = rng.uniform() * 3.0 + x[i][s];
        }
    }
    const auto base = fe_ols(single_regressor(x, y));
    auto shifted = y;
    for (auto& row : shifted) {
        const double c = rng.uniform() * 100.0;
        for (auto& v : row) {
            v += c;
        }
    }
    const auto moved = fe_ols(single_regressor(x, shifted));
    EXPECT_NEAR(base.term("x").estimate, moved.term("x").estimate, 1e-10);
    EXPECT_NEAR(base.term("x").standard_error, moved.term("x").standard_error, 1e-10);
}

TEST(FeOls, PureNoiseGivesSmallT) {
    std::mt19937_64 gen(6);
    std::normal_distribution<double> normal;
    int large = 0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<std::vector<double>> x(50, std::vector<double>(3));
        std::vector<std::vector<double>> y(50, std::vector<double>(3));
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (std::size_t s = 0; s < 3; ++s) {
                x[i][s] = normal(gen);
                y[i][s] = normal(gen);
            }
        }
        const auto term = fe_ols(single_regressor(x, y)).term("x");
        large += std::abs(term.estimate / term.standard_error) > 1.96;
    }
    // 5% nominal; binomial SD at 200 draws is about 1.5%
    EXPECT_LE(large, 20);
}

TEST(FeOls, HandFixture) {
    const std::vector<std::vector<double>> x{{0, 0, 1}, {0, 0, 1}};
    const std::vector<std::vector<double>> y{{1, 3, 6}, {2, 2, 5}};
    BaselineOptions opt;
    opt.time_dummies = false;
    const auto r = fe_ols(single_regressor(x, y), opt);
    // mean over actors of y3 - (y1 + y2) / 2
    EXPECT_NEAR(r.term("x").estimate, ((6.0 - 2.0) + (5.0 - 2.0)) / 2.0, 1e-12);
}

TEST(FePoisson, HandFixture) {
    const std::vector<std::vector<double>> x{{0, 0, 1}, {0, 0, 1}};
    const std::vector<std::vector<double>> y{{1, 3, 6}, {2, 2, 5}};
    BaselineOptions opt;
    opt.time_dummies = false;
    const auto r = fe_poisson(single_regressor(x, y), opt);
    // exp(beta) = 2 S3 / (S1 + S2)
    EXPECT_NEAR(r.term("x").estimate, std::log(2.0 * 11.0 / (3.0 + 5.0)), 1e-8);
}

TEST(FePoisson, RecoversSlope) {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> normal;
    std::vector<std::vector<double>> x(200, std::vector<double>(5));
    std::vector<std::vector<double>> y(200, std::vector<double>(5));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double alpha = normal(gen) * 0.5;
        for (std::size_t s = 0; s < 5; ++s) {
            x[i][s] = normal(gen);
            std::poisson_distribution<int> pois(std::exp(0.5 * x[i][s] + alpha));
            y[i][s] = pois(gen);
        }
    }
    const auto r = fe_poisson(single_regressor(x, y));
    const auto& term = r.term("x");
    EXPECT_NEAR(term.estimate, 0.5, 3.0 * term.standard_error);
    EXPECT_GT(term.standard_error, 0.0);
}

TEST(FePoisson, AllZeroActorDroppedAndScaleInvariance) {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> normal;
    std::vector<std::vector<double>> x(30, std::vector<double>(4));
    std::vector<std::vector<double>> y(30, std::vector<double>(4));
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t s = 0; s < 4; ++s) {
            x[i][s] = normal(gen);
            std::poisson_distribution<int> pois(std::exp(0.3 * x[i][s] + 1.0));
            y[i][s] = pois(gen);
        }
    }
    y[0] = {0, 0, 0, 0};
    const auto r = fe_poisson(single_regressor(x, y));
    ASSERT_EQ(r.dropped_actors.size(), 1u);
    EXPECT_EQ(r.dropped_actors[0], 0);
    EXPECT_FALSE(r.notes.empty());
    EXPECT_EQ(r.n_groups, 29u);

    // a common factor rescales the conditional score without moving its root
    auto scaled = y;
    for (auto& row : scaled) {
        for (auto& v : row) {
            v *= 3.0;
        }
    }
    const auto s = fe_poisson(single_regressor(x, scaled));
    EXPECT_NEAR(s.term("x").estimate, r.term("x").estimate, 1e-9);
}

TEST(FePoisson, RejectsNonCountsAndOmitsConstantColumns) {
    RegressionPanel p;
    p.names = {"x", "z"};
    p.add_row(0, 2, 1.5, {0.0, 1.0});
    p.add_row(0, 3, 2.0, {1.0, 1.0});
    EXPECT_THROW(fe_poisson(p), std::invalid_argument);

    Rng rng(9);
    const auto data = t::random_dataset(30, 4, 5, rng, 0.1, 0.1);
    const auto r = fe_poisson(build_regression_panel(data));
    EXPECT_TRUE(r.term("age").omitted);
    EXPECT_TRUE(r.term("tenure").omitted);
}

TEST(FePoisson, IterationLimitRaisesWithLastIterate) {
    std::vector<std::vector<double>> x{{0, 1, 2}, {1, 0, 3}};
    std::vector<std::vector<double>> y{{1, 4, 9}, {2, 1, 7}};
    BaselineOptions opt;
    opt.max_iterations = 1;
    opt.tolerance = 1e-300;
    try {
        fe_poisson(single_regressor(x, y), opt);
        FAIL() << "expected BaselineError";
    } catch (const BaselineError& e) {
        EXPECT_FALSE(e.last_iterate.empty());
    }
}
