#include "coevo/estimator.h"
#include "coevo/synthesize.h"

#include "test_support.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace coevo;
namespace t = coevo::testing;

namespace {

using NK = NetworkEffectKind;
using BK = BehaviorEffectKind;

EstimationConfig quick_config(std::uint64_t seed) {
    EstimationConfig c;
    c.n_pilot = 20;
    c.n_main = 60;
    c.n_check = 30;
    c.n_jacobian = 20;
    c.seed = seed;
    return c;
}

GeneratorConfig small_generator() {
    GeneratorConfig g;
    g.n_actors = 25;
    g.n_waves = 3;
    g.n_levels = 4;
    g.density = 0.08;
    g.covariates = false;
    g.spec.network = {{NK::out_degree, {}}, {NK::transitivity, {}}};
    g.spec.behavior = {{BK::linear_tendency, {}}, {BK::influence_similarity, {}}};
    g.params = ParameterVector::zeros(2, g.spec);
    g.params.rho_network = {3.0, 3.0};
    g.params.rho_behavior = {2.0, 2.0};
    g.params.beta_network = {-1.5, 0.4};
    g.params.beta_behavior = {-0.1, 0.8};
    return g;
}

} // namespace

TEST(StepSize, GainSequence) {
    EstimationConfig c;
    c.gain_a = 1.0;
    c.gain_b = 9.0;
    EXPECT_DOUBLE_EQ(step_size(c, 1), 0.1);
    EXPECT_DOUBLE_EQ(step_size(c, 11), 0.05);
}

TEST(StepSize, DecreasesToZeroWithDivergentSum) {
    EstimationConfig c;
    // a/(b+t) is strictly decreasing, and the partial sums over [t, 2t] stay
    // near a*ln 2, so they never shrink to zero.
    double prev = step_size(c, 1);
    for (int t = 2; t < 10000; ++t) {
        const double s = step_size(c, t);
        EXPECT_LT(s, prev);
        prev = s;
    }
    EXPECT_LT(step_size(c, 1000000), 1e-5);
    for (int t : {1000, 100000}) {
        double block = 0.0;
        for (int k = t; k < 2 * t; ++k) {
            block += step_size(c, k);
        }
        EXPECT_GT(block, 0.6 * c.gain_a);
    }
}

TEST(RobbinsMonroUpdate, ScalarToyStep) {
    const std::vector<double> theta{0.5};
    const std::vector<double> dev{2.0};
    const auto next = robbins_monro_update(theta, dev, 0.1, {false}, {}, 1e-4);
    EXPECT_DOUBLE_EQ(next[0], 0.3);
}

TEST(RobbinsMonroUpdate, ZeroDeviationIsExactFixedPoint) {
    Rng rng(3);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> theta(6);
        for (auto& x : theta) {
            x = rng.uniform() * 10.0 - 2.0;
        }
        theta[0] = std::abs(theta[0]) + 0.1;
        theta[3] = std::abs(theta[3]) + 0.1;
        const std::vector<double> zero(6, 0.0);
        EXPECT_EQ(robbins_monro_update(theta, zero, rng.uniform(), {true, false, false, true, false, false},
                                       {}, 1e-4),
                  theta);
    }
}

TEST(RobbinsMonroUpdate, RatesStayPositiveAndFixedEntriesHold) {
    const std::vector<double> theta{0.2, 1.0, 0.5};
    const std::vector<double> dev{10.0, 10.0, 10.0};
    const auto next = robbins_monro_update(theta, dev, 0.5, {true, false, true}, {false, false, true}, 1e-4);
    EXPECT_DOUBLE_EQ(next[0], 0.1);
    EXPECT_DOUBLE_EQ(next[1], -4.0);
    EXPECT_EQ(next[2], 0.5);
    const auto floored = robbins_monro_update(std::vector<double>{1e-4}, std::vector<double>{1.0}, 1.0,
                                              {true}, {}, 1e-4);
    EXPECT_EQ(floored[0], 1e-4);
}

TEST(InitialParameters, RatesFromObservedChange) {
    PanelDataset data;
    data.n_actors = 2507;
    data.n_levels = 2;
    data.covariates = CovariateTable::zeros(2507);
    Network a(2507);
    Network b(2507);
    std::int64_t added = 0;
    for (ActorId i = 0; i < 2507 && added < 4874; ++i) {
        for (ActorId j = i + 1; j < 2507 && added < 4874; ++j) {
            b.add_tie(i, j);
            ++added;
        }
    }
    data.networks = {a, b, b};
    data.behaviors.assign(3, std::vector<int>(2507, 1));
    EffectSpec spec;
    spec.network = {{NK::out_degree, {}}};
    const auto theta = initial_parameters(data, spec);
    EXPECT_NEAR(theta.rho_network[0], 3.888, 5e-4);
    EXPECT_EQ(theta.rho_network[1], 1e-4);
    EXPECT_EQ(theta.rho_behavior[0], 1e-4);
    EXPECT_EQ(theta.beta_network[0], 0.0);
}

TEST(Summarize, PaperTRatio) {
    const double mean = -370.044;
    const double sd = 139.914;
    const double half = sd / std::sqrt(2.0);
    const std::vector<std::vector<double>> samples{{mean + half}, {mean - half}};
    const auto r = summarize_deviations(samples, {0.0}, {"Friendship rate (Period 1)"}, 0.1);
    EXPECT_NEAR(r.statistics[0].mean_deviation, mean, 1e-9);
    EXPECT_NEAR(r.statistics[0].sd_deviation, sd, 1e-9);
    EXPECT_NEAR(r.statistics[0].t_ratio, -2.645, 5e-4);
    EXPECT_FALSE(r.converged);
}

TEST(Summarize, ExactHitsAndNonStochastic) {
    const std::vector<std::vector<double>> hits{{3.0, 1.0}, {3.0, 1.0}, {3.0, 1.0}};
    const auto ok = summarize_deviations(hits, {3.0, 1.0}, {"a", "b"}, 0.1);
    EXPECT_TRUE(ok.converged);
    EXPECT_EQ(ok.max_abs_t, 0.0);
    for (const auto& s : ok.statistics) {
        EXPECT_EQ(s.t_ratio, 0.0);
        EXPECT_FALSE(s.non_stochastic);
    }
    const auto off = summarize_deviations(hits, {2.0, 1.0}, {"a", "b"}, 0.1);
    EXPECT_TRUE(off.statistics[0].non_stochastic);
    EXPECT_FALSE(off.converged);
}

TEST(Summarize, TRatioIsMeanOverSd) {
    Rng rng(8);
    std::vector<std::vector<double>> samples(50, std::vector<double>(3));
    for (auto& s : samples) {
        for (auto& x : s) {
            x = rng.uniform() * 4.0;
        }
    }
    const auto r = summarize_deviations(samples, {1.0, 2.0, 3.0}, {"a", "b", "c"}, 0.1);
    for (const auto& s : r.statistics) {
        EXPECT_DOUBLE_EQ(s.t_ratio, s.mean_deviation / s.sd_deviation);
    }
}

TEST(DeltaMethod, ScalarCases) {
    Eigen::MatrixXd d(1, 1);
    d << 2.0;
    Eigen::MatrixXd sigma(1, 1);
    sigma << 4.0;
    EXPECT_DOUBLE_EQ(delta_method_se(d, sigma, {"s"})[0], 1.0);
    sigma << 0.0;
    EXPECT_EQ(delta_method_se(d, sigma, {"s"})[0], 0.0);
}

TEST(DeltaMethod, SingularJacobianNamesStatistics) {
    Eigen::MatrixXd d(3, 3);
    d << 1.0, 2.0, 0.0, 2.0, 4.0, 0.0, 0.0, 0.0, 1.0;
    const Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(3, 3);
    try {
        delta_method_se(d, sigma, {"first", "second", "third"});
        FAIL() << "expected SingularJacobian";
    } catch (const SingularJacobian& e) {
        EXPECT_NE(std::find(e.collinear.begin(), e.collinear.end(), "first"), e.collinear.end());
        EXPECT_NE(std::find(e.collinear.begin(), e.collinear.end(), "second"), e.collinear.end());
        EXPECT_EQ(std::find(e.collinear.begin(), e.collinear.end(), "third"), e.collinear.end());
    }
}

TEST(SampleCovariance, MatchesDefinition) {
    const std::vector<std::vector<double>> s{{1.0, 2.0}, {3.0, 2.0}, {5.0, 8.0}};
    const auto c = sample_covariance(s);
    EXPECT_DOUBLE_EQ(c(0, 0), 4.0);
    EXPECT_DOUBLE_EQ(c(1, 1), 12.0);
    EXPECT_DOUBLE_EQ(c(0, 1), 6.0);
    EXPECT_DOUBLE_EQ(c(1, 0), 6.0);
}

TEST(EstimationConfig, Validation) {
    EstimationConfig c;
    EXPECT_NO_THROW(c.validate());
    c.gain_a = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = EstimationConfig{};
    c.n_check = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = EstimationConfig{};
    c.tau = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Significance, Stars) {
    EXPECT_EQ(significance_stars(3.0, 1.0), "***");
    EXPECT_EQ(significance_stars(2.0, 1.0), "**");
    EXPECT_EQ(significance_stars(1.7, 1.0), "*");
    EXPECT_EQ(significance_stars(1.0, 1.0), "");
    EXPECT_EQ(significance_stars(-3.0, 1.0), "***");
    EXPECT_EQ(significance_stars(1.0, std::numeric_limits<double>::quiet_NaN()), "");
}

TEST(Estimate, DeterministicAndThreadInvariant) {
    const auto gen = small_generator();
    const auto data = synthesize_dataset(gen, 5);
    auto config = quick_config(11);
    const auto a = estimate(data, gen.spec, config);
    const auto b = estimate(data, gen.spec, config);
    config.threads = 3;
    const auto c = estimate(data, gen.spec, config);
    EXPECT_EQ(a.theta_hat, b.theta_hat);
    EXPECT_EQ(a.theta_hat, c.theta_hat);
    EXPECT_EQ(a.max_abs_t, c.max_abs_t);
    ASSERT_EQ(a.iteration_log.size(), c.iteration_log.size());
    EXPECT_EQ(a.iteration_log.back(), c.iteration_log.back());
    for (std::size_t k = 0; k < a.standard_errors.size(); ++k) {
        if (std::isnan(a.standard_errors[k])) {
            EXPECT_TRUE(std::isnan(c.standard_errors[k]));
        } else {
            EXPECT_EQ(a.standard_errors[k], c.standard_errors[k]);
        }
    }
    EXPECT_EQ(a.iteration_log.size(), static_cast<std::size_t>(config.n_main));
}

TEST(Estimate, RatesStayPositiveAlongThePath) {
    const auto gen = small_generator();
    const auto data = synthesize_dataset(gen, 6);
    const auto r = estimate(data, gen.spec, quick_config(12));
    const auto mask = rate_mask(data.n_periods(), gen.spec);
    for (const auto& theta : r.iteration_log) {
        for (std::size_t k = 0; k < theta.size(); ++k) {
            if (mask[k]) {
                ASSERT_GT(theta[k], 0.0);
            }
        }
    }
}

TEST(Estimate, ZeroChangeDatasetFlagsWeightsInestimable) {
    Rng rng(14);
    auto data = t::random_dataset(12, 3, 3, rng);
    data.networks[1] = data.networks[0];
    data.networks[2] = data.networks[0];
    data.behaviors[1] = data.behaviors[0];
    data.behaviors[2] = data.behaviors[0];
    EffectSpec spec;
    spec.network = {{NK::out_degree, {}}};
    spec.behavior = {{BK::linear_tendency, {}}};
    const auto r = estimate(data, spec, quick_config(3));
    const auto names = parameter_names(data.n_periods(), spec);
    for (std::size_t k = 0; k < names.size(); ++k) {
        EXPECT_TRUE(r.inestimable[k]) << names[k];
        EXPECT_TRUE(std::isnan(r.standard_errors[k])) << names[k];
    }
    EXPECT_DOUBLE_EQ(r.theta_hat.rho_network[0], 1e-4);
}

TEST(Estimate, PureRateModelMatchesTwoStateSolution) {
    // Isolated actors with two levels and no weights: each actor's level flips
    // at rate rho/2 in both directions, so E|dp| = (1 - exp(-rho)) / 2.
    const ActorId n = 400;
    PanelDataset data;
    data.n_actors = n;
    data.n_levels = 2;
    data.covariates = CovariateTable::zeros(n);
    data.networks.assign(2, Network(n));
    std::vector<int> first(static_cast<std::size_t>(n));
    std::vector<int> second(static_cast<std::size_t>(n));
    const int changed = 120;
    for (ActorId i = 0; i < n; ++i) {
        first[i] = 1 + i % 2;
        second[i] = i < changed ? 3 - first[i] : first[i];
    }
    data.behaviors = {first, second};
    data.raw_values = {{first.begin(), first.end()}, {second.begin(), second.end()}};
    const EffectSpec spec;
    auto config = quick_config(21);
    config.n_main = 400;
    config.n_check = 200;
    const auto r = estimate(data, spec, config);
    const double analytic = -std::log(1.0 - 2.0 * changed / static_cast<double>(n));
    // Tail-average noise: per-draw SD of the moment is sqrt(n p (1-p)) ~ 9.2,
    // dE/drho = n exp(-rho)/2 = 80, averaged over 100 iterates -> ~0.012.
    EXPECT_NEAR(r.theta_hat.rho_behavior[0], analytic, 0.06);
    EXPECT_TRUE(r.inestimable[0]);
}

TEST(Estimate, CoverageOnIdentifiedModel) {
    // Nominal 95% intervals over 20 synthetic datasets. Trials are
    // parameters x datasets; the lower bound is three binomial SDs below 0.95.
    GeneratorConfig gen;
    gen.n_actors = 40;
    gen.n_waves = 2;
    gen.n_levels = 4;
    gen.density = 0.1;
    gen.covariates = false;
    gen.spec.network = {{NK::transitivity, {}}};
    gen.spec.behavior = {{BK::linear_tendency, {}}};
    gen.params = ParameterVector::zeros(1, gen.spec);
    gen.params.rho_network = {2.0};
    gen.params.rho_behavior = {2.0};
    gen.params.beta_network = {0.5};
    gen.params.beta_behavior = {-0.3};
    const auto truth = gen.params.flatten();

    EstimationConfig config;
    config.n_pilot = 30;
    config.n_main = 300;
    config.n_check = 100;
    config.n_jacobian = 100;

    int trials = 0;
    int covered = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const auto data = synthesize_dataset(gen, 1000 + static_cast<std::uint64_t>(rep));
        config.seed = 500 + static_cast<std::uint64_t>(rep);
        const auto r = estimate(data, gen.spec, config);
        const auto hat = r.theta_hat.flatten();
        for (std::size_t k = 0; k < hat.size(); ++k) {
            if (!std::isfinite(r.standard_errors[k])) {
                continue;
            }
            ++trials;
            covered += std::abs(hat[k] - truth[k]) <= 1.96 * r.standard_errors[k];
        }
    }
    ASSERT_GT(trials, 0);
    const double rate = static_cast<double>(covered) / trials;
    const double floor = 0.95 - 3.0 * std::sqrt(0.95 * 0.05 / trials);
    RecordProperty("coverage", std::to_string(rate));
    EXPECT_GE(rate, floor) << covered << " of " << trials;
}
