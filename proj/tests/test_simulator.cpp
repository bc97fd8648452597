#include "coevo/simulator.h"

#include "test_support.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace coevo;
namespace t = coevo::testing;

namespace {

using NK = NetworkEffectKind;
using BK = BehaviorEffectKind;

EffectSpec rich_spec() {
    EffectSpec spec;
    spec.network = {{NK::out_degree, {}},
                    {NK::transitivity, {}},
                    {NK::behavior_similarity, {}},
                    {NK::covariate_similarity, Covariate::gender},
                    {NK::covariate_ego, Covariate::age},
                    {NK::map_x_similarity, {}},
                    {NK::lap_x_similarity, {}}};
    spec.behavior = {{BK::linear_tendency, {}},
                     {BK::influence_similarity, {}},
                     {BK::covariate_on_behavior, Covariate::tenure},
                     {BK::map_x_influence, {}}};
    return spec;
}

ParameterVector params_for(const EffectSpec& spec, int periods, double rho_net, double rho_beh) {
    auto p = ParameterVector::zeros(periods, spec);
    std::fill(p.rho_network.begin(), p.rho_network.end(), rho_net);
    std::fill(p.rho_behavior.begin(), p.rho_behavior.end(), rho_beh);
    return p;
}

} // namespace

TEST(ActorRates, ConstantPerPeriod) {
    EffectSpec spec;
    auto params = params_for(spec, 2, 1.0, 0.5);
    params.rho_network[1] = 6.267;
    const ChainState state(Network(4), std::vector<int>(4, 1), CovariateTable::zeros(4));
    const auto r = actor_rates(state, params, 1);
    for (double x : r.network) {
        EXPECT_EQ(x, 6.267);
    }
    EXPECT_DOUBLE_EQ(r.total, 4 * (6.267 + 0.5));
    EXPECT_EQ(actor_rates(state, params, 0).network[2], 1.0);
    EXPECT_THROW(actor_rates(state, params, 2), std::out_of_range);
}

TEST(NextEvent, WaitingTimeMeanAndSplit) {
    EffectSpec spec;
    const auto params = params_for(spec, 1, 3.0, 1.0);
    const ChainState state(Network(5), std::vector<int>(5, 1), CovariateTable::zeros(5));
    const auto rates = actor_rates(state, params, 0);
    Rng rng(17);
    const int draws = 100000;
    double sum = 0.0;
    int network = 0;
    std::vector<int> per_actor(5, 0);
    for (int k = 0; k < draws; ++k) {
        const auto e = next_event(rates, -1e9, rng);
        sum += e.dt;
        network += e.domain == Domain::network;
        ++per_actor[static_cast<std::size_t>(e.actor)];
    }
    EXPECT_NEAR(sum / draws, 1.0 / rates.total, 0.01 / rates.total);
    EXPECT_NEAR(static_cast<double>(network) / draws, 0.75, 0.01);
    for (int c : per_actor) {
        EXPECT_NEAR(static_cast<double>(c) / draws, 0.2, 0.01);
    }
}

TEST(NextEvent, BehaviorRateZeroGivesNetworkOnly) {
    EffectSpec spec;
    const auto params = params_for(spec, 1, 2.0, 0.0);
    const ChainState state(Network(3), std::vector<int>(3, 1), CovariateTable::zeros(3));
    const auto rates = actor_rates(state, params, 0);
    Rng rng(5);
    for (int k = 0; k < 1000; ++k) {
        EXPECT_EQ(next_event(rates, -1e9, rng).domain, Domain::network);
    }
}

TEST(NextEvent, NonPositiveTotalThrows) {
    EffectSpec spec;
    const auto params = params_for(spec, 1, 0.0, 0.0);
    const ChainState state(Network(3), std::vector<int>(3, 1), CovariateTable::zeros(3));
    Rng rng(1);
    EXPECT_THROW(next_event(actor_rates(state, params, 0), 0.0, rng), std::invalid_argument);
}

TEST(NetworkChoice, UniformWhenBetaZero) {
    EffectSpec spec;
    spec.network = {{NK::out_degree, {}}};
    const auto cov = CovariateTable::zeros(3);
    const StatisticContext ctx(spec, cov, 2, {});
    const ChainState state(Network(3), std::vector<int>(3, 1), cov);
    std::vector<ActorId> targets;
    const std::vector<double> beta{0.0};
    const auto p = network_choice_probabilities(0, state, beta, ctx, targets);
    ASSERT_EQ(p.size(), 3u);
    for (double x : p) {
        EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
    }
    EXPECT_EQ(targets, (std::vector<ActorId>{1, 2}));
}

TEST(NetworkChoice, OutDegreeOne) {
    EffectSpec spec;
    spec.network = {{NK::out_degree, {}}};
    const auto cov = CovariateTable::zeros(3);
    const StatisticContext ctx(spec, cov, 2, {});
    const ChainState state(Network(3), std::vector<int>(3, 1), cov);
    std::vector<ActorId> targets;
    const auto p = network_choice_probabilities(0, state, std::vector<double>{1.0}, ctx, targets);
    const double e = std::exp(1.0);
    EXPECT_NEAR(p[0], 1.0 / (1.0 + 2.0 * e), 1e-14);
    EXPECT_NEAR(p[1], e / (1.0 + 2.0 * e), 1e-14);
    EXPECT_NEAR(p[2], e / (1.0 + 2.0 * e), 1e-14);

    const auto strong = network_choice_probabilities(0, state, std::vector<double>{-60.0}, ctx, targets);
    EXPECT_LT(strong[1] + strong[2], 1e-20);
    EXPECT_NEAR(strong[0], 1.0, 1e-15);
}

TEST(NetworkChoice, FullRowOnlyNoChange) {
    EffectSpec spec;
    spec.network = {{NK::out_degree, {}}};
    const auto cov = CovariateTable::zeros(3);
    const StatisticContext ctx(spec, cov, 2, {});
    Network net(3);
    net.add_tie(0, 1);
    net.add_tie(0, 2);
    ChainState state(net, std::vector<int>(3, 1), cov);
    Rng rng(3);
    MicroStepWorkspace ws(3);
    EXPECT_EQ(network_micro_step(0, state, std::vector<double>{2.0}, ctx, rng, ws), -1);
    EXPECT_EQ(state.network, net);
}

TEST(BehaviorChoice, Examples) {
    EffectSpec spec;
    spec.behavior = {{BK::linear_tendency, {}}};
    const auto cov = CovariateTable::zeros(2);
    const StatisticContext ctx(spec, cov, 5, {});

    const ChainState bottom(Network(2), std::vector<int>{1, 3}, cov);
    const auto pb = behavior_choice_probabilities(0, bottom, std::vector<double>{0.0}, ctx);
    EXPECT_EQ(pb[0], 0.0);
    EXPECT_NEAR(pb[1], 0.5, 1e-15);
    EXPECT_NEAR(pb[2], 0.5, 1e-15);

    const ChainState top(Network(2), std::vector<int>{5, 3}, cov);
    EXPECT_EQ(behavior_choice_probabilities(0, top, std::vector<double>{0.3}, ctx)[2], 0.0);

    const auto pi = behavior_choice_probabilities(1, bottom, std::vector<double>{0.0}, ctx);
    for (double x : pi) {
        EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
    }

    const auto pt = behavior_choice_probabilities(1, bottom, std::vector<double>{-0.196}, ctx);
    EXPECT_NEAR(pt[0] / pt[2], std::exp(0.392), 1e-12);
}

TEST(ChoiceProbabilities, SumToOneAndTranslationInvariant) {
    Rng rng(101);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t k = 1 + rng.below(20);
        std::vector<double> u(k);
        for (auto& x : u) {
            x = (rng.uniform() - 0.5) * 40.0;
        }
        const auto p = choice_probabilities(u);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
        const double shift = (rng.uniform() - 0.5) * 1000.0;
        auto shifted = u;
        for (auto& x : shifted) {
            x += shift;
        }
        const auto q = choice_probabilities(shifted);
        for (std::size_t a = 0; a < k; ++a) {
            EXPECT_NEAR(p[a], q[a], 1e-12);
        }
    }
    EXPECT_THROW(choice_probabilities(std::vector<double>{}), std::invalid_argument);
}

TEST(SimulatePeriod, ZeroRatesLeaveStateUnchanged) {
    const auto spec = rich_spec();
    Rng rng(4);
    const auto data = t::random_dataset(10, 2, 4, rng);
    const auto labels = classify_activity(data.behaviors[0]);
    const StatisticContext ctx(spec, data.covariates, 4, labels);
    const auto params = params_for(spec, 1, 0.0, 0.0);
    const auto out = simulate_period(data.networks[0], data.behaviors[0], params, 0, ctx, 99);
    EXPECT_EQ(out.state.network, data.networks[0]);
    EXPECT_EQ(out.state.behavior, data.behaviors[0]);
    EXPECT_EQ(out.network_events + out.behavior_events, 0);
}

TEST(SimulatePeriod, DeterministicGivenSeed) {
    const auto spec = rich_spec();
    Rng rng(6);
    const auto data = t::random_dataset(15, 2, 5, rng);
    const auto labels = classify_activity(data.behaviors[0]);
    const StatisticContext ctx(spec, data.covariates, 5, labels);
    auto params = params_for(spec, 1, 3.0, 2.0);
    params.beta_network = {-1.0, 0.3, 0.5, 0.2, 0.01, 0.4, -0.3};
    params.beta_behavior = {-0.1, 0.8, 0.0001, 0.2};
    SimulationTrace a;
    SimulationTrace b;
    const auto x = simulate_period(data.networks[0], data.behaviors[0], params, 0, ctx, 1234, {&a});
    const auto y = simulate_period(data.networks[0], data.behaviors[0], params, 0, ctx, 1234, {&b});
    EXPECT_EQ(x.state.network, y.state.network);
    EXPECT_EQ(x.state.behavior, y.state.behavior);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].time, b[k].time);
        EXPECT_EQ(a[k].actor, b[k].actor);
        EXPECT_EQ(a[k].choice, b[k].choice);
    }
}

TEST(SimulatePeriod, TraceInvariantsAndCacheVerification) {
    const auto spec = rich_spec();
    Rng rng(8);
    for (int rep = 0; rep < 30; ++rep) {
        const auto data = t::random_dataset(12, 2, 6, rng, 0.15);
        const auto labels = classify_activity(data.behaviors[0]);
        const StatisticContext ctx(spec, data.covariates, 6, labels);
        auto params = params_for(spec, 1, 2.0 + rng.uniform() * 3.0, 1.0 + rng.uniform() * 3.0);
        for (auto& b : params.beta_network) {
            b = rng.uniform() - 0.5;
        }
        for (auto& b : params.beta_behavior) {
            b = rng.uniform() - 0.5;
        }
        params.beta_behavior[2] *= 1e-3;
        SimulationTrace trace;
        SimulationOptions options{&trace, true};
        const auto out =
            simulate_period(data.networks[0], data.behaviors[0], params, 0, ctx, rng.next_u64(), options);
        EXPECT_TRUE(out.state.network.contains(data.networks[0]));
        double last = 0.0;
        Network replay = data.networks[0];
        auto levels = data.behaviors[0];
        for (const auto& ev : trace) {
            EXPECT_GT(ev.time, last);
            EXPECT_LE(ev.time, 1.0);
            last = ev.time;
            if (ev.domain == Domain::network) {
                if (ev.choice >= 0) {
                    EXPECT_TRUE(replay.add_tie(ev.actor, ev.choice));
                }
            } else {
                levels[static_cast<std::size_t>(ev.actor)] += ev.choice;
                EXPECT_GE(levels[static_cast<std::size_t>(ev.actor)], 1);
                EXPECT_LE(levels[static_cast<std::size_t>(ev.actor)], 6);
            }
        }
        EXPECT_EQ(replay, out.state.network);
        EXPECT_EQ(levels, out.state.behavior);
        EXPECT_EQ(static_cast<std::int64_t>(trace.size()), out.network_events + out.behavior_events);
    }
}

TEST(SimulatePeriod, OpportunitiesPerActorMatchRate) {
    EffectSpec spec;
    spec.network = {{NK::out_degree, {}}};
    spec.behavior = {{BK::linear_tendency, {}}};
    const ActorId n = 20;
    const auto cov = CovariateTable::zeros(n);
    const StatisticContext ctx(spec, cov, 4, {});
    const auto params = params_for(spec, 1, 5.0, 0.0);
    const std::vector<int> start(static_cast<std::size_t>(n), 2);
    double events = 0.0;
    double changes = 0.0;
    const int reps = 10000;
    for (int r = 0; r < reps; ++r) {
        Rng rng = Rng::stream(2718, static_cast<std::uint64_t>(r));
        const auto out = simulate_period(Network(n), start, params, 0, ctx, rng);
        events += static_cast<double>(out.network_events);
        changes += static_cast<double>(out.state.network.tie_count());
    }
    EXPECT_NEAR(events / reps / n, 5.0, 0.1);
    EXPECT_LE(changes, events);
}

TEST(SimulatePanel, OneWavePerPeriodAndZeroRates) {
    const auto spec = rich_spec();
    Rng rng(12);
    const auto two = t::random_dataset(8, 2, 3, rng);
    const auto params2 = params_for(spec, 1, 1.0, 1.0);
    EXPECT_EQ(simulate_panel(two, params2, spec, 5).size(), 1u);

    const auto four = t::random_dataset(8, 4, 3, rng);
    const auto zero = params_for(spec, 3, 0.0, 0.0);
    const auto waves = simulate_panel(four, zero, spec, 5);
    ASSERT_EQ(waves.size(), 3u);
    for (std::size_t m = 0; m < waves.size(); ++m) {
        EXPECT_EQ(waves[m].network, four.networks[m]);
        EXPECT_EQ(waves[m].behavior, four.behaviors[m]);
    }
}

TEST(SimulatePanel, DeterministicWithTraces) {
    const auto spec = rich_spec();
    Rng rng(13);
    const auto data = t::random_dataset(10, 3, 4, rng);
    const auto params = params_for(spec, 2, 2.0, 2.0);
    const PanelModel model(data, spec);
    std::vector<SimulationTrace> ta;
    std::vector<SimulationTrace> tb;
    Rng ra(77);
    Rng rb(77);
    const auto a = simulate_panel(model, params, ra, &ta);
    const auto b = simulate_panel(model, params, rb, &tb);
    ASSERT_EQ(ta.size(), 2u);
    for (std::size_t m = 0; m < a.size(); ++m) {
        EXPECT_EQ(a[m].network, b[m].network);
        EXPECT_EQ(a[m].behavior, b[m].behavior);
        EXPECT_EQ(ta[m].size(), tb[m].size());
    }
}

TEST(ParameterVector, FlattenOrderAndValidation) {
    const auto spec = rich_spec();
    auto p = params_for(spec, 2, 1.5, 0.5);
    p.beta_network[0] = -2.0;
    const auto flat = p.flatten();
    EXPECT_EQ(flat.size(), p.size());
    EXPECT_EQ(flat[0], 1.5);
    EXPECT_EQ(flat[2], -2.0);
    EXPECT_EQ(ParameterVector::unflatten(flat, 2, spec), p);
    EXPECT_NO_THROW(p.validate(2, spec));
    auto bad = p;
    bad.rho_network[0] = -1.0;
    EXPECT_THROW(bad.validate(2, spec), std::invalid_argument);
    EXPECT_THROW(p.validate(3, spec), std::invalid_argument);
    const auto names = parameter_names(2, spec);
    EXPECT_EQ(names.size(), flat.size());
    const auto mask = rate_mask(2, spec);
    EXPECT_EQ(std::count(mask.begin(), mask.end(), true), 4);
}
