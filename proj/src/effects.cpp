#include "coevo/effects.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace coevo {

namespace {

std::size_t index_of(Covariate c) { return static_cast<std::size_t>(c); }

constexpr std::array<Covariate, 3> all_covariates{Covariate::gender, Covariate::age,
                                                  Covariate::tenure};

bool needs_covariate(NetworkEffectKind k) {
    return k == NetworkEffectKind::covariate_similarity || k == NetworkEffectKind::covariate_ego;
}

bool needs_covariate(BehaviorEffectKind k) { return k == BehaviorEffectKind::covariate_on_behavior; }

std::string capitalized(Covariate c) {
    switch (c) {
    case Covariate::gender:
        return "Gender";
    case Covariate::age:
        return "Age";
    case Covariate::tenure:
        return "Tenure";
    }
    return "?";
}

} // namespace

void EffectSpec::validate() const {
    for (std::size_t a = 0; a < network.size(); ++a) {
        const auto& e = network[a];
        if (needs_covariate(e.kind) != e.covariate.has_value()) {
            throw std::invalid_argument("network effect " + kind_name(e.kind) +
                                        (e.covariate ? " takes no covariate" : " needs a covariate"));
        }
        for (std::size_t b = a + 1; b < network.size(); ++b) {
            if (network[b] == e) {
                throw std::invalid_argument("duplicate network effect " + effect_name(e));
            }
        }
    }
    for (std::size_t a = 0; a < behavior.size(); ++a) {
        const auto& e = behavior[a];
        if (needs_covariate(e.kind) != e.covariate.has_value()) {
            throw std::invalid_argument("behavior effect " + kind_name(e.kind) +
                                        (e.covariate ? " takes no covariate" : " needs a covariate"));
        }
        for (std::size_t b = a + 1; b < behavior.size(); ++b) {
            if (behavior[b] == e) {
                throw std::invalid_argument("duplicate behavior effect " + effect_name(e));
            }
        }
    }
    const auto has_net = [&](NetworkEffectKind k) {
        return std::any_of(network.begin(), network.end(), [k](const auto& e) { return e.kind == k; });
    };
    const auto has_beh = [&](BehaviorEffectKind k) {
        return std::any_of(behavior.begin(), behavior.end(),
                           [k](const auto& e) { return e.kind == k; });
    };
    if ((has_net(NetworkEffectKind::map_x_similarity) || has_net(NetworkEffectKind::lap_x_similarity)) &&
        !has_net(NetworkEffectKind::behavior_similarity)) {
        throw std::invalid_argument("map/lap similarity interactions require behavior_similarity");
    }
    if ((has_beh(BehaviorEffectKind::map_x_influence) || has_beh(BehaviorEffectKind::lap_x_influence)) &&
        !has_beh(BehaviorEffectKind::influence_similarity)) {
        throw std::invalid_argument("map/lap influence interactions require influence_similarity");
    }
}

std::string kind_name(NetworkEffectKind kind) {
    switch (kind) {
    case NetworkEffectKind::out_degree:
        return "out_degree";
    case NetworkEffectKind::transitivity:
        return "transitivity";
    case NetworkEffectKind::behavior_similarity:
        return "behavior_similarity";
    case NetworkEffectKind::covariate_similarity:
        return "covariate_similarity";
    case NetworkEffectKind::covariate_ego:
        return "covariate_ego";
    case NetworkEffectKind::map_x_similarity:
        return "map_x_similarity";
    case NetworkEffectKind::lap_x_similarity:
        return "lap_x_similarity";
    }
    return "unknown";
}

std::string kind_name(BehaviorEffectKind kind) {
    switch (kind) {
    case BehaviorEffectKind::linear_tendency:
        return "linear_tendency";
    case BehaviorEffectKind::influence_similarity:
        return "influence_similarity";
    case BehaviorEffectKind::covariate_on_behavior:
        return "covariate_on_behavior";
    case BehaviorEffectKind::map_x_influence:
        return "map_x_influence";
    case BehaviorEffectKind::lap_x_influence:
        return "lap_x_influence";
    }
    return "unknown";
}

NetworkEffectKind network_kind_from_string(const std::string& name) {
    for (auto k : {NetworkEffectKind::out_degree, NetworkEffectKind::transitivity,
                   NetworkEffectKind::behavior_similarity, NetworkEffectKind::covariate_similarity,
                   NetworkEffectKind::covariate_ego, NetworkEffectKind::map_x_similarity,
                   NetworkEffectKind::lap_x_similarity}) {
        if (kind_name(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown network effect '" + name + "'");
}

BehaviorEffectKind behavior_kind_from_string(const std::string& name) {
    for (auto k : {BehaviorEffectKind::linear_tendency, BehaviorEffectKind::influence_similarity,
                   BehaviorEffectKind::covariate_on_behavior, BehaviorEffectKind::map_x_influence,
                   BehaviorEffectKind::lap_x_influence}) {
        if (kind_name(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown behavior effect '" + name + "'");
}

std::string effect_name(const NetworkEffect& e) {
    return kind_name(e.kind) + (e.covariate ? "(" + to_string(*e.covariate) + ")" : "");
}

std::string effect_name(const BehaviorEffect& e) {
    return kind_name(e.kind) + (e.covariate ? "(" + to_string(*e.covariate) + ")" : "");
}

std::string effect_label(const NetworkEffect& e) {
    switch (e.kind) {
    case NetworkEffectKind::out_degree:
        return "Out-Degree";
    case NetworkEffectKind::transitivity:
        return "Transitivity";
    case NetworkEffectKind::behavior_similarity:
        return "Posting homophily";
    case NetworkEffectKind::covariate_similarity:
        return capitalized(*e.covariate) + " homophily";
    case NetworkEffectKind::covariate_ego:
        return capitalized(*e.covariate) + " on degree";
    case NetworkEffectKind::map_x_similarity:
        return "High Posters Homophily";
    case NetworkEffectKind::lap_x_similarity:
        return "Low Posters Homophily";
    }
    return effect_name(e);
}

std::string effect_label(const BehaviorEffect& e) {
    switch (e.kind) {
    case BehaviorEffectKind::linear_tendency:
        return "Posting Tendency (Linear Shape)";
    case BehaviorEffectKind::influence_similarity:
        return "Influence";
    case BehaviorEffectKind::covariate_on_behavior:
        return capitalized(*e.covariate) + " on Posting";
    case BehaviorEffectKind::map_x_influence:
        return "High Posters Influence";
    case BehaviorEffectKind::lap_x_influence:
        return "Low Posters Influence";
    }
    return effect_name(e);
}

double behavior_range(int n_levels) {
    if (n_levels < 2) {
        throw std::invalid_argument("behavior needs at least two levels");
    }
    return static_cast<double>(n_levels - 1);
}

StatisticContext::StatisticContext(const EffectSpec& spec, const CovariateTable& covariates,
                                   int n_levels, std::span<const ActivityLabel> labels)
    : spec_{&spec}, covariates_{&covariates}, n_levels_{n_levels},
      range_{behavior_range(n_levels)}, labels_{labels} {
    for (auto c : all_covariates) {
        covariate_range_[index_of(c)] = covariates.range(c);
    }
}

double mean_similarity(std::int64_t degree, std::int64_t distance_sum, double range) {
    if (degree == 0) {
        return 0.0;
    }
    return 1.0 - static_cast<double>(distance_sum) / (range * static_cast<double>(degree));
}

std::int64_t covariate_distance(Covariate c, std::int64_t xi, std::int64_t xj) {
    if (c == Covariate::gender) {
        return xi == xj ? 1 : 0;
    }
    return std::abs(xi - xj);
}

double covariate_similarity(Covariate c, std::int64_t degree, std::int64_t distance_sum,
                            std::int64_t range) {
    if (degree == 0) {
        return 0.0;
    }
    if (c == Covariate::gender) {
        return static_cast<double>(distance_sum) / static_cast<double>(degree);
    }
    if (range == 0) {
        return 1.0;
    }
    return mean_similarity(degree, distance_sum, static_cast<double>(range));
}

ActorAggregates compute_aggregates(ActorId i, const Network& network, std::span<const int> behavior,
                                   const CovariateTable& covariates) {
    ActorAggregates agg;
    const auto friends = network.neighbors(i);
    agg.degree = static_cast<std::int64_t>(friends.size());
    for (std::size_t a = 0; a < friends.size(); ++a) {
        const ActorId j = friends[a];
        agg.behavior_distance += std::abs(behavior[i] - behavior[j]);
        for (auto c : all_covariates) {
            agg.covariate_distance[index_of(c)] +=
                covariate_distance(c, covariates.value(c, i), covariates.value(c, j));
        }
        for (std::size_t b = a + 1; b < friends.size(); ++b) {
            agg.triangles += network.has_tie(j, friends[b]) ? 1 : 0;
        }
    }
    return agg;
}

double network_statistic(const NetworkEffect& effect, ActorId i, const ActorAggregates& agg,
                         int level, const StatisticContext& ctx) {
    (void)level;
    switch (effect.kind) {
    case NetworkEffectKind::out_degree:
        return static_cast<double>(agg.degree);
    case NetworkEffectKind::transitivity:
        return 2.0 * static_cast<double>(agg.triangles);
    case NetworkEffectKind::behavior_similarity:
        return mean_similarity(agg.degree, agg.behavior_distance, ctx.range());
    case NetworkEffectKind::covariate_similarity: {
        const Covariate c = *effect.covariate;
        return covariate_similarity(c, agg.degree, agg.covariate_distance[index_of(c)],
                                    ctx.covariate_range(c));
    }
    case NetworkEffectKind::covariate_ego:
        return static_cast<double>(agg.degree) *
               static_cast<double>(ctx.covariates().value(*effect.covariate, i));
    case NetworkEffectKind::map_x_similarity:
        return ctx.label(i) == ActivityLabel::most_active
                   ? mean_similarity(agg.degree, agg.behavior_distance, ctx.range())
                   : 0.0;
    case NetworkEffectKind::lap_x_similarity:
        return ctx.label(i) == ActivityLabel::least_active
                   ? mean_similarity(agg.degree, agg.behavior_distance, ctx.range())
                   : 0.0;
    }
    return 0.0;
}

double behavior_statistic(const BehaviorEffect& effect, ActorId i, const ActorAggregates& agg,
                          int level, const StatisticContext& ctx) {
    switch (effect.kind) {
    case BehaviorEffectKind::linear_tendency:
        return static_cast<double>(level);
    case BehaviorEffectKind::influence_similarity:
        return mean_similarity(agg.degree, agg.behavior_distance, ctx.range());
    case BehaviorEffectKind::covariate_on_behavior:
        return static_cast<double>(level) *
               static_cast<double>(ctx.covariates().value(*effect.covariate, i));
    case BehaviorEffectKind::map_x_influence:
        return ctx.label(i) == ActivityLabel::most_active
                   ? mean_similarity(agg.degree, agg.behavior_distance, ctx.range())
                   : 0.0;
    case BehaviorEffectKind::lap_x_influence:
        return ctx.label(i) == ActivityLabel::least_active
                   ? mean_similarity(agg.degree, agg.behavior_distance, ctx.range())
                   : 0.0;
    }
    return 0.0;
}

std::vector<double> actor_network_stats(ActorId i, const Network& network,
                                        std::span<const int> behavior,
                                        const StatisticContext& ctx) {
    const auto agg = compute_aggregates(i, network, behavior, ctx.covariates());
    std::vector<double> out;
    out.reserve(ctx.spec().network.size());
    for (const auto& e : ctx.spec().network) {
        out.push_back(network_statistic(e, i, agg, behavior[i], ctx));
    }
    return out;
}

std::vector<double> actor_behavior_stats(ActorId i, const Network& network,
                                         std::span<const int> behavior,
                                         const StatisticContext& ctx) {
    const auto agg = compute_aggregates(i, network, behavior, ctx.covariates());
    std::vector<double> out;
    out.reserve(ctx.spec().behavior.size());
    for (const auto& e : ctx.spec().behavior) {
        out.push_back(behavior_statistic(e, i, agg, behavior[i], ctx));
    }
    return out;
}

namespace {

double dot(std::span<const double> beta, const std::vector<double>& stats) {
    if (beta.size() != stats.size()) {
        throw std::invalid_argument("parameter vector does not match the effect spec");
    }
    double f = 0.0;
    for (std::size_t k = 0; k < stats.size(); ++k) {
        f += beta[k] * stats[k];
    }
    return f;
}

} // namespace

double evaluate_network_objective(ActorId i, const Network& candidate_network,
                                  std::span<const int> behavior, std::span<const double> beta,
                                  const StatisticContext& ctx) {
    return dot(beta, actor_network_stats(i, candidate_network, behavior, ctx));
}

double evaluate_behavior_objective(ActorId i, const Network& network,
                                   std::span<const int> candidate_behavior,
                                   std::span<const double> beta, const StatisticContext& ctx) {
    return dot(beta, actor_behavior_stats(i, network, candidate_behavior, ctx));
}

StatisticsCache::StatisticsCache(const Network& network, std::span<const int> behavior,
                                 const CovariateTable& covariates) {
    actors_.reserve(static_cast<std::size_t>(network.size()));
    for (ActorId i = 0; i < network.size(); ++i) {
        actors_.push_back(compute_aggregates(i, network, behavior, covariates));
    }
}

void StatisticsCache::on_tie_added(ActorId i, ActorId j, const Network& network,
                                   std::span<const int> behavior,
                                   const CovariateTable& covariates) {
    auto& ai = actors_[i];
    auto& aj = actors_[j];
    ++ai.degree;
    ++aj.degree;
    const std::int64_t d = std::abs(behavior[i] - behavior[j]);
    ai.behavior_distance += d;
    aj.behavior_distance += d;
    for (auto c : all_covariates) {
        const auto cd = covariate_distance(c, covariates.value(c, i), covariates.value(c, j));
        ai.covariate_distance[index_of(c)] += cd;
        aj.covariate_distance[index_of(c)] += cd;
    }
    const bool i_smaller = network.degree(i) <= network.degree(j);
    const ActorId scan = i_smaller ? i : j;
    const ActorId other = i_smaller ? j : i;
    for (ActorId h : network.neighbors(scan)) {
        if (h != other && network.has_tie(other, h)) {
            ++ai.triangles;
            ++aj.triangles;
            ++actors_[h].triangles;
        }
    }
}

void StatisticsCache::on_behavior_changed(ActorId i, int old_level, const Network& network,
                                          std::span<const int> behavior) {
    const int new_level = behavior[i];
    for (ActorId j : network.neighbors(i)) {
        const std::int64_t change =
            std::abs(new_level - behavior[j]) - std::abs(old_level - behavior[j]);
        actors_[i].behavior_distance += change;
        actors_[j].behavior_distance += change;
    }
}

void network_choice_gains(ActorId i, const Network& network, std::span<const int> behavior,
                          const StatisticsCache& cache, std::span<const double> beta,
                          const StatisticContext& ctx, std::vector<std::int64_t>& two_path_scratch,
                          NetworkChoiceSet& out) {
    const auto& effects = ctx.spec().network;
    if (beta.size() != effects.size()) {
        throw std::invalid_argument("parameter vector does not match the effect spec");
    }
    out.targets.clear();
    out.gains.clear();

    bool need_two_paths = false;
    for (std::size_t k = 0; k < effects.size(); ++k) {
        need_two_paths |= effects[k].kind == NetworkEffectKind::transitivity && beta[k] != 0.0;
    }
    if (need_two_paths) {
        for (ActorId h : network.neighbors(i)) {
            for (ActorId j : network.neighbors(h)) {
                ++two_path_scratch[j];
            }
        }
    }

    const ActorAggregates& current = cache[i];
    const int level = behavior[i];
    const CovariateTable& cov = ctx.covariates();
    for (ActorId j = 0; j < network.size(); ++j) {
        if (j == i || network.has_tie(i, j)) {
            continue;
        }
        ActorAggregates next = current;
        ++next.degree;
        next.behavior_distance += std::abs(level - behavior[j]);
        next.triangles += two_path_scratch[j];
        for (auto c : all_covariates) {
            next.covariate_distance[index_of(c)] +=
                covariate_distance(c, cov.value(c, i), cov.value(c, j));
        }
        double gain = 0.0;
        for (std::size_t k = 0; k < effects.size(); ++k) {
            if (beta[k] != 0.0) {
                gain += beta[k] * (network_statistic(effects[k], i, next, level, ctx) -
                                   network_statistic(effects[k], i, current, level, ctx));
            }
        }
        out.targets.push_back(j);
        out.gains.push_back(gain);
    }

    if (need_two_paths) {
        for (ActorId h : network.neighbors(i)) {
            for (ActorId j : network.neighbors(h)) {
                two_path_scratch[j] = 0;
            }
        }
    }
}

std::array<std::optional<double>, 3> behavior_choice_gains(ActorId i, const Network& network,
                                                           std::span<const int> behavior,
                                                           const StatisticsCache& cache,
                                                           std::span<const double> beta,
                                                           const StatisticContext& ctx) {
    const auto& effects = ctx.spec().behavior;
    if (beta.size() != effects.size()) {
        throw std::invalid_argument("parameter vector does not match the effect spec");
    }
    const ActorAggregates& current = cache[i];
    const int level = behavior[i];
    std::array<std::optional<double>, 3> gains;
    for (int delta = -1; delta <= 1; ++delta) {
        const int next_level = level + delta;
        if (next_level < 1 || next_level > ctx.n_levels()) {
            continue;
        }
        if (delta == 0) {
            gains[1] = 0.0;
            continue;
        }
        ActorAggregates next = current;
        next.behavior_distance = 0;
        for (ActorId j : network.neighbors(i)) {
            next.behavior_distance += std::abs(next_level - behavior[j]);
        }
        double gain = 0.0;
        for (std::size_t k = 0; k < effects.size(); ++k) {
            if (beta[k] != 0.0) {
                gain += beta[k] * (behavior_statistic(effects[k], i, next, next_level, ctx) -
                                   behavior_statistic(effects[k], i, current, level, ctx));
            }
        }
        gains[static_cast<std::size_t>(delta + 1)] = gain;
    }
    return gains;
}

MomentVector MomentVector::zeros(int n_periods, const EffectSpec& spec) {
    const auto periods = static_cast<std::size_t>(n_periods);
    return {std::vector<double>(periods, 0.0), std::vector<double>(spec.network.size(), 0.0),
            std::vector<double>(periods, 0.0), std::vector<double>(spec.behavior.size(), 0.0)};
}

std::vector<double> MomentVector::flatten() const {
    std::vector<double> flat;
    flat.reserve(size());
    for (const auto* part : {&rate_network, &effect_network, &rate_behavior, &effect_behavior}) {
        flat.insert(flat.end(), part->begin(), part->end());
    }
    return flat;
}

MomentVector MomentVector::unflatten(std::span<const double> flat, int n_periods,
                                     const EffectSpec& spec) {
    MomentVector v = zeros(n_periods, spec);
    if (flat.size() != v.size()) {
        throw std::invalid_argument("flat moment vector has the wrong length");
    }
    std::size_t k = 0;
    for (auto* part : {&v.rate_network, &v.effect_network, &v.rate_behavior, &v.effect_behavior}) {
        for (auto& x : *part) {
            x = flat[k++];
        }
    }
    return v;
}

MomentVector& MomentVector::operator+=(const MomentVector& other) {
    if (other.size() != size()) {
        throw std::invalid_argument("moment vectors have different layouts");
    }
    auto add = [](std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t k = 0; k < a.size(); ++k) {
            a[k] += b[k];
        }
    };
    add(rate_network, other.rate_network);
    add(effect_network, other.effect_network);
    add(rate_behavior, other.rate_behavior);
    add(effect_behavior, other.effect_behavior);
    return *this;
}

std::vector<double> network_effect_totals(const StatisticsCache& cache,
                                          std::span<const int> behavior,
                                          const StatisticContext& ctx) {
    const auto& effects = ctx.spec().network;
    std::vector<double> totals(effects.size(), 0.0);
    for (ActorId i = 0; i < static_cast<ActorId>(cache.size()); ++i) {
        for (std::size_t k = 0; k < effects.size(); ++k) {
            totals[k] += network_statistic(effects[k], i, cache[i], behavior[i], ctx);
        }
    }
    for (std::size_t k = 0; k < effects.size(); ++k) {
        if (effects[k].kind == NetworkEffectKind::out_degree) {
            totals[k] /= 2.0;
        }
    }
    return totals;
}

std::vector<double> behavior_effect_totals(const StatisticsCache& cache,
                                           std::span<const int> behavior,
                                           const StatisticContext& ctx) {
    const auto& effects = ctx.spec().behavior;
    std::vector<double> totals(effects.size(), 0.0);
    for (ActorId i = 0; i < static_cast<ActorId>(cache.size()); ++i) {
        for (std::size_t k = 0; k < effects.size(); ++k) {
            totals[k] += behavior_statistic(effects[k], i, cache[i], behavior[i], ctx);
        }
    }
    return totals;
}

std::vector<double> network_effect_totals(const Network& network, std::span<const int> behavior,
                                          const StatisticContext& ctx) {
    return network_effect_totals(StatisticsCache(network, behavior, ctx.covariates()), behavior, ctx);
}

std::vector<double> behavior_effect_totals(const Network& network, std::span<const int> behavior,
                                           const StatisticContext& ctx) {
    return behavior_effect_totals(StatisticsCache(network, behavior, ctx.covariates()), behavior,
                                  ctx);
}

PeriodStatistics period_statistics(const Network& start_network, std::span<const int> start_behavior,
                                   const Network& end_network, std::span<const int> end_behavior,
                                   const StatisticContext& ctx) {
    PeriodStatistics ps;
    ps.rate_network = 2.0 * static_cast<double>(end_network.tie_count() - start_network.tie_count());
    for (std::size_t i = 0; i < start_behavior.size(); ++i) {
        ps.rate_behavior += std::abs(end_behavior[i] - start_behavior[i]);
    }
    // cross-lagged: ties formed against the behavior they were formed on,
    // behavior reached against the friends held when the period began
    ps.effect_network = network_effect_totals(end_network, start_behavior, ctx);
    ps.effect_behavior = behavior_effect_totals(start_network, end_behavior, ctx);
    return ps;
}

std::vector<ActivityLabel> period_labels(const PanelDataset& dataset, int period) {
    return classify_activity(dataset.behaviors.at(static_cast<std::size_t>(period)), dataset.cutoffs);
}

TargetStatistics target_statistics(const PanelDataset& dataset, const EffectSpec& spec) {
    spec.validate();
    TargetStatistics t = TargetStatistics::zeros(dataset.n_periods(), spec);
    for (int m = 0; m < dataset.n_periods(); ++m) {
        const auto labels = period_labels(dataset, m);
        const StatisticContext ctx(spec, dataset.covariates, dataset.n_levels, labels);
        const auto ps = period_statistics(dataset.networks[m], dataset.behaviors[m],
                                          dataset.networks[m + 1], dataset.behaviors[m + 1], ctx);
        t.rate_network[m] = ps.rate_network;
        t.rate_behavior[m] = ps.rate_behavior;
        for (std::size_t k = 0; k < ps.effect_network.size(); ++k) {
            t.effect_network[k] += ps.effect_network[k];
        }
        for (std::size_t k = 0; k < ps.effect_behavior.size(); ++k) {
            t.effect_behavior[k] += ps.effect_behavior[k];
        }
    }
    return t;
}

} // namespace coevo
