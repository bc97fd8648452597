#pragma once

#include "coevo/network.h"
#include "coevo/panel_data.h"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coevo {

enum class NetworkEffectKind {
    out_degree,
    transitivity,
    behavior_similarity,
    covariate_similarity,
    covariate_ego,
    map_x_similarity,
    lap_x_similarity,
};

enum class BehaviorEffectKind {
    linear_tendency,
    influence_similarity,
    covariate_on_behavior,
    map_x_influence,
    lap_x_influence,
};

struct NetworkEffect {
    NetworkEffectKind kind;
    std::optional<Covariate> covariate;
    friend bool operator==(const NetworkEffect&, const NetworkEffect&) = default;
};

struct BehaviorEffect {
    BehaviorEffectKind kind;
    std::optional<Covariate> covariate;
    friend bool operator==(const BehaviorEffect&, const BehaviorEffect&) = default;
};

/// Ordered effect catalog for a model. Order fixes parameter and statistic order.
struct EffectSpec {
    std::vector<NetworkEffect> network;
    std::vector<BehaviorEffect> behavior;

    /// Throws std::invalid_argument on duplicates, missing covariates, or
    /// interaction effects without their base similarity effect.
    void validate() const;

    friend bool operator==(const EffectSpec&, const EffectSpec&) = default;
};

std::string kind_name(NetworkEffectKind kind);
std::string kind_name(BehaviorEffectKind kind);
NetworkEffectKind network_kind_from_string(const std::string& name);
BehaviorEffectKind behavior_kind_from_string(const std::string& name);

/// Machine name, e.g. "covariate_similarity(age)".
std::string effect_name(const NetworkEffect& e);
std::string effect_name(const BehaviorEffect& e);
/// Report label, e.g. "Age homophily".
std::string effect_label(const NetworkEffect& e);
std::string effect_label(const BehaviorEffect& e);

/// Range used to normalise behavior distances: L - 1.
double behavior_range(int n_levels);

/// Per-actor integer aggregates from which every statistic is evaluated.
/// Kept exact so incremental updates and recomputation agree bit for bit.
struct ActorAggregates {
    std::int64_t degree = 0;
    /// sum over friends of |p_i - p_j|
    std::int64_t behavior_distance = 0;
    /// triangles containing i
    std::int64_t triangles = 0;
    /// per covariate: gender counts matching friends, numeric covariates sum |x_i - x_j|
    std::array<std::int64_t, 3> covariate_distance{};

    friend bool operator==(const ActorAggregates&, const ActorAggregates&) = default;
};

/// Everything fixed within a period that statistics depend on besides the state.
class StatisticContext {
public:
    StatisticContext(const EffectSpec& spec, const CovariateTable& covariates, int n_levels,
                     std::span<const ActivityLabel> labels);

    const EffectSpec& spec() const noexcept { return *spec_; }
    const CovariateTable& covariates() const noexcept { return *covariates_; }
    int n_levels() const noexcept { return n_levels_; }
    double range() const noexcept { return range_; }
    std::int64_t covariate_range(Covariate c) const noexcept {
        return covariate_range_[static_cast<std::size_t>(c)];
    }
    ActivityLabel label(ActorId i) const noexcept {
        return labels_.empty() ? ActivityLabel::moderate : labels_[i];
    }
    std::span<const ActivityLabel> labels() const noexcept { return labels_; }

private:
    const EffectSpec* spec_;
    const CovariateTable* covariates_;
    int n_levels_;
    double range_;
    std::array<std::int64_t, 3> covariate_range_{};
    std::span<const ActivityLabel> labels_;
};

/// Mean over friends of 1 - distance / range; 0 for isolates.
double mean_similarity(std::int64_t degree, std::int64_t distance_sum, double range);
/// Similarity contribution of one covariate pair (gender: exact match).
std::int64_t covariate_distance(Covariate c, std::int64_t xi, std::int64_t xj);
double covariate_similarity(Covariate c, std::int64_t degree, std::int64_t distance_sum,
                            std::int64_t range);

ActorAggregates compute_aggregates(ActorId i, const Network& network, std::span<const int> behavior,
                                   const CovariateTable& covariates);

double network_statistic(const NetworkEffect& effect, ActorId i, const ActorAggregates& agg,
                         int level, const StatisticContext& ctx);
double behavior_statistic(const BehaviorEffect& effect, ActorId i, const ActorAggregates& agg,
                          int level, const StatisticContext& ctx);

/// s_ik for every network effect, recomputed from the state.
std::vector<double> actor_network_stats(ActorId i, const Network& network,
                                        std::span<const int> behavior,
                                        const StatisticContext& ctx);
std::vector<double> actor_behavior_stats(ActorId i, const Network& network,
                                         std::span<const int> behavior,
                                         const StatisticContext& ctx);

/// sum_k beta_k s_ik on the given (candidate) state.
double evaluate_network_objective(ActorId i, const Network& candidate_network,
                                  std::span<const int> behavior, std::span<const double> beta,
                                  const StatisticContext& ctx);
double evaluate_behavior_objective(ActorId i, const Network& network,
                                   std::span<const int> candidate_behavior,
                                   std::span<const double> beta, const StatisticContext& ctx);

/// Incrementally maintained aggregates for every actor.
class StatisticsCache {
public:
    StatisticsCache() = default;
    StatisticsCache(const Network& network, std::span<const int> behavior,
                    const CovariateTable& covariates);

    const ActorAggregates& operator[](ActorId i) const noexcept { return actors_[i]; }
    std::size_t size() const noexcept { return actors_.size(); }

    /// Call after the tie i--j has been added to `network`.
    void on_tie_added(ActorId i, ActorId j, const Network& network, std::span<const int> behavior,
                      const CovariateTable& covariates);
    /// Call after actor i's level changed from old_level to behavior[i].
    void on_behavior_changed(ActorId i, int old_level, const Network& network,
                             std::span<const int> behavior);

    friend bool operator==(const StatisticsCache&, const StatisticsCache&) = default;

private:
    std::vector<ActorAggregates> actors_;
};

/// Utility gains (f(candidate) - f(current)) of each tie an actor may add.
struct NetworkChoiceSet {
    std::vector<ActorId> targets;
    std::vector<double> gains;
};

/// Hot-path delta evaluation. `two_path_scratch` must be size N and all zero;
/// it is left all zero on return.
void network_choice_gains(ActorId i, const Network& network, std::span<const int> behavior,
                          const StatisticsCache& cache, std::span<const double> beta,
                          const StatisticContext& ctx, std::vector<std::int64_t>& two_path_scratch,
                          NetworkChoiceSet& out);

/// Gains for delta in {-1, 0, +1}; entries for infeasible moves are empty.
std::array<std::optional<double>, 3> behavior_choice_gains(ActorId i, const Network& network,
                                                           std::span<const int> behavior,
                                                           const StatisticsCache& cache,
                                                           std::span<const double> beta,
                                                           const StatisticContext& ctx);

/// Moment statistics in model order. Rates are per period; effects are summed
/// over periods.
struct MomentVector {
    std::vector<double> rate_network;
    std::vector<double> effect_network;
    std::vector<double> rate_behavior;
    std::vector<double> effect_behavior;

    static MomentVector zeros(int n_periods, const EffectSpec& spec);
    std::size_t size() const noexcept {
        return rate_network.size() + effect_network.size() + rate_behavior.size() +
               effect_behavior.size();
    }
    std::vector<double> flatten() const;
    static MomentVector unflatten(std::span<const double> flat, int n_periods,
                                  const EffectSpec& spec);
    MomentVector& operator+=(const MomentVector& other);
};

using TargetStatistics = MomentVector;

/// Sum over actors of each effect statistic; out_degree counts each undirected
/// tie once.
std::vector<double> network_effect_totals(const Network& network, std::span<const int> behavior,
                                          const StatisticContext& ctx);
std::vector<double> behavior_effect_totals(const Network& network, std::span<const int> behavior,
                                           const StatisticContext& ctx);
std::vector<double> network_effect_totals(const StatisticsCache& cache,
                                          std::span<const int> behavior,
                                          const StatisticContext& ctx);
std::vector<double> behavior_effect_totals(const StatisticsCache& cache,
                                           std::span<const int> behavior,
                                           const StatisticContext& ctx);

/// Contribution of one period to the moment vector: change counts relative to
/// the start state; network effect totals on (end network, start behavior) and
/// behavior effect totals on (start network, end behavior).
struct PeriodStatistics {
    double rate_network = 0.0;
    double rate_behavior = 0.0;
    std::vector<double> effect_network;
    std::vector<double> effect_behavior;
};

PeriodStatistics period_statistics(const Network& start_network, std::span<const int> start_behavior,
                                   const Network& end_network, std::span<const int> end_behavior,
                                   const StatisticContext& ctx);

/// Activity labels frozen at the start wave of period m (0-based).
std::vector<ActivityLabel> period_labels(const PanelDataset& dataset, int period);

TargetStatistics target_statistics(const PanelDataset& dataset, const EffectSpec& spec);

} // namespace coevo
