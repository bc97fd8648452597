#pragma once

#include "coevo/network.h"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace coevo {

/// Malformed or inconsistent input data. The message names the offending record.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Covariate { gender, age, tenure };

std::string to_string(Covariate c);
Covariate covariate_from_string(const std::string& name);

/// Wave-constant actor attributes. Gender is a categorical code.
struct CovariateTable {
    std::vector<std::int64_t> gender;
    std::vector<std::int64_t> age;
    std::vector<std::int64_t> tenure_days;

    static CovariateTable zeros(ActorId n_actors);

    std::size_t size() const noexcept { return gender.size(); }
    std::span<const std::int64_t> column(Covariate c) const noexcept;
    std::int64_t value(Covariate c, ActorId i) const noexcept { return column(c)[i]; }
    /// max - min over actors; 0 for an empty table.
    std::int64_t range(Covariate c) const noexcept;
};

enum class ActivityLabel : std::uint8_t { moderate, most_active, least_active };

struct ActivityCutoffs {
    double least_active = 0.10;
    double most_active = 0.90;
};

enum class BehaviorValues { counts, levels };
enum class BinningMode { pooled, per_wave };

struct DataConfig {
    int n_levels = 8;
    BehaviorValues values = BehaviorValues::counts;
    BinningMode binning = BinningMode::pooled;
    ActivityCutoffs cutoffs;
};

/// N actors observed over T waves: cumulative undirected networks, behavior
/// levels in [1, L], the raw behavior values they were derived from, and
/// covariates.
struct PanelDataset {
    ActorId n_actors = 0;
    int n_levels = 2;
    std::vector<Network> networks;
    std::vector<std::vector<int>> behaviors;
    std::vector<std::vector<std::int64_t>> raw_values;
    CovariateTable covariates;
    ActivityCutoffs cutoffs;
    /// Quantile breakpoints used when raw counts were binned (one row when pooled).
    std::vector<std::vector<std::int64_t>> breakpoints;

    int n_waves() const noexcept { return static_cast<int>(networks.size()); }
    int n_periods() const noexcept { return n_waves() - 1; }

    /// Throws DataError if any invariant is violated.
    void validate() const;
};

PanelDataset load_dataset(const std::filesystem::path& edge_file,
                          const std::filesystem::path& behavior_file,
                          const std::optional<std::filesystem::path>& covariate_file,
                          const DataConfig& config);

struct Binning {
    std::vector<std::vector<int>> levels;
    std::vector<std::vector<std::int64_t>> breakpoints;
};

/// Maps raw per-wave counts (waves x actors) to levels 1..L using nearest-rank
/// quantile breakpoints k/L, k = 1..L-1. A count maps to 1 + (number of
/// breakpoints strictly below it).
Binning bin_counts_to_levels(const std::vector<std::vector<std::int64_t>>& raw_counts, int n_levels,
                             BinningMode mode = BinningMode::pooled);

struct NetworkSummary {
    double density = 0.0;
    double average_degree = 0.0;
    std::int64_t tie_count = 0;
};

NetworkSummary summarize_network(const Network& network);
std::vector<NetworkSummary> describe_network(const PanelDataset& dataset);

struct NetworkChange {
    std::int64_t n00 = 0;
    std::int64_t n01 = 0;
    std::int64_t n10 = 0;
    std::int64_t n11 = 0;
    /// Empty when the union of both waves' ties is empty.
    std::optional<double> jaccard;
};

NetworkChange compare_networks(const Network& from, const Network& to);
std::optional<double> jaccard_index(std::int64_t n01, std::int64_t n10, std::int64_t n11);
std::vector<NetworkChange> network_change_table(const PanelDataset& dataset);

struct BehaviorChange {
    std::int64_t n_decrease = 0;
    std::int64_t n_increase = 0;
    std::int64_t n_constant = 0;
};

struct BehaviorChangeTable {
    std::vector<BehaviorChange> periods;
    /// histogram[level - 1][wave]
    std::vector<std::vector<std::int64_t>> histogram;
};

BehaviorChange compare_behavior(std::span<const int> from, std::span<const int> to);
std::vector<std::int64_t> level_histogram(std::span<const int> levels, int n_levels);
BehaviorChangeTable behavior_change_table(const PanelDataset& dataset);

/// MAP / LAP / MoAP labels for one wave. The MAP cutoff is the level at
/// descending rank ceil((1 - most_active) * N), the LAP cutoff the level at
/// ascending rank ceil(least_active * N). Actors at or above the MAP cutoff are
/// MAP, at or below the LAP cutoff LAP; an actor meeting both is MoAP.
std::vector<ActivityLabel> classify_activity(std::span<const int> levels,
                                             const ActivityCutoffs& cutoffs = {});

} // namespace coevo
