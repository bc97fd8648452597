#pragma once

#include "coevo/effects.h"
#include "coevo/network.h"
#include "coevo/panel_data.h"
#include "coevo/rng.h"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coevo {

/// Per-period rates and evaluation weights, in EffectSpec order.
struct ParameterVector {
    std::vector<double> rho_network;
    std::vector<double> rho_behavior;
    std::vector<double> beta_network;
    std::vector<double> beta_behavior;

    static ParameterVector zeros(int n_periods, const EffectSpec& spec);

    int n_periods() const noexcept { return static_cast<int>(rho_network.size()); }
    std::size_t size() const noexcept {
        return rho_network.size() + rho_behavior.size() + beta_network.size() +
               beta_behavior.size();
    }

    /// Order: rho_network, beta_network, rho_behavior, beta_behavior; matches MomentVector.
    std::vector<double> flatten() const;
    static ParameterVector unflatten(std::span<const double> flat, int n_periods,
                                     const EffectSpec& spec);

    /// Throws std::invalid_argument on length mismatch, negative or non-finite
    /// rates, or non-finite weights.
    void validate(int n_periods, const EffectSpec& spec) const;

    friend bool operator==(const ParameterVector&, const ParameterVector&) = default;
};

/// Machine names, e.g. "rate_network[1]", "beta_network:out_degree".
std::vector<std::string> parameter_names(int n_periods, const EffectSpec& spec);
/// Report labels, e.g. "Friendship rate (Period 1)", "Out-Degree".
std::vector<std::string> parameter_labels(int n_periods, const EffectSpec& spec);
/// Indices into the flat vector that hold rates.
std::vector<bool> rate_mask(int n_periods, const EffectSpec& spec);

enum class Domain : std::uint8_t { network, behavior };

struct ChainState {
    Network network;
    std::vector<int> behavior;
    double clock = 0.0;
    StatisticsCache cache;

    ChainState() = default;
    ChainState(Network net, std::vector<int> beh, const CovariateTable& covariates);
};

struct ActorRates {
    std::vector<double> network;
    std::vector<double> behavior;
    double total = 0.0;
    bool homogeneous = true;
};

/// lambda_i = rho_m * exp(h_i) with h == 0, so every actor gets the period rate.
ActorRates actor_rates(const ChainState& state, const ParameterVector& params, int period);

struct Event {
    double dt = 0.0;
    ActorId actor = -1;
    Domain domain = Domain::network;
    /// True if the waiting time overshoots the end of the period.
    bool ends_period = false;
};

/// Draws the next event of the chain. Throws std::invalid_argument if the
/// total rate is not positive.
Event next_event(const ActorRates& rates, double clock, Rng& rng);

/// Multinomial-logit probabilities of alternatives with the given utilities.
std::vector<double> choice_probabilities(std::span<const double> utilities);
std::size_t sample_choice(std::span<const double> probabilities, Rng& rng);

/// Scratch buffers reused across micro-steps.
struct MicroStepWorkspace {
    std::vector<std::int64_t> two_paths;
    NetworkChoiceSet choices;
    std::vector<double> utilities;

    explicit MicroStepWorkspace(ActorId n_actors = 0)
        : two_paths(static_cast<std::size_t>(n_actors), 0) {}
};

/// Network choice probabilities for `actor`: element 0 is "no change", then one
/// per tie in `targets` (filled on return).
std::vector<double> network_choice_probabilities(ActorId actor, const ChainState& state,
                                                 std::span<const double> beta,
                                                 const StatisticContext& ctx,
                                                 std::vector<ActorId>& targets);

/// Behavior probabilities for delta = -1, 0, +1 (0 where infeasible).
std::array<double, 3> behavior_choice_probabilities(ActorId actor, const ChainState& state,
                                                    std::span<const double> beta,
                                                    const StatisticContext& ctx);

/// Applies one network decision; returns the new friend or -1 for no change.
ActorId network_micro_step(ActorId actor, ChainState& state, std::span<const double> beta,
                           const StatisticContext& ctx, Rng& rng, MicroStepWorkspace& workspace);

/// Applies one behavior decision; returns the chosen delta.
int behavior_micro_step(ActorId actor, ChainState& state, std::span<const double> beta,
                        const StatisticContext& ctx, Rng& rng);

struct TraceEvent {
    double time = 0.0;
    ActorId actor = -1;
    Domain domain = Domain::network;
    /// network: new friend or -1; behavior: delta
    int choice = 0;
};

using SimulationTrace = std::vector<TraceEvent>;

struct SimulationOptions {
    SimulationTrace* trace = nullptr;
    /// Compare the incremental cache against full recomputation after every
    /// micro-step; throws std::logic_error on mismatch.
    bool verify_cache = false;
};

struct PeriodOutcome {
    ChainState state;
    std::int64_t network_events = 0;
    std::int64_t behavior_events = 0;
};

/// Runs the chain over one unit-length period from the given start state.
PeriodOutcome simulate_period(const Network& start_network, std::span<const int> start_behavior,
                              const ParameterVector& params, int period,
                              const StatisticContext& ctx, Rng& rng,
                              const SimulationOptions& options = {});
PeriodOutcome simulate_period(const Network& start_network, std::span<const int> start_behavior,
                              const ParameterVector& params, int period,
                              const StatisticContext& ctx, std::uint64_t seed,
                              const SimulationOptions& options = {});

/// Dataset + effect spec with per-period activity labels precomputed.
class PanelModel {
public:
    PanelModel(const PanelDataset& dataset, const EffectSpec& spec);

    const PanelDataset& dataset() const noexcept { return *dataset_; }
    const EffectSpec& spec() const noexcept { return *spec_; }
    int n_periods() const noexcept { return dataset_->n_periods(); }
    StatisticContext context(int period) const;

private:
    const PanelDataset* dataset_;
    const EffectSpec* spec_;
    std::vector<std::vector<ActivityLabel>> labels_;
};

struct SimulatedWave {
    Network network;
    std::vector<int> behavior;
};

/// Simulates waves 2..T, each from the observed preceding wave.
/// When `traces` is given it receives one event trace per period.
std::vector<SimulatedWave> simulate_panel(const PanelModel& model, const ParameterVector& params,
                                          Rng& rng, std::vector<SimulationTrace>* traces = nullptr);
std::vector<SimulatedWave> simulate_panel(const PanelDataset& dataset,
                                          const ParameterVector& params, const EffectSpec& spec,
                                          std::uint64_t seed);

/// Conditional panel simulation reduced to the moment vector.
MomentVector simulate_statistics(const PanelModel& model, const ParameterVector& params, Rng& rng);

} // namespace coevo
