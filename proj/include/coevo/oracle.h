#pragma once

#include "coevo/effects.h"
#include "coevo/network.h"
#include "coevo/simulator.h"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <span>
#include <vector>

namespace coevo::oracle {

/// Every (network, behavior) configuration of N actors with L levels.
/// Canonical code = tie bits * L^N + sum_i (p_i - 1) L^i; an optional
/// shuffle permutes the enumeration order.
class StateSpace {
public:
    static constexpr std::size_t default_cap = 100'000;

    StateSpace(ActorId n_actors, int n_levels, std::size_t cap = default_cap,
               std::uint64_t shuffle_seed = 0);

    std::size_t size() const noexcept { return size_; }
    ActorId n_actors() const noexcept { return n_; }
    int n_levels() const noexcept { return levels_; }

    std::size_t index_of(const Network& network, std::span<const int> behavior) const;
    Network network_at(std::size_t index) const;
    std::vector<int> behavior_at(std::size_t index) const;

private:
    std::uint64_t code_of(std::size_t index) const;

    ActorId n_;
    int levels_;
    std::size_t pairs_;
    std::uint64_t behavior_states_;
    std::size_t size_;
    std::vector<std::uint32_t> code_to_index_;
    std::vector<std::uint32_t> index_to_code_;
};

using IntensityMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Generator of the joint chain for one period: off-diagonal entries are
/// lambda_i * Pr(choice) for single-tie additions and unit behavior moves,
/// the diagonal is minus the row sum. Utilities are evaluated on full
/// candidate states, independent of the simulator's delta path.
IntensityMatrix build_intensity_matrix(const StateSpace& space, const ParameterVector& params,
                                       int period, const StatisticContext& ctx);

/// Distribution after `horizon` time units from a point mass, by uniformization
/// truncated when the Poisson tail falls below 1e-12.
Eigen::VectorXd transition_distribution(const IntensityMatrix& q, std::size_t initial_state,
                                        double horizon = 1.0);
Eigen::VectorXd transition_distribution(const IntensityMatrix& q, const Eigen::VectorXd& initial,
                                        double horizon = 1.0);

/// Expected period statistics over end states relative to the start state.
PeriodStatistics exact_expected_statistics(const Eigen::VectorXd& distribution,
                                           const StateSpace& space, const Network& start_network,
                                           std::span<const int> start_behavior,
                                           const StatisticContext& ctx);

} // namespace coevo::oracle
