#include "coevo/oracle.h"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace coevo::oracle {

namespace {

std::vector<std::pair<ActorId, ActorId>> pair_list(ActorId n) {
    std::vector<std::pair<ActorId, ActorId>> pairs;
    for (ActorId i = 0; i < n; ++i) {
        for (ActorId j = i + 1; j < n; ++j) {
            pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

std::vector<double> softmax(const std::vector<double>& u) {
    double top = u[0];
    for (double x : u) {
        top = std::max(top, x);
    }
    std::vector<double> p(u.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        p[k] = std::exp(u[k] - top);
        sum += p[k];
    }
    for (auto& x : p) {
        x /= sum;
    }
    return p;
}

} // namespace

StateSpace::StateSpace(ActorId n_actors, int n_levels, std::size_t cap, std::uint64_t shuffle_seed)
    : n_{n_actors}, levels_{n_levels} {
    if (n_actors < 1 || n_levels < 2) {
        throw std::invalid_argument("state space needs N >= 1 and L >= 2");
    }
    pairs_ = static_cast<std::size_t>(n_actors) * static_cast<std::size_t>(n_actors - 1) / 2;
    double total = std::ldexp(1.0, static_cast<int>(pairs_)) * std::pow(n_levels, n_actors);
    if (total > static_cast<double>(cap)) {
        throw std::invalid_argument("state space of " + std::to_string(total) +
                                    " states exceeds the cap of " + std::to_string(cap));
    }
    behavior_states_ = 1;
    for (ActorId i = 0; i < n_actors; ++i) {
        behavior_states_ *= static_cast<std::uint64_t>(n_levels);
    }
    size_ = (std::size_t{1} << pairs_) * behavior_states_;
    index_to_code_.resize(size_);
    std::iota(index_to_code_.begin(), index_to_code_.end(), 0u);
    if (shuffle_seed != 0) {
        Rng rng(shuffle_seed);
        for (std::size_t k = size_ - 1; k > 0; --k) {
            std::swap(index_to_code_[k], index_to_code_[rng.below(k + 1)]);
        }
    }
    code_to_index_.resize(size_);
    for (std::size_t k = 0; k < size_; ++k) {
        code_to_index_[index_to_code_[k]] = static_cast<std::uint32_t>(k);
    }
}

std::uint64_t StateSpace::code_of(std::size_t index) const { return index_to_code_.at(index); }

std::size_t StateSpace::index_of(const Network& network, std::span<const int> behavior) const {
    if (network.size() != n_ || behavior.size() != static_cast<std::size_t>(n_)) {
        throw std::invalid_argument("state does not match the state space");
    }
    std::uint64_t bits = 0;
    std::size_t b = 0;
    for (ActorId i = 0; i < n_; ++i) {
        for (ActorId j = i + 1; j < n_; ++j, ++b) {
            if (network.has_tie(i, j)) {
                bits |= std::uint64_t{1} << b;
            }
        }
    }
    std::uint64_t beh = 0;
    for (ActorId i = n_ - 1; i >= 0; --i) {
        const int level = behavior[static_cast<std::size_t>(i)];
        if (level < 1 || level > levels_) {
            throw std::invalid_argument("behavior level outside the state space");
        }
        beh = beh * static_cast<std::uint64_t>(levels_) + static_cast<std::uint64_t>(level - 1);
    }
    return code_to_index_[bits * behavior_states_ + beh];
}

Network StateSpace::network_at(std::size_t index) const {
    const std::uint64_t bits = code_of(index) / behavior_states_;
    Network net(n_);
    std::size_t b = 0;
    for (const auto& [i, j] : pair_list(n_)) {
        if ((bits >> b) & 1u) {
            net.add_tie(i, j);
        }
        ++b;
    }
    return net;
}

std::vector<int> StateSpace::behavior_at(std::size_t index) const {
    std::uint64_t beh = code_of(index) % behavior_states_;
    std::vector<int> levels(static_cast<std::size_t>(n_));
    for (auto& level : levels) {
        level = static_cast<int>(beh % static_cast<std::uint64_t>(levels_)) + 1;
        beh /= static_cast<std::uint64_t>(levels_);
    }
    return levels;
}

IntensityMatrix build_intensity_matrix(const StateSpace& space, const ParameterVector& params,
                                       int period, const StatisticContext& ctx) {
    if (period < 0 || period >= params.n_periods()) {
        throw std::out_of_range("period index out of range");
    }
    const double rho_net = params.rho_network[static_cast<std::size_t>(period)];
    const double rho_beh = params.rho_behavior[static_cast<std::size_t>(period)];
    const ActorId n = space.n_actors();
    std::vector<Eigen::Triplet<double>> entries;

    for (std::size_t s = 0; s < space.size(); ++s) {
        const Network net = space.network_at(s);
        const std::vector<int> beh = space.behavior_at(s);
        double outflow = 0.0;
        for (ActorId i = 0; i < n; ++i) {
            if (rho_net > 0.0) {
                std::vector<double> utility{
                    evaluate_network_objective(i, net, beh, params.beta_network, ctx)};
                std::vector<std::size_t> targets;
                for (ActorId j = 0; j < n; ++j) {
                    if (j == i || net.has_tie(i, j)) {
                        continue;
                    }
                    Network candidate = net;
                    candidate.add_tie(i, j);
                    utility.push_back(
                        evaluate_network_objective(i, candidate, beh, params.beta_network, ctx));
                    targets.push_back(space.index_of(candidate, beh));
                }
                const auto p = softmax(utility);
                for (std::size_t k = 0; k < targets.size(); ++k) {
                    const double rate = rho_net * p[k + 1];
                    entries.emplace_back(static_cast<int>(s), static_cast<int>(targets[k]), rate);
                    outflow += rate;
                }
            }
            if (rho_beh > 0.0) {
                std::vector<double> utility;
                std::vector<int> deltas;
                for (int delta : {-1, 0, 1}) {
                    const int level = beh[static_cast<std::size_t>(i)] + delta;
                    if (level < 1 || level > space.n_levels()) {
                        continue;
                    }
                    std::vector<int> candidate = beh;
                    candidate[static_cast<std::size_t>(i)] = level;
                    utility.push_back(
                        evaluate_behavior_objective(i, net, candidate, params.beta_behavior, ctx));
                    deltas.push_back(delta);
                }
                const auto p = softmax(utility);
                for (std::size_t k = 0; k < deltas.size(); ++k) {
                    if (deltas[k] == 0) {
                        continue;
                    }
                    std::vector<int> candidate = beh;
                    candidate[static_cast<std::size_t>(i)] += deltas[k];
                    const double rate = rho_beh * p[k];
                    entries.emplace_back(static_cast<int>(s),
                                         static_cast<int>(space.index_of(net, candidate)), rate);
                    outflow += rate;
                }
            }
        }
        entries.emplace_back(static_cast<int>(s), static_cast<int>(s), -outflow);
    }
    const auto dim = static_cast<Eigen::Index>(space.size());
    IntensityMatrix q(dim, dim);
    q.setFromTriplets(entries.begin(), entries.end());
    q.makeCompressed();
    return q;
}

Eigen::VectorXd transition_distribution(const IntensityMatrix& q, std::size_t initial_state,
                                        double horizon) {
    Eigen::VectorXd start = Eigen::VectorXd::Zero(q.rows());
    start(static_cast<Eigen::Index>(initial_state)) = 1.0;
    return transition_distribution(q, start, horizon);
}

Eigen::VectorXd transition_distribution(const IntensityMatrix& q, const Eigen::VectorXd& initial,
                                        double horizon) {
    if (q.rows() != q.cols() || q.rows() != initial.size()) {
        throw std::invalid_argument("intensity matrix and initial distribution do not match");
    }
    double lambda = 0.0;
    for (Eigen::Index s = 0; s < q.rows(); ++s) {
        lambda = std::max(lambda, -q.coeff(s, s));
    }
    if (lambda <= 0.0 || horizon <= 0.0) {
        return initial;
    }
    const double lt = lambda * horizon;
    const IntensityMatrix qt = q.transpose();
    Eigen::VectorXd term = initial;
    Eigen::VectorXd result = Eigen::VectorXd::Zero(initial.size());
    double covered = 0.0;
    for (long k = 0;; ++k) {
        const double weight =
            std::exp(-lt + static_cast<double>(k) * std::log(lt) - std::lgamma(k + 1.0));
        result += weight * term;
        covered += weight;
        if (1.0 - covered < 1e-12 && static_cast<double>(k) > lt) {
            break;
        }
        if (k > 100000) {
            throw std::runtime_error("uniformization did not converge");
        }
        term += (qt * term) / lambda;
    }
    return result;
}

PeriodStatistics exact_expected_statistics(const Eigen::VectorXd& distribution,
                                           const StateSpace& space, const Network& start_network,
                                           std::span<const int> start_behavior,
                                           const StatisticContext& ctx) {
    if (static_cast<std::size_t>(distribution.size()) != space.size()) {
        throw std::invalid_argument("distribution does not match the state space");
    }
    PeriodStatistics expected;
    expected.effect_network.assign(ctx.spec().network.size(), 0.0);
    expected.effect_behavior.assign(ctx.spec().behavior.size(), 0.0);
    for (std::size_t s = 0; s < space.size(); ++s) {
        const double p = distribution(static_cast<Eigen::Index>(s));
        if (p == 0.0) {
            continue;
        }
        const Network net = space.network_at(s);
        const std::vector<int> beh = space.behavior_at(s);
        const auto ps = period_statistics(start_network, start_behavior, net, beh, ctx);
        expected.rate_network += p * ps.rate_network;
        expected.rate_behavior += p * ps.rate_behavior;
        for (std::size_t k = 0; k < ps.effect_network.size(); ++k) {
            expected.effect_network[k] += p * ps.effect_network[k];
        }
        for (std::size_t k = 0; k < ps.effect_behavior.size(); ++k) {
            expected.effect_behavior[k] += p * ps.effect_behavior[k];
        }
    }
    return expected;
}

} // namespace coevo::oracle
