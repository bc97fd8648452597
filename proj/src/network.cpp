#include "coevo/network.h"

#include <stdexcept>

namespace coevo {

Network::Network(ActorId n_actors)
    : n_{n_actors},
      adjacency_(static_cast<std::size_t>(n_actors) * static_cast<std::size_t>(n_actors), 0),
      neighbors_(static_cast<std::size_t>(n_actors)) {
    if (n_actors < 0) {
        throw std::invalid_argument("network size must be non-negative");
    }
}

bool Network::add_tie(ActorId i, ActorId j) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) {
        throw std::out_of_range("tie endpoint outside the actor set");
    }
    if (i == j) {
        throw std::invalid_argument("self-loop");
    }
    auto& a = adjacency_[static_cast<std::size_t>(i) * n_ + j];
    if (a != 0) {
        return false;
    }
    a = 1;
    adjacency_[static_cast<std::size_t>(j) * n_ + i] = 1;
    neighbors_[i].push_back(j);
    neighbors_[j].push_back(i);
    ++ties_;
    return true;
}

std::int64_t Network::common_neighbors(ActorId i, ActorId j) const noexcept {
    const auto& small = neighbors_[i].size() <= neighbors_[j].size() ? neighbors_[i] : neighbors_[j];
    const ActorId other = neighbors_[i].size() <= neighbors_[j].size() ? j : i;
    std::int64_t count = 0;
    for (ActorId h : small) {
        count += has_tie(other, h) ? 1 : 0;
    }
    return count;
}

bool Network::contains(const Network& earlier) const {
    if (earlier.n_ != n_) {
        return false;
    }
    for (std::size_t k = 0; k < adjacency_.size(); ++k) {
        if (earlier.adjacency_[k] != 0 && adjacency_[k] == 0) {
            return false;
        }
    }
    return true;
}

} // namespace coevo
