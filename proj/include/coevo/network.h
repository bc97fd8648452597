#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace coevo {

using ActorId = std::int32_t;

/// Symmetric, loop-free binary network. Keeps a dense adjacency matrix for
/// O(1) tie lookup and neighbour lists for O(degree) iteration.
class Network {
public:
    Network() = default;
    explicit Network(ActorId n_actors);

    ActorId size() const noexcept { return n_; }

    bool has_tie(ActorId i, ActorId j) const noexcept {
        return adjacency_[static_cast<std::size_t>(i) * n_ + j] != 0;
    }

    /// Adds the undirected tie i--j. Returns false if it was already present.
    bool add_tie(ActorId i, ActorId j);

    std::span<const ActorId> neighbors(ActorId i) const noexcept { return neighbors_[i]; }
    ActorId degree(ActorId i) const noexcept {
        return static_cast<ActorId>(neighbors_[i].size());
    }

    /// Number of undirected ties.
    std::int64_t tie_count() const noexcept { return ties_; }

    /// Number of common neighbours of i and j.
    std::int64_t common_neighbors(ActorId i, ActorId j) const noexcept;

    /// True if every tie of `earlier` is present here.
    bool contains(const Network& earlier) const;

    friend bool operator==(const Network& a, const Network& b) {
        return a.n_ == b.n_ && a.adjacency_ == b.adjacency_;
    }

private:
    ActorId n_ = 0;
    std::int64_t ties_ = 0;
    std::vector<std::uint8_t> adjacency_;
    std::vector<std::vector<ActorId>> neighbors_;
};

} // namespace coevo
