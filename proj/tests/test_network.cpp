#include "coevo/network.h"

#include "test_support.h"

#include <gtest/gtest.h>

#include <stdexcept>

using coevo::Network;

TEST(Network, AddTieIsSymmetric) {
    Network net(4);
    EXPECT_TRUE(net.add_tie(0, 2));
    EXPECT_TRUE(net.has_tie(0, 2));
    EXPECT_TRUE(net.has_tie(2, 0));
    EXPECT_EQ(net.tie_count(), 1);
    EXPECT_EQ(net.degree(0), 1);
    EXPECT_EQ(net.degree(2), 1);
    EXPECT_FALSE(net.add_tie(2, 0));
    EXPECT_EQ(net.tie_count(), 1);
}

TEST(Network, RejectsSelfLoopsAndBadIds) {
    Network net(3);
    EXPECT_THROW(net.add_tie(1, 1), std::invalid_argument);
    EXPECT_THROW(net.add_tie(0, 3), std::out_of_range);
    EXPECT_THROW(net.add_tie(-1, 0), std::out_of_range);
}

TEST(Network, CommonNeighbors) {
    Network net(5);
    net.add_tie(0, 1);
    net.add_tie(0, 2);
    net.add_tie(3, 1);
    net.add_tie(3, 2);
    net.add_tie(3, 4);
    EXPECT_EQ(net.common_neighbors(0, 3), 2);
    EXPECT_EQ(net.common_neighbors(1, 2), 2);
    EXPECT_EQ(net.common_neighbors(0, 4), 0);
}

TEST(Network, ContainsEarlierWave) {
    coevo::Rng rng(9);
    const Network a = coevo::testing::random_network(12, 0.3, rng);
    const Network b = coevo::testing::grow_network(a, 0.2, rng);
    EXPECT_TRUE(b.contains(a));
    if (b.tie_count() > a.tie_count()) {
        EXPECT_FALSE(a.contains(b));
    }
}

TEST(Network, DegreeSumIsTwiceTieCount) {
    coevo::Rng rng(2);
    for (int rep = 0; rep < 20; ++rep) {
        const Network net = coevo::testing::random_network(15, 0.25, rng);
        std::int64_t sum = 0;
        for (coevo::ActorId i = 0; i < net.size(); ++i) {
            sum += net.degree(i);
        }
        EXPECT_EQ(sum, 2 * net.tie_count());
    }
}
