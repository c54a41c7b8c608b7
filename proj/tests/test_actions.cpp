#include "bms/actions.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace bms;

namespace
{
    std::vector<int> ids(const std::vector<ChannelAllocation> &v)
    {
        std::vector<int> out;
        for (const auto &a : v)
        {
            out.push_back(a.id);
        }
        return out;
    }
} // namespace

TEST(ChannelSet, BasicOperations)
{
    ChannelSet s{1, 3};
    EXPECT_EQ(s.size(), 2);
    EXPECT_TRUE(s.contains(1));
    EXPECT_FALSE(s.contains(2));
    EXPECT_FALSE(s.contains(0));
    EXPECT_FALSE(s.contains(5));
    EXPECT_EQ(s.to_string(), "{1,3}");
    s.erase(1);
    EXPECT_EQ(s, ChannelSet{3});
    EXPECT_TRUE(ChannelSet{}.empty());
    EXPECT_EQ(ChannelSet::all().size(), 4);
    EXPECT_TRUE((ChannelSet{1, 2}).subset_of(ChannelSet::all()));
    EXPECT_FALSE((ChannelSet{1, 2}).intersects(ChannelSet{3, 4}));
    EXPECT_EQ((ChannelSet{1, 2} | ChannelSet{4}).mask(), 0x0b);
    EXPECT_EQ((ChannelSet{1, 2} & ChannelSet{2, 3}), ChannelSet{2});
}

TEST(ChannelSet, OutOfRangeChannelThrows)
{
    EXPECT_THROW(ChannelSet{0}, std::out_of_range);
    EXPECT_THROW(ChannelSet{5}, std::out_of_range);
    ChannelSet s;
    EXPECT_THROW(s.insert(-1), std::out_of_range);
}

TEST(Allocations, SevenContiguousSets)
{
    const auto &a = allocations();
    ASSERT_EQ(a.size(), 7u);
    EXPECT_EQ(a[0].channels, ChannelSet{1});
    EXPECT_EQ(a[3].channels, ChannelSet{4});
    EXPECT_EQ(a[4].channels, (ChannelSet{1, 2}));
    EXPECT_EQ(a[5].channels, (ChannelSet{3, 4}));
    EXPECT_EQ(a[6].channels, ChannelSet::all());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        EXPECT_EQ(a[i].id, static_cast<int>(i + 1));
    }
    EXPECT_EQ(allocation(7).width_mhz(), 80);
    EXPECT_EQ(allocation(5).label(), "#5");
    EXPECT_THROW((void)allocation(0), std::out_of_range);
    EXPECT_THROW((void)allocation(8), std::out_of_range);
}

TEST(Allocations, LookupBySet)
{
    EXPECT_EQ(allocation_for(ChannelSet{3, 4})->id, 6);
    EXPECT_FALSE(allocation_for(ChannelSet{2, 3}).has_value());
    EXPECT_FALSE(allocation_for(ChannelSet{1, 2, 3}).has_value());
}

TEST(CwLadder, Values)
{
    EXPECT_EQ(kCwLadder.front(), 16);
    EXPECT_EQ(kCwLadder.back(), 1024);
    for (std::size_t i = 0; i < kCwLadder.size(); ++i)
    {
        EXPECT_EQ(kCwLadder[i], 1 << (i + 4));
        EXPECT_EQ(cw_index(kCwLadder[i]), i);
    }
    EXPECT_FALSE(cw_index(15).has_value());
    EXPECT_FALSE(cw_index(2048).has_value());
}

TEST(JointSpace, Has84ArmsInLexicographicOrder)
{
    const auto space = enumerate_joint();
    ASSERT_EQ(space.size(), 84u);
    EXPECT_EQ(space.joint_arms.front(), (ActionTriple{allocation(1), 1, 16}));
    EXPECT_EQ(space.joint_arms[7], (ActionTriple{allocation(2), 2, 16}));
    EXPECT_EQ(space.joint_arms.back(), (ActionTriple{allocation(7), 4, 1024}));
    std::size_t from7 = 0;
    for (const auto &t : space.joint_arms)
    {
        EXPECT_TRUE(t.valid());
        from7 += t.channel.id == 7;
    }
    EXPECT_EQ(from7, 28u);
}

TEST(JointSpace, BijectionAgainstNestedEnumeration)
{
    const auto space = enumerate_joint();
    std::set<std::tuple<int, int, int>> seen;
    std::size_t expected_index = 0;
    for (int id = 1; id <= 7; ++id)
    {
        for (int p = 1; p <= 4; ++p)
        {
            if (!allocation(id).channels.contains(p))
            {
                continue;
            }
            for (int cw : kCwLadder)
            {
                const ActionTriple t{allocation(id), p, cw};
                EXPECT_EQ(joint_index(t), expected_index);
                EXPECT_EQ(space.joint_arms[expected_index], t);
                seen.emplace(id, p, cw);
                ++expected_index;
            }
        }
    }
    EXPECT_EQ(seen.size(), 84u);
    EXPECT_EQ(expected_index, 84u);
}

TEST(JointSpace, InvalidTripleRejected)
{
    EXPECT_FALSE((ActionTriple{allocation(1), 2, 16}).valid());
    EXPECT_FALSE((ActionTriple{allocation(1), 1, 20}).valid());
    EXPECT_THROW((void)joint_index(ActionTriple{allocation(5), 3, 16}), std::invalid_argument);
}

TEST(ActionTriple, Labels)
{
    const ActionTriple t{allocation(5), 1, 64};
    EXPECT_EQ(t.label(false), "#5");
    EXPECT_EQ(t.label(true), "#5_1");
}

TEST(FactorizedSpaces, Sizes)
{
    EXPECT_EQ(enumerate_channel_agent().size(), 7u);
    EXPECT_EQ(enumerate_primary_agent().size(), 4u);
    EXPECT_EQ(enumerate_cw_agent().size(), 7u);
    EXPECT_EQ(enumerate_primary_agent().primary_arms, (std::vector<int>{1, 2, 3, 4}));
}

TEST(MaskPrimary, AllocationChannels)
{
    EXPECT_EQ(mask_primary(allocation(1)), ChannelSet{1});
    EXPECT_EQ(mask_primary(allocation(6)), (ChannelSet{3, 4}));
    EXPECT_EQ(mask_primary(allocation(7)), ChannelSet::all());
}

TEST(ChannelNeighbors, Examples)
{
    EXPECT_EQ(ids(channel_neighbors(allocation(1))), (std::vector<int>{5, 7}));
    EXPECT_EQ(ids(channel_neighbors(allocation(4))), (std::vector<int>{6, 7}));
    EXPECT_EQ(ids(channel_neighbors(allocation(5))), (std::vector<int>{1, 2, 7}));
    EXPECT_EQ(ids(channel_neighbors(allocation(7))), (std::vector<int>{1, 2, 3, 4, 5, 6}));
}

TEST(ChannelGraph, StructureAndGamma)
{
    const auto g = channel_graph();
    EXPECT_EQ(g.size(), 7u);
    EXPECT_TRUE(g.symmetric());
    EXPECT_TRUE(g.connected());
    EXPECT_EQ(g.max_degree(), 6u);
    EXPECT_TRUE(g.adjacent(0, 4));
    EXPECT_FALSE(g.adjacent(0, 1));
    EXPECT_FALSE(g.adjacent(4, 5));
}

TEST(LinearNeighbors, Chains)
{
    const auto p = linear_neighbors(SpaceKind::primary_agent);
    EXPECT_EQ(p.size(), 4u);
    EXPECT_EQ(p.neighbors(0), (std::vector<std::size_t>{1}));
    EXPECT_EQ(p.neighbors(2), (std::vector<std::size_t>{1, 3}));
    EXPECT_EQ(p.max_degree(), 2u);
    const auto w = linear_neighbors(SpaceKind::cw_agent);
    EXPECT_EQ(w.size(), 7u);
    EXPECT_EQ(w.neighbors(6), (std::vector<std::size_t>{5}));
    EXPECT_TRUE(w.connected());
    EXPECT_THROW((void)linear_neighbors(SpaceKind::joint), std::invalid_argument);
    EXPECT_EQ(linear_neighbors(std::size_t{1}).max_degree(), 0u);
}

TEST(JointGraph, MatchesBruteForceRule)
{
    const auto space = enumerate_joint();
    const auto g = joint_neighbors();
    ASSERT_EQ(g.size(), 84u);
    std::size_t gamma = 0;
    for (std::size_t u = 0; u < 84; ++u)
    {
        std::size_t degree = 0;
        for (std::size_t v = 0; v < 84; ++v)
        {
            const auto &a = space.joint_arms[u];
            const auto &b = space.joint_arms[v];
            const int di = std::abs(static_cast<int>(*cw_index(a.cw)) - static_cast<int>(*cw_index(b.cw)));
            const bool edge = u != v && (a.channel.channels & b.channel.channels).size() > 0 &&
                              std::abs(a.primary - b.primary) <= 1 && di <= 1;
            EXPECT_EQ(g.adjacent(u, v), edge) << u << " " << v;
            degree += edge;
        }
        EXPECT_EQ(g.neighbors(u).size(), degree);
        gamma = std::max(gamma, degree);
    }
    EXPECT_EQ(g.max_degree(), gamma);
    EXPECT_TRUE(g.symmetric());
    EXPECT_TRUE(g.connected());
}

TEST(JointGraph, ExampleEdges)
{
    const auto g = joint_neighbors();
    const auto i = [](int id, int p, int cw) { return joint_index(ActionTriple{allocation(id), p, cw}); };
    EXPECT_TRUE(g.adjacent(i(1, 1, 16), i(1, 1, 32)));
    EXPECT_FALSE(g.adjacent(i(1, 1, 16), i(1, 1, 64)));
    EXPECT_TRUE(g.adjacent(i(1, 1, 16), i(5, 2, 32)));
    EXPECT_FALSE(g.adjacent(i(1, 1, 16), i(2, 2, 16)));
    EXPECT_FALSE(g.adjacent(i(7, 1, 16), i(7, 3, 16)));
}

TEST(NeighborGraph, SelfLoopsAndDuplicatesIgnored)
{
    NeighborGraph g(3);
    g.add_edge(0, 0);
    g.add_edge(0, 1);
    g.add_edge(1, 0);
    EXPECT_EQ(g.neighbors(0), (std::vector<std::size_t>{1}));
    EXPECT_FALSE(g.connected());
    EXPECT_THROW(g.add_edge(0, 3), std::out_of_range);
    EXPECT_TRUE(NeighborGraph{}.connected());
}
