#include "bms/harness.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace bms;

namespace
{
    ContextSnapshot idle_snapshot(double qutil = 1.0)
    {
        ContextSnapshot s;
        s.queue_util = qutil;
        return s;
    }

    ContextSnapshot sample_snapshot()
    {
        ContextSnapshot s;
        s.occupancy = {0.1, 0.2, 0.3, 0.4};
        s.busy = {0.0, 1.0, 0.0, 1.0};
        s.queue_util = 0.5;
        return s;
    }
} // namespace

TEST(Names, ParseAndPrint)
{
    for (auto a : {Algorithm::ucb, Algorithm::osub, Algorithm::linucb, Algorithm::erlb, Algorithm::random})
    {
        EXPECT_EQ(parse_algorithm(to_string(a)), a);
    }
    EXPECT_EQ(parse_architecture("sa"), Architecture::sa);
    EXPECT_EQ(parse_architecture("ma"), Architecture::ma);
    EXPECT_FALSE(parse_algorithm("thompson").has_value());
    EXPECT_FALSE(parse_architecture("xa").has_value());
    EXPECT_EQ(to_string(Stage::cw), "cw");
}

TEST(Context, Dimensions)
{
    EXPECT_EQ(context_dim(Stage::sa), 9u);
    EXPECT_EQ(context_dim(Stage::channel), 9u);
    EXPECT_EQ(context_dim(Stage::primary), 12u);
    EXPECT_EQ(context_dim(Stage::cw), 17u);
}

TEST(Context, IdleSaVector)
{
    const auto x = build_context(idle_snapshot(1.0), Stage::sa);
    EXPECT_EQ(x, (std::vector<double>{0, 0, 0, 0, 0, 0, 0, 0, 1}));
}

TEST(Context, StageLayouts)
{
    const auto s = sample_snapshot();
    EXPECT_EQ(build_context(s, Stage::channel), (std::vector<double>{0.1, 0.2, 0.3, 0.4, 0, 1, 0, 1, 0.5}));
    EXPECT_EQ(build_context(s, Stage::primary, allocation(5)),
              (std::vector<double>{0.1, 0.2, 0.3, 0.4, 0, 1, 0, 1, 1, 1, 0, 0}));
    EXPECT_EQ(build_context(s, Stage::cw, allocation(7), 3),
              (std::vector<double>{0.1, 0.2, 0.3, 0.4, 0, 1, 0, 1, 0.5, 1, 1, 1, 1, 0, 0, 1, 0}));
}

TEST(Context, MissingStageInputsThrow)
{
    const auto s = sample_snapshot();
    EXPECT_THROW(build_context(s, Stage::primary), std::invalid_argument);
    EXPECT_THROW(build_context(s, Stage::cw, allocation(1)), std::invalid_argument);
    EXPECT_THROW(build_context(s, Stage::cw), std::invalid_argument);
}

TEST(Context, EncodeChannels)
{
    EXPECT_EQ(encode_channels(ChannelSet{1, 2}), (std::array<double, 4>{1, 1, 0, 0}));
    EXPECT_EQ(encode_channels(ChannelSet{}), (std::array<double, 4>{0, 0, 0, 0}));
}

TEST(Context, SnapshotExcludesOwnFramesAndClampsQueue)
{
    Scheduler s;
    Medium m(s);
    m.add_observer(0);
    m.add_observer(1);
    s.schedule(0, EventKind::generic, 0, [&] { m.begin_frame(FrameTx{ChannelSet{1, 2}, 0, 400, 0, FrameKind::data}); });
    s.schedule(0, EventKind::generic, 1, [&] { m.begin_frame(FrameTx{ChannelSet{3}, 0, 1000, 1, FrameKind::data}); });
    s.run_until(800);
    const auto own = snapshot_context(m, 0, 2.0);
    EXPECT_DOUBLE_EQ(own.occupancy[0], 0.0);
    EXPECT_DOUBLE_EQ(own.occupancy[2], 1.0);
    EXPECT_DOUBLE_EQ(own.busy[2], 1.0);
    EXPECT_DOUBLE_EQ(own.busy[0], 0.0);
    EXPECT_DOUBLE_EQ(own.queue_util, 1.0);
    const auto other = snapshot_context(m, 1, -1.0);
    EXPECT_DOUBLE_EQ(other.occupancy[0], 0.5);
    EXPECT_DOUBLE_EQ(other.occupancy[2], 0.0);
    EXPECT_DOUBLE_EQ(other.queue_util, 0.0);
}

TEST(Reward, Values)
{
    EXPECT_DOUBLE_EQ(compute_reward(0.0), 1.0);
    EXPECT_DOUBLE_EQ(compute_reward(2.5), 0.75);
    EXPECT_DOUBLE_EQ(compute_reward(5.0), 0.5);
    EXPECT_DOUBLE_EQ(compute_reward(10.0), 0.0);
    EXPECT_DOUBLE_EQ(compute_reward(12.0), 0.0);
    EXPECT_DOUBLE_EQ(compute_reward(2.1355), (10.0 - 2.1355) / 10.0);
    EXPECT_DOUBLE_EQ(compute_reward(4.0, 8.0), 0.5);
    EXPECT_THROW(compute_reward(-0.001), std::invalid_argument);
}

TEST(Hyperparameters, ArchitectureDefaults)
{
    const auto sa = Hyperparameters::defaults(Architecture::sa);
    EXPECT_DOUBLE_EQ(sa.ucb_alpha, 1.09);
    EXPECT_DOUBLE_EQ(sa.linucb_alpha, 0.52);
    EXPECT_DOUBLE_EQ(sa.erlb.epsilon, 0.020);
    EXPECT_DOUBLE_EQ(sa.erlb.eta, 0.086);
    EXPECT_DOUBLE_EQ(sa.erlb.gamma, 0.87);
    EXPECT_DOUBLE_EQ(sa.erlb.alpha_ema, 0.22);
    EXPECT_DOUBLE_EQ(sa.osub_p, 0.0);
    const auto ma = Hyperparameters::defaults(Architecture::ma);
    EXPECT_DOUBLE_EQ(ma.ucb_alpha, 1.14);
    EXPECT_DOUBLE_EQ(ma.linucb_alpha, 0.50);
    EXPECT_DOUBLE_EQ(ma.erlb.epsilon, 0.038);
    EXPECT_DOUBLE_EQ(ma.erlb.eta, 0.069);
    EXPECT_DOUBLE_EQ(ma.erlb.gamma, 0.79);
    EXPECT_DOUBLE_EQ(ma.erlb.alpha_ema, 0.25);
    EXPECT_DOUBLE_EQ(ma.osub_p, 0.05);
    EXPECT_DOUBLE_EQ(ma.kl_c, 0.0);
}

TEST(Binding, SaUsesOneJointAgent)
{
    AgentBinding b(Architecture::sa, Algorithm::linucb, Hyperparameters::defaults(Architecture::sa), 1, 0);
    ASSERT_EQ(b.agent_count(), 1u);
    EXPECT_EQ(b.agent(0).arm_count(), 84u);
    EXPECT_EQ(b.agent(0).context_dim(), 9u);
    EXPECT_EQ(b.stage(0), Stage::sa);
    const auto d = b.decide(idle_snapshot());
    EXPECT_EQ(d.arms.size(), 1u);
    EXPECT_EQ(d.triple, b.joint_arm(d.arms[0]));
}

TEST(Binding, MaUsesThreeFactorizedAgents)
{
    AgentBinding b(Architecture::ma, Algorithm::erlb, Hyperparameters::defaults(Architecture::ma), 1, 0);
    ASSERT_EQ(b.agent_count(), 3u);
    EXPECT_EQ(b.agent(0).arm_count(), 7u);
    EXPECT_EQ(b.agent(1).arm_count(), 4u);
    EXPECT_EQ(b.agent(2).arm_count(), 7u);
    EXPECT_EQ(b.agent(0).context_dim(), 9u);
    EXPECT_EQ(b.agent(1).context_dim(), 12u);
    EXPECT_EQ(b.agent(2).context_dim(), 17u);
    const auto &e = dynamic_cast<const Erlb &>(b.agent(1));
    EXPECT_DOUBLE_EQ(e.params().epsilon, 0.038);
    EXPECT_DOUBLE_EQ(e.params().eta, 0.069);
}

TEST(Binding, MaPrimaryAlwaysInsideAllocation)
{
    for (auto algo : {Algorithm::ucb, Algorithm::osub, Algorithm::linucb, Algorithm::erlb, Algorithm::random})
    {
        AgentBinding b(Architecture::ma, algo, Hyperparameters::defaults(Architecture::ma), 3, 0);
        RandomStream rng(3, "reward");
        std::set<int> allocs;
        for (int t = 0; t < 2000; ++t)
        {
            const auto d = b.decide(sample_snapshot());
            ASSERT_TRUE(d.triple.valid()) << to_string(algo);
            ASSERT_TRUE(d.triple.channel.channels.contains(d.triple.primary));
            EXPECT_EQ(d.contexts[0].size(), 9u);
            EXPECT_EQ(d.contexts[1].size(), 12u);
            EXPECT_EQ(d.contexts[2].size(), 17u);
            allocs.insert(d.triple.channel.id);
            b.learn(d, rng.uniform01());
        }
        EXPECT_EQ(allocs.size(), 7u) << to_string(algo);
    }
}

TEST(Binding, SingletonAllocationForcesPrimary)
{
    AgentBinding b(Architecture::ma, Algorithm::ucb, Hyperparameters::defaults(Architecture::ma), 3, 0);
    // UCB initialization plays channel arms in order: the first cycles use #1, #2, #3, #4.
    for (int id = 1; id <= 4; ++id)
    {
        const auto d = b.decide(idle_snapshot());
        EXPECT_EQ(d.triple.channel.id, id);
        EXPECT_EQ(d.triple.primary, id);
        b.learn(d, 0.5);
    }
}

TEST(Binding, MaAgentsShareTheReward)
{
    AgentBinding b(Architecture::ma, Algorithm::ucb, Hyperparameters::defaults(Architecture::ma), 3, 0);
    const auto d = b.decide(idle_snapshot());
    b.learn(d, 0.37);
    for (std::size_t i = 0; i < 3; ++i)
    {
        const auto &u = dynamic_cast<const Ucb &>(b.agent(i));
        EXPECT_EQ(u.stats().pulls[d.arms[i]], 1u);
        EXPECT_DOUBLE_EQ(u.stats().mean[d.arms[i]], 0.37);
    }
}

TEST(Binding, RewardDomainChecked)
{
    AgentBinding b(Architecture::ma, Algorithm::ucb, Hyperparameters::defaults(Architecture::ma), 3, 0);
    const auto d = b.decide(idle_snapshot());
    EXPECT_THROW(b.learn(d, 1.01), std::domain_error);
    EXPECT_THROW(b.learn(d, -0.5), std::domain_error);
}

TEST(Binding, SaOsubInitializesInJointOrder)
{
    AgentBinding b(Architecture::sa, Algorithm::osub, Hyperparameters::defaults(Architecture::sa), 3, 0);
    for (std::size_t k = 0; k < 84; ++k)
    {
        const auto d = b.decide(idle_snapshot());
        EXPECT_EQ(d.arms[0], k);
        b.learn(d, 0.5);
    }
}

TEST(Binding, SaRandomCoversJointSpaceUniformly)
{
    AgentBinding b(Architecture::sa, Algorithm::random, Hyperparameters::defaults(Architecture::sa), 3, 0);
    std::map<std::size_t, int> hist;
    const int n = 84000;
    for (int t = 0; t < n; ++t)
    {
        const auto d = b.decide(idle_snapshot());
        ++hist[d.arms[0]];
        b.learn(d, 0.5);
    }
    ASSERT_EQ(hist.size(), 84u);
    for (auto [arm, c] : hist)
    {
        EXPECT_NEAR(c, 1000, 150) << arm;
    }
}

TEST(Binding, SeedAndNodeSelectStreams)
{
    auto run = [](std::uint64_t seed, NodeId node) {
        AgentBinding b(Architecture::sa, Algorithm::random, Hyperparameters::defaults(Architecture::sa), seed, node);
        std::vector<std::size_t> arms;
        for (int t = 0; t < 50; ++t)
        {
            arms.push_back(b.decide(idle_snapshot()).arms[0]);
        }
        return arms;
    };
    EXPECT_EQ(run(4, 0), run(4, 0));
    EXPECT_NE(run(4, 0), run(4, 1));
    EXPECT_NE(run(4, 0), run(5, 0));
}

TEST(Harness, RoundsCarryRewardOfCappedDuration)
{
    Scheduler s;
    Medium m(s);
    const PhyProfile phy;
    const MacParams mac;
    Harness h(m, mac);
    std::vector<RoundRecord> rounds;
    h.set_round_sink([&](const RoundRecord &r) { rounds.push_back(r); });
    LearnerNode n(0, Bonding::scb, s, m, phy, mac, 2, {}, h);
    m.add_observer(0);
    n.set_full_buffer(true);
    h.bind(0, n.queue(),
           std::make_unique<AgentBinding>(Architecture::ma, Algorithm::linucb,
                                          Hyperparameters::defaults(Architecture::ma), 2, 0));
    // Keep channel 4 busy for a while so cycles on it time out.
    s.schedule(0, EventKind::generic, 99, [&] { m.begin_frame(FrameTx{ChannelSet{4}, 0, 300 * kMillisecond, 99}); });
    n.start();
    s.run_until(kSecond);
    ASSERT_GT(rounds.size(), 50u);
    bool saw_timeout = false;
    for (const auto &r : rounds)
    {
        const double expected_ms = static_cast<double>(std::min(r.cycle.end - r.cycle.start, mac.d_max)) / 1000.0;
        EXPECT_DOUBLE_EQ(r.duration_ms, expected_ms);
        EXPECT_DOUBLE_EQ(r.reward, compute_reward(expected_ms));
        EXPECT_EQ(r.decision.triple, r.cycle.action);
        saw_timeout |= r.cycle.cause == CycleCause::timeout;
        if (r.cycle.cause == CycleCause::timeout)
        {
            EXPECT_DOUBLE_EQ(r.reward, 0.0);
        }
    }
    EXPECT_TRUE(saw_timeout);
    EXPECT_EQ(h.binding(0).agent_count(), 3u);
}
