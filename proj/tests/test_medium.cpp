#include "bms/medium.hpp"

#include <gtest/gtest.h>

#include <vector>

using namespace bms;

TEST(Phy, DerivedSpacings)
{
    const PhyProfile phy;
    EXPECT_EQ(phy.difs_us(), 34);
    EXPECT_EQ(phy.pifs_us(), 25);
    EXPECT_EQ(phy.cts_timeout_us(), 65);
}

TEST(Phy, RatesPerWidth)
{
    const PhyProfile phy;
    EXPECT_DOUBLE_EQ(phy.data_rate(20), 286.8);
    EXPECT_DOUBLE_EQ(phy.data_rate(40), 573.5);
    EXPECT_DOUBLE_EQ(phy.data_rate(80), 1201.0);
    EXPECT_THROW((void)phy.data_rate(60), ConfigError);
    EXPECT_THROW((void)phy.data_rate(160), ConfigError);
}

TEST(Phy, ValidateRejectsBadProfiles)
{
    PhyProfile phy;
    EXPECT_NO_THROW(phy.validate());
    phy.slot_us = 0;
    EXPECT_THROW(phy.validate(), ConfigError);
    phy = PhyProfile{};
    phy.rate40_mbps = phy.rate20_mbps;
    EXPECT_THROW(phy.validate(), ConfigError);
}

TEST(FrameDuration, ControlFramesAreFixed)
{
    const PhyProfile phy;
    for (int w : {20, 40, 80})
    {
        EXPECT_EQ(frame_duration(phy, FrameKind::rts, 0, w), 52);
        EXPECT_EQ(frame_duration(phy, FrameKind::cts, 0, w), 44);
        EXPECT_EQ(frame_duration(phy, FrameKind::back, 0, w), 50);
    }
}

TEST(FrameDuration, FullAmpduAt20MHz)
{
    // 65535-byte A-MPDU: preamble + ceil(524280 / 286.8).
    const PhyProfile phy;
    EXPECT_EQ(frame_duration(phy, FrameKind::data, 524280, 20), 40 + 1829);
    EXPECT_EQ(frame_duration(phy, FrameKind::data, 524280, 20), 1869);
}

TEST(FrameDuration, ExactMultipleDoesNotRoundUp)
{
    PhyProfile phy;
    phy.rate20_mbps = 100.0;
    phy.rate40_mbps = 200.0;
    phy.rate80_mbps = 400.0;
    EXPECT_EQ(frame_duration(phy, FrameKind::data, 1000, 20), 40 + 10);
    EXPECT_EQ(frame_duration(phy, FrameKind::data, 1001, 20), 40 + 11);
    EXPECT_EQ(frame_duration(phy, FrameKind::data, 1000, 80), 40 + 3);
}

TEST(FrameDuration, WiderIsFaster)
{
    const PhyProfile phy;
    const std::int64_t bits = 8 * 1500 * 43;
    EXPECT_GT(frame_duration(phy, FrameKind::data, bits, 20), frame_duration(phy, FrameKind::data, bits, 40));
    EXPECT_GT(frame_duration(phy, FrameKind::data, bits, 40), frame_duration(phy, FrameKind::data, bits, 80));
}

TEST(FrameDuration, ZeroPayloadIsPreambleOnly)
{
    const PhyProfile phy;
    EXPECT_EQ(frame_duration(phy, FrameKind::data, 0, 20), phy.preamble_us);
    EXPECT_THROW((void)frame_duration(phy, FrameKind::data, -1, 20), std::invalid_argument);
    EXPECT_THROW((void)frame_duration(phy, FrameKind::data, 8, 60), ConfigError);
}

TEST(FrameKindNames, ToString)
{
    EXPECT_EQ(to_string(FrameKind::rts), "rts");
    EXPECT_EQ(to_string(FrameKind::back), "back");
}

namespace
{
    void at(Scheduler &s, Time t, std::function<void()> f) { s.schedule(t, EventKind::generic, kNoNode, std::move(f)); }
} // namespace

TEST(Medium, FrameOccupiesOnlyItsChannels)
{
    Scheduler s;
    Medium m(s);
    at(s, 100, [&] { m.begin_frame(FrameTx{ChannelSet{1, 2}, 0, 50, 0, FrameKind::data}); });
    at(s, 120, [&] {
        EXPECT_TRUE(m.busy(1));
        EXPECT_TRUE(m.busy(2));
        EXPECT_FALSE(m.busy(3));
        EXPECT_FALSE(m.busy(4));
    });
    s.run_until(200);
    EXPECT_FALSE(m.busy(1));
    EXPECT_NEAR(m.occupancy_ratio(1, 200), 50.0 / 200.0, 1e-12);
    EXPECT_DOUBLE_EQ(m.occupancy_ratio(3, 200), 0.0);
}

TEST(Medium, OverlappingFramesCollideAndMergeBusyTime)
{
    Scheduler s;
    Medium m(s);
    std::vector<bool> outcome;
    auto cb = [&](bool c) { outcome.push_back(c); };
    at(s, 0, [&] { m.begin_frame(FrameTx{ChannelSet{1}, 0, 100, 0, FrameKind::rts}, cb); });
    at(s, 50, [&] { m.begin_frame(FrameTx{ChannelSet{1, 2}, 0, 100, 1, FrameKind::rts}, cb); });
    at(s, 400, [&] { m.begin_frame(FrameTx{ChannelSet{3}, 0, 10, 2, FrameKind::rts}, cb); });
    s.run_until(1000);
    EXPECT_EQ(outcome, (std::vector<bool>{true, true, false}));
    EXPECT_EQ(m.tracker(1).busy_time(0, 1000), 150);
    EXPECT_EQ(m.tracker(2).busy_time(0, 1000), 100);
}

TEST(Medium, BackToBackFramesDoNotCollide)
{
    Scheduler s;
    Medium m(s);
    std::vector<bool> outcome;
    auto cb = [&](bool c) { outcome.push_back(c); };
    at(s, 0, [&] { m.begin_frame(FrameTx{ChannelSet{1}, 0, 100, 0, FrameKind::data}, cb); });
    at(s, 100, [&] { m.begin_frame(FrameTx{ChannelSet{1}, 0, 100, 1, FrameKind::data}, cb); });
    s.run_until(500);
    EXPECT_EQ(outcome, (std::vector<bool>{false, false}));
}

TEST(Medium, ZeroDurationFrameIsNoop)
{
    Scheduler s;
    Medium m(s);
    int calls = 0;
    bool collided = true;
    at(s, 10, [&] {
        const FrameId id = m.begin_frame(FrameTx{ChannelSet{1}, 0, 0, 0, FrameKind::data}, [&](bool c) {
            ++calls;
            collided = c;
        });
        EXPECT_EQ(id, 0u);
        EXPECT_FALSE(m.busy(1));
    });
    s.run_until(100);
    EXPECT_EQ(calls, 1);
    EXPECT_FALSE(collided);
    EXPECT_DOUBLE_EQ(m.occupancy_ratio(1, 100), 0.0);
}

TEST(Medium, ListenersSeeTransitions)
{
    Scheduler s;
    Medium m(s);
    std::vector<std::pair<int, bool>> events;
    m.add_listener(7, [&](int c, bool b) { events.emplace_back(c, b); });
    at(s, 0, [&] { m.begin_frame(FrameTx{ChannelSet{2}, 0, 10, 0, FrameKind::cts}); });
    at(s, 5, [&] { m.begin_frame(FrameTx{ChannelSet{2}, 0, 10, 1, FrameKind::cts}); });
    s.run_until(100);
    // Only the outer busy/idle edges of the merged busy period are reported.
    EXPECT_EQ(events, (std::vector<std::pair<int, bool>>{{2, true}, {2, false}}));
}

TEST(Medium, ObserverExcludesOwnFrames)
{
    Scheduler s;
    Medium m(s);
    m.add_observer(0);
    m.add_observer(1);
    at(s, 0, [&] { m.begin_frame(FrameTx{ChannelSet{1}, 0, 500, 0, FrameKind::data}); });
    at(s, 100, [&] {
        EXPECT_FALSE(m.busy_excluding(1, 0));
        EXPECT_TRUE(m.busy_excluding(1, 1));
    });
    s.run_until(1000);
    EXPECT_DOUBLE_EQ(m.occupancy_ratio(1, 1000, 0), 0.0);
    EXPECT_DOUBLE_EQ(m.occupancy_ratio(1, 1000, 1), 0.5);
    EXPECT_DOUBLE_EQ(m.occupancy_ratio(1, 1000), 0.5);
    EXPECT_THROW((void)m.occupancy_ratio(1, 1000, 9), std::logic_error);
}

TEST(Medium, IdleForIgnoresFramesStartingNow)
{
    Scheduler s;
    Medium m(s);
    at(s, 0, [&] { m.begin_frame(FrameTx{ChannelSet{1}, 0, 20, 0, FrameKind::rts}); });
    at(s, 54, [&] {
        EXPECT_TRUE(m.idle_for(1, 34));
        m.begin_frame(FrameTx{ChannelSet{1}, 0, 20, 1, FrameKind::rts});
        EXPECT_TRUE(m.idle_for(1, 34));
    });
    at(s, 60, [&] { EXPECT_FALSE(m.idle_for(1, 1)); });
    s.run_until(100);
}

TEST(Occupancy, RatioUsesTrailingWindow)
{
    OccupancyTracker t(100);
    t.on_start(0);
    t.on_end(50);
    EXPECT_DOUBLE_EQ(t.ratio(0), 0.0);
    EXPECT_DOUBLE_EQ(t.ratio(50), 1.0);
    EXPECT_DOUBLE_EQ(t.ratio(100), 0.5);
    EXPECT_DOUBLE_EQ(t.ratio(150), 0.0);
    EXPECT_DOUBLE_EQ(t.ratio(125), 0.25);
}

TEST(Occupancy, EndWithoutStartThrows)
{
    OccupancyTracker t(100);
    EXPECT_THROW(t.on_end(5), std::logic_error);
}

TEST(Occupancy, AlwaysBusyIsOne)
{
    OccupancyTracker t(1000);
    t.on_start(0);
    EXPECT_DOUBLE_EQ(t.ratio(500), 1.0);
    EXPECT_DOUBLE_EQ(t.ratio(5000), 1.0);
}

TEST(Occupancy, MatchesMicrosecondBruteForce)
{
    static constexpr Time kWindow = 10 * kMillisecond;
    static constexpr Time kHorizon = 50 * kMillisecond;
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
    {
        Scheduler s;
        Medium m(s, kWindow);
        m.add_observer(0);
        RandomStream rng(seed, "oracle");
        std::vector<std::vector<char>> bitmap(4, std::vector<char>(kHorizon + 3000, 0));
        std::vector<std::vector<char>> foreign(4, std::vector<char>(kHorizon + 3000, 0));
        for (int f = 0; f < 80; ++f)
        {
            const Time start = static_cast<Time>(rng.uniform_int(kHorizon));
            const Time dur = 1 + static_cast<Time>(rng.uniform_int(2000));
            const auto mask = static_cast<std::uint8_t>(1 + rng.uniform_int(15));
            const NodeId src = static_cast<NodeId>(rng.uniform_int(3));
            const ChannelSet ch = ChannelSet::from_mask(mask);
            for (int c : ch.channels())
            {
                for (Time t = start; t < start + dur; ++t)
                {
                    bitmap[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(t)] = 1;
                    if (src != 0)
                    {
                        foreign[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(t)] = 1;
                    }
                }
            }
            at(s, start, [&m, ch, dur, src] { m.begin_frame(FrameTx{ch, 0, dur, src, FrameKind::data}); });
        }
        auto oracle = [](const std::vector<char> &b, Time now) {
            const Time span = std::min(now, kWindow);
            Time busy = 0;
            for (Time t = now - span; t < now; ++t)
            {
                busy += b[static_cast<std::size_t>(t)];
            }
            return static_cast<double>(busy) / static_cast<double>(span);
        };
        for (int k = 0; k < 40; ++k)
        {
            const Time t = 1 + static_cast<Time>(rng.uniform_int(kHorizon));
            at(s, t, [&, t] {
                for (int c = 1; c <= 4; ++c)
                {
                    EXPECT_NEAR(m.occupancy_ratio(c, t), oracle(bitmap[static_cast<std::size_t>(c - 1)], t), 1e-12);
                    EXPECT_NEAR(m.occupancy_ratio(c, t, 0), oracle(foreign[static_cast<std::size_t>(c - 1)], t),
                                1e-12);
                }
            });
        }
        s.run_until(kHorizon + 3000);
    }
}
