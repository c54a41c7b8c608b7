#pragma once

// Shared wireless medium: four 20 MHz basic channels under ideal universal
// carrier sensing, PHY timing profile, frame durations and exact sliding-window
// occupancy bookkeeping.

#include "bms/actions.hpp"
#include "bms/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace bms
{
    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// 5 GHz OFDM timings and 802.11ax MCS 11 / 2 SS / 0.8 us GI rates by default.
    struct PhyProfile
    {
        Time slot_us = 9;
        Time sifs_us = 16;
        Time rts_us = 52;
        Time cts_us = 44;
        Time back_us = 50;
        Time preamble_us = 40;
        double rate20_mbps = 286.8;
        double rate40_mbps = 573.5;
        double rate80_mbps = 1201.0;

        [[nodiscard]] Time difs_us() const { return sifs_us + 2 * slot_us; }
        [[nodiscard]] Time pifs_us() const { return sifs_us + slot_us; }
        /// Wait after an unanswered RTS before the transmitter may re-contend.
        [[nodiscard]] Time cts_timeout_us() const { return sifs_us + slot_us + preamble_us; }

        /// Bits per microsecond (== Mbps).
        [[nodiscard]] double data_rate(int width_mhz) const
        {
            switch (width_mhz)
            {
            case 20: return rate20_mbps;
            case 40: return rate40_mbps;
            case 80: return rate80_mbps;
            default: throw ConfigError("unsupported channel width: " + std::to_string(width_mhz) + " MHz");
            }
        }

        void validate() const
        {
            if (slot_us <= 0 || sifs_us <= 0 || rts_us < 0 || cts_us < 0 || back_us < 0 || preamble_us < 0)
            {
                throw ConfigError("PHY timings must be positive");
            }
            if (!(rate20_mbps > 0.0 && rate20_mbps < rate40_mbps && rate40_mbps < rate80_mbps))
            {
                throw ConfigError("PHY data rates must be positive and strictly increasing in width");
            }
        }
    };

    enum class FrameKind : std::uint8_t
    {
        rts,
        cts,
        data,
        back,
    };

    inline std::string_view to_string(FrameKind k)
    {
        switch (k)
        {
        case FrameKind::rts: return "rts";
        case FrameKind::cts: return "cts";
        case FrameKind::data: return "data";
        case FrameKind::back: return "back";
        }
        return "?";
    }

    /// Data frames: preamble + ceil(bits / rate); control frames: fixed durations.
    inline Time frame_duration(const PhyProfile &phy, FrameKind kind, std::int64_t payload_bits, int width_mhz)
    {
        switch (kind)
        {
        case FrameKind::rts: return phy.rts_us;
        case FrameKind::cts: return phy.cts_us;
        case FrameKind::back: return phy.back_us;
        case FrameKind::data:
        {
            if (payload_bits < 0)
            {
                throw std::invalid_argument("negative payload");
            }
            const double rate = phy.data_rate(width_mhz);
            // Integer ceil guarded against representational error in the quotient.
            auto us = static_cast<Time>(std::floor(static_cast<double>(payload_bits) / rate));
            while (static_cast<double>(us) * rate < static_cast<double>(payload_bits))
            {
                ++us;
            }
            return phy.preamble_us + us;
        }
        }
        return 0;
    }

    struct FrameTx
    {
        ChannelSet channels;
        Time start = 0;
        Time duration = 0;
        NodeId source = kNoNode;
        FrameKind kind = FrameKind::data;

        [[nodiscard]] Time end() const { return start + duration; }
    };

    /// Busy/idle state of one channel as seen by one observer, with the merged
    /// busy intervals of the trailing window.
    class OccupancyTracker
    {
    public:
        OccupancyTracker() = default;
        explicit OccupancyTracker(Time window) : window_(window) {}

        void on_start(Time t)
        {
            if (active_++ == 0)
            {
                busy_since_ = t;
            }
        }

        void on_end(Time t)
        {
            if (active_ <= 0)
            {
                throw std::logic_error("occupancy tracker end without start");
            }
            if (--active_ == 0)
            {
                if (t > busy_since_)
                {
                    intervals_.emplace_back(busy_since_, t);
                }
                last_end_ = t;
                prune(t);
            }
        }

        [[nodiscard]] bool busy() const noexcept { return active_ > 0; }
        [[nodiscard]] Time busy_since() const noexcept { return busy_since_; }
        /// End of the most recent busy period (0 when the channel was never busy).
        [[nodiscard]] Time last_busy_end() const noexcept { return last_end_; }
        [[nodiscard]] Time window() const noexcept { return window_; }

        /// Busy microseconds inside [from, to].
        [[nodiscard]] Time busy_time(Time from, Time to) const
        {
            Time total = 0;
            for (const auto &[s, e] : intervals_)
            {
                total += std::max<Time>(0, std::min(e, to) - std::max(s, from));
            }
            if (active_ > 0)
            {
                total += std::max<Time>(0, to - std::max(busy_since_, from));
            }
            return total;
        }

        /// Busy fraction of the trailing window [now - W, now]; 0 at now = 0.
        [[nodiscard]] double ratio(Time now) const
        {
            const Time span = std::min(now, window_);
            if (span <= 0)
            {
                return 0.0;
            }
            return static_cast<double>(busy_time(now - span, now)) / static_cast<double>(span);
        }

        /// Idle throughout [now - span, now), ignoring frames starting exactly at now.
        [[nodiscard]] bool idle_for(Time now, Time span) const
        {
            if (active_ > 0 && busy_since_ < now)
            {
                return false;
            }
            // Frames that started exactly at `now` are not yet sensed.
            return last_end_ == 0 || last_end_ <= now - span;
        }

        [[nodiscard]] const std::deque<std::pair<Time, Time>> &intervals() const noexcept { return intervals_; }

    private:
        void prune(Time now)
        {
            const Time horizon = now - window_;
            while (!intervals_.empty() && intervals_.front().second <= horizon)
            {
                intervals_.pop_front();
            }
        }

        Time window_ = 100 * kMillisecond;
        int active_ = 0;
        Time busy_since_ = 0;
        Time last_end_ = 0;
        std::deque<std::pair<Time, Time>> intervals_;
    };

    using FrameId = std::uint64_t;

    /// The four basic channels. Every node senses every frame.
    class Medium
    {
    public:
        /// Called on global busy/idle transitions of a basic channel.
        using Listener = std::function<void(int channel, bool busy)>;
        /// Called when a frame ends; `collided` means another frame overlapped it
        /// in time on a shared channel.
        using EndCallback = std::function<void(bool collided)>;

        Medium(Scheduler &sched, Time window = 100 * kMillisecond)
            : sched_(sched), window_(window)
        {
            for (auto &t : global_)
            {
                t = OccupancyTracker(window);
            }
        }

        Medium(const Medium &) = delete;
        Medium &operator=(const Medium &) = delete;

        /// Adds per-channel trackers that ignore the observer's own frames.
        void add_observer(NodeId observer)
        {
            auto &trackers = observers_[observer];
            for (auto &t : trackers)
            {
                t = OccupancyTracker(window_);
            }
        }

        void add_listener(NodeId node, Listener listener) { listeners_.emplace_back(node, std::move(listener)); }

        /// Starts a frame now (tx.start is forced to the current time). Zero-length
        /// frames are ignored and report no collision.
        FrameId begin_frame(FrameTx tx, EndCallback on_end = {})
        {
            const Time now = sched_.now();
            tx.start = now;
            if (tx.duration <= 0 || tx.channels.empty())
            {
                if (on_end)
                {
                    on_end(false);
                }
                return 0;
            }
            const FrameId id = ++next_frame_;
            bool collided = false;
            for (auto &[other_id, other] : active_)
            {
                if (other.tx.channels.intersects(tx.channels) && other.tx.end() > now)
                {
                    other.collided = true;
                    collided = true;
                }
            }
            active_.emplace(id, ActiveFrame{tx, collided});

            for (int c : tx.channels.channels())
            {
                auto &g = global_[static_cast<std::size_t>(c - 1)];
                const bool was_busy = g.busy();
                g.on_start(now);
                for (auto &[obs, trackers] : observers_)
                {
                    if (obs != tx.source)
                    {
                        trackers[static_cast<std::size_t>(c - 1)].on_start(now);
                    }
                }
                if (!was_busy)
                {
                    notify(c, true);
                }
            }
            sched_.schedule(tx.end(), EventKind::frame_end, tx.source, [this, id, cb = std::move(on_end)]() {
                finish_frame(id, cb);
            });
            return id;
        }

        [[nodiscard]] bool busy(int c) const { return global_.at(static_cast<std::size_t>(c - 1)).busy(); }

        /// Idle over the trailing `span` microseconds (frames starting now excluded).
        [[nodiscard]] bool idle_for(int c, Time span) const
        {
            return global_.at(static_cast<std::size_t>(c - 1)).idle_for(sched_.now(), span);
        }

        /// Start of the current idle period on channel c (assumes it is idle).
        [[nodiscard]] Time idle_since(int c) const { return global_.at(static_cast<std::size_t>(c - 1)).last_busy_end(); }

        [[nodiscard]] double occupancy_ratio(int c, Time now) const
        {
            return global_.at(static_cast<std::size_t>(c - 1)).ratio(now);
        }

        /// Occupancy of channel c caused by frames of nodes other than `observer`.
        [[nodiscard]] double occupancy_ratio(int c, Time now, NodeId observer) const
        {
            return tracker_for(observer, c).ratio(now);
        }

        [[nodiscard]] bool busy_excluding(int c, NodeId observer) const { return tracker_for(observer, c).busy(); }

        [[nodiscard]] const OccupancyTracker &tracker(int c) const { return global_.at(static_cast<std::size_t>(c - 1)); }

        [[nodiscard]] Time now() const noexcept { return sched_.now(); }
        [[nodiscard]] Scheduler &scheduler() noexcept { return sched_; }

    private:
        struct ActiveFrame
        {
            FrameTx tx;
            bool collided = false;
        };

        [[nodiscard]] const OccupancyTracker &tracker_for(NodeId observer, int c) const
        {
            const auto it = observers_.find(observer);
            if (it == observers_.end())
            {
                throw std::logic_error("node is not registered as a medium observer");
            }
            return it->second.at(static_cast<std::size_t>(c - 1));
        }

        void finish_frame(FrameId id, const EndCallback &cb)
        {
            const Time now = sched_.now();
            auto it = active_.find(id);
            const ActiveFrame frame = it->second;
            active_.erase(it);
            for (int c : frame.tx.channels.channels())
            {
                auto &g = global_[static_cast<std::size_t>(c - 1)];
                g.on_end(now);
                for (auto &[obs, trackers] : observers_)
                {
                    if (obs != frame.tx.source)
                    {
                        trackers[static_cast<std::size_t>(c - 1)].on_end(now);
                    }
                }
                if (!g.busy())
                {
                    notify(c, false);
                }
            }
            if (cb)
            {
                cb(frame.collided);
            }
        }

        void notify(int c, bool busy)
        {
            for (auto &[node, listener] : listeners_)
            {
                listener(c, busy);
            }
        }

        Scheduler &sched_;
        Time window_;
        std::array<OccupancyTracker, kBasicChannels> global_{};
        std::unordered_map<NodeId, std::array<OccupancyTracker, kBasicChannels>> observers_;
        std::vector<std::pair<NodeId, Listener>> listeners_;
        std::unordered_map<FrameId, ActiveFrame> active_;
        FrameId next_frame_ = 0;
    };

} // namespace bms
