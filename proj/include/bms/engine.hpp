#pragma once

// Deterministic discrete-event core: integer-microsecond clock, a cancellable
// event queue ordered by (time, sequence), and named seeded random streams.

#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bms
{
    /// Simulation time in integer microseconds.
    using Time = std::int64_t;
    using NodeId = std::uint32_t;

    inline constexpr Time kMicrosecond = 1;
    inline constexpr Time kMillisecond = 1000;
    inline constexpr Time kSecond = 1'000'000;
    inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

    enum class EventKind : std::uint8_t
    {
        backoff_expiry,
        frame_start,
        frame_end,
        arrival,
        interval_switch,
        cycle_timeout,
        cycle_start,
        exchange_step,
        generic,
    };

    inline std::string_view to_string(EventKind kind)
    {
        switch (kind)
        {
        case EventKind::backoff_expiry: return "backoff-expiry";
        case EventKind::frame_start: return "frame-start";
        case EventKind::frame_end: return "frame-end";
        case EventKind::arrival: return "arrival";
        case EventKind::interval_switch: return "interval-switch";
        case EventKind::cycle_timeout: return "cycle-timeout";
        case EventKind::cycle_start: return "cycle-start";
        case EventKind::exchange_step: return "exchange-step";
        case EventKind::generic: return "generic";
        }
        return "unknown";
    }

    struct Event
    {
        Time time = 0;
        std::uint64_t sequence = 0;
        EventKind kind = EventKind::generic;
        NodeId target = kNoNode;
    };

    class SchedulingError : public std::logic_error
    {
    public:
        using std::logic_error::logic_error;
    };

    class EventHandle
    {
    public:
        EventHandle() = default;
        explicit EventHandle(std::uint64_t id) : id_(id) {}

        [[nodiscard]] bool valid() const noexcept { return id_ != 0; }
        [[nodiscard]] std::uint64_t id() const noexcept { return id_; }

    private:
        std::uint64_t id_ = 0; // 0 = null handle; sequences start at 1
    };

    class Scheduler
    {
    public:
        using Action = std::function<void()>;
        using TraceSink = std::function<void(const Event &)>;

        [[nodiscard]] Time now() const noexcept { return now_; }

        EventHandle schedule(Time time, EventKind kind, NodeId target, Action action)
        {
            if (time < now_)
            {
                throw SchedulingError("event scheduled in the past: t=" + std::to_string(time) +
                                      " < now=" + std::to_string(now_));
            }
            const std::uint64_t seq = ++next_sequence_;
            queue_.push(Event{time, seq, kind, target});
            actions_.emplace(seq, std::move(action));
            return EventHandle(seq);
        }

        EventHandle schedule_in(Time delay, EventKind kind, NodeId target, Action action)
        {
            return schedule(now_ + delay, kind, target, std::move(action));
        }

        /// Returns true when the event was still pending.
        bool cancel(EventHandle handle)
        {
            return handle.valid() && actions_.erase(handle.id()) > 0;
        }

        [[nodiscard]] bool pending(EventHandle handle) const
        {
            return handle.valid() && actions_.count(handle.id()) > 0;
        }

        [[nodiscard]] std::size_t pending_count() const noexcept { return actions_.size(); }
        [[nodiscard]] std::uint64_t processed_count() const noexcept { return processed_; }

        void set_trace(TraceSink sink) { trace_ = std::move(sink); }

        /// Processes every event with time <= t_end, then parks the clock at t_end.
        Time run_until(Time t_end)
        {
            if (t_end < now_)
            {
                throw SchedulingError("run_until target lies in the past");
            }
            while (!queue_.empty() && queue_.top().time <= t_end)
            {
                const Event ev = queue_.top();
                queue_.pop();
                auto it = actions_.find(ev.sequence);
                if (it == actions_.end())
                {
                    continue; // cancelled
                }
                Action action = std::move(it->second);
                actions_.erase(it);
                now_ = ev.time;
                ++processed_;
                if (trace_)
                {
                    trace_(ev);
                }
                action();
            }
            now_ = t_end;
            return now_;
        }

    private:
        struct Later
        {
            bool operator()(const Event &a, const Event &b) const noexcept
            {
                return a.time != b.time ? a.time > b.time : a.sequence > b.sequence;
            }
        };

        Time now_ = 0;
        std::uint64_t next_sequence_ = 0;
        std::uint64_t processed_ = 0;
        std::priority_queue<Event, std::vector<Event>, Later> queue_;
        std::unordered_map<std::uint64_t, Action> actions_;
        TraceSink trace_;
    };

    namespace detail
    {
        inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
        {
            x += 0x9e3779b97f4a7c15ULL;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            return x ^ (x >> 31);
        }

        inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept
        {
            std::uint64_t h = 0xcbf29ce484222325ULL;
            for (char c : s)
            {
                h ^= static_cast<unsigned char>(c);
                h *= 0x100000001b3ULL;
            }
            return h;
        }
    } // namespace detail

    /// One independent pseudo-random sequence per (seed, label) pair.
    class RandomStream
    {
    public:
        RandomStream(std::uint64_t seed, std::string_view label)
            : seed_(seed), label_(label),
              engine_(detail::splitmix64(detail::splitmix64(seed) ^ detail::fnv1a(label)))
        {
        }

        [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
        [[nodiscard]] const std::string &label() const noexcept { return label_; }

        std::uint64_t next() { return engine_(); }

        /// Uniform in [0, 1).
        double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

        double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

        /// Uniform integer in [0, n). n must be positive.
        std::uint64_t uniform_int(std::uint64_t n)
        {
            if (n == 0)
            {
                throw std::invalid_argument("uniform_int: empty range");
            }
            return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
        }

        bool bernoulli(double p) { return uniform01() < p; }

        double exponential(double rate) { return std::exponential_distribution<double>(rate)(engine_); }

    private:
        std::uint64_t seed_;
        std::string label_;
        std::mt19937_64 engine_;
    };

} // namespace bms
