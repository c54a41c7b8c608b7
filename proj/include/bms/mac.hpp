#pragma once

// Per-node channel access. Legacy BSSs run DCF with binary exponential backoff
// on a fixed 20 MHz channel. Learning BSSs run transmission cycles: pick an
// action, contend on the chosen primary with the chosen CW (no BEB), apply the
// SCB/DCB bonding rule, exchange RTS/CTS/A-MPDU/BlockAck, and report the cycle.

#include "bms/actions.hpp"
#include "bms/engine.hpp"
#include "bms/medium.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bms
{
    enum class Bonding : std::uint8_t
    {
        scb,
        dcb,
    };

    inline std::string_view to_string(Bonding b) { return b == Bonding::scb ? "scb" : "dcb"; }

    struct MacParams
    {
        double per = 0.1;
        int msdu_bytes = 1500;
        int ampdu_max_bytes = 65535;
        std::size_t queue_capacity = 500;
        int retry_limit = 7;
        int cw_min = 16;
        int cw_max = 1024;
        Time d_max = 10 * kMillisecond;
        bool rts_cts = true;

        [[nodiscard]] int max_mpdus() const { return std::max(1, ampdu_max_bytes / msdu_bytes); }
    };

    struct Packet
    {
        Time arrival = 0;
        int size_bytes = 1500;
        int retries = 0;
        NodeId bss = kNoNode;
    };

    /// Bounded FIFO. The first `in_flight()` packets belong to an ongoing A-MPDU.
    class TxQueue
    {
    public:
        explicit TxQueue(std::size_t capacity = 500) : capacity_(capacity) {}

        /// False (and nothing stored) when the queue is full.
        bool push(Packet p)
        {
            if (packets_.size() >= capacity_)
            {
                return false;
            }
            packets_.push_back(p);
            return true;
        }

        [[nodiscard]] std::size_t size() const noexcept { return packets_.size(); }
        [[nodiscard]] bool empty() const noexcept { return packets_.empty(); }
        [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
        [[nodiscard]] std::size_t in_flight() const noexcept { return in_flight_; }
        [[nodiscard]] double utilization() const { return static_cast<double>(packets_.size()) / static_cast<double>(capacity_); }
        [[nodiscard]] const std::deque<Packet> &packets() const noexcept { return packets_; }
        [[nodiscard]] std::deque<Packet> &packets() noexcept { return packets_; }

        /// Marks up to `max_mpdus` head packets as in flight; returns how many.
        std::size_t take(std::size_t max_mpdus)
        {
            in_flight_ = std::min(max_mpdus, packets_.size());
            return in_flight_;
        }

        void release() noexcept { in_flight_ = 0; }

    private:
        std::size_t capacity_;
        std::size_t in_flight_ = 0;
        std::deque<Packet> packets_;
    };

    /// Source of packet arrival instants, consumed lazily by a node.
    class ArrivalStream
    {
    public:
        virtual ~ArrivalStream() = default;
        /// Next arrival time, or a time beyond any horizon when exhausted.
        [[nodiscard]] virtual Time next_time() const = 0;
        virtual void advance() = 0;
    };

    /// Transmit set chosen at TXOP time, or nullopt to defer and re-contend.
    inline std::optional<ChannelSet> bonding_decision(Bonding mode, const ChannelAllocation &alloc, int primary,
                                                      ChannelSet idle)
    {
        if (mode == Bonding::scb)
        {
            return alloc.channels.subset_of(idle) ? std::optional<ChannelSet>(alloc.channels) : std::nullopt;
        }
        std::optional<ChannelSet> best;
        for (const auto &candidate : allocations())
        {
            const ChannelSet s = candidate.channels;
            if (s.contains(primary) && s.subset_of(alloc.channels) && s.subset_of(idle) &&
                (!best || s.size() > best->size()))
            {
                best = s;
            }
        }
        return best;
    }

    /// Slot-accurate backoff on one primary channel, evaluated in closed form:
    /// one expiry event per idle stretch instead of one event per slot.
    class BackoffProcess
    {
    public:
        using Grant = std::function<void()>;

        BackoffProcess(Scheduler &sched, const Medium &medium, const PhyProfile &phy, NodeId owner, RandomStream &rng)
            : sched_(sched), medium_(medium), phy_(phy), owner_(owner), rng_(rng)
        {
        }

        void start(int primary, int cw, Grant on_grant)
        {
            abort();
            primary_ = primary;
            remaining_ = static_cast<std::int64_t>(rng_.uniform_int(static_cast<std::uint64_t>(cw)));
            last_draw_ = remaining_;
            on_grant_ = std::move(on_grant);
            active_ = true;
            if (medium_.busy(primary_))
            {
                frozen_ = true;
                return;
            }
            const Time now = sched_.now();
            // Counting starts once the primary has been idle for DIFS.
            resume_at_ = std::max(now, medium_.idle_since(primary_) + phy_.difs_us());
            arm();
        }

        void abort()
        {
            sched_.cancel(expiry_);
            expiry_ = {};
            active_ = false;
            frozen_ = false;
            on_grant_ = {};
        }

        /// Carrier-sense input for the primary channel.
        void on_channel(int channel, bool busy)
        {
            if (!active_ || channel != primary_)
            {
                return;
            }
            const Time now = sched_.now();
            if (busy)
            {
                if (frozen_ || expiry_at_ == now)
                {
                    return; // expiring in this very slot: transmit anyway
                }
                if (now > resume_at_)
                {
                    remaining_ -= (now - resume_at_) / phy_.slot_us;
                }
                sched_.cancel(expiry_);
                expiry_ = {};
                frozen_ = true;
            }
            else if (frozen_)
            {
                frozen_ = false;
                resume_at_ = now + phy_.difs_us();
                arm();
            }
        }

        [[nodiscard]] bool active() const noexcept { return active_; }
        [[nodiscard]] bool frozen() const noexcept { return frozen_; }
        [[nodiscard]] std::int64_t remaining() const noexcept { return remaining_; }
        [[nodiscard]] std::int64_t last_draw() const noexcept { return last_draw_; }
        [[nodiscard]] int primary() const noexcept { return primary_; }

    private:
        void arm()
        {
            expiry_at_ = resume_at_ + remaining_ * phy_.slot_us;
            expiry_ = sched_.schedule(expiry_at_, EventKind::backoff_expiry, owner_, [this]() {
                expiry_ = {};
                active_ = false;
                auto grant = std::move(on_grant_);
                on_grant_ = {};
                remaining_ = 0;
                if (grant)
                {
                    grant();
                }
            });
        }

        Scheduler &sched_;
        const Medium &medium_;
        const PhyProfile &phy_;
        NodeId owner_;
        RandomStream &rng_;
        Grant on_grant_;
        EventHandle expiry_;
        Time expiry_at_ = -1;
        Time resume_at_ = 0;
        std::int64_t remaining_ = 0;
        std::int64_t last_draw_ = 0;
        int primary_ = 1;
        bool active_ = false;
        bool frozen_ = false;
    };

    struct ExchangeResult
    {
        bool cts_received = true;      // false: the RTS collided and no CTS followed
        std::vector<bool> mpdu_ok;     // per in-flight MPDU
        ChannelSet channels;
        Time data_duration = 0;
    };

    enum class CycleCause : std::uint8_t
    {
        acked,
        timeout,
    };

    inline std::string_view to_string(CycleCause c) { return c == CycleCause::acked ? "acked" : "timeout"; }

    /// One learning round of a learner BSS.
    struct TransmissionCycle
    {
        Time start = 0;
        Time end = 0;
        ActionTriple action;
        CycleCause cause = CycleCause::timeout;
        ChannelSet transmit_set;
        int contention_attempts = 0;
        int deferrals = 0;
        int rts_failures = 0;
        std::vector<bool> mpdu_ok;

        /// Duration capped at D_max.
        [[nodiscard]] Time duration(Time d_max) const { return std::min(end - start, d_max); }
    };

    /// Callbacks through which nodes report traffic outcomes.
    struct TrafficSink
    {
        std::function<void(NodeId, Time now, const Packet &)> delivered;
        std::function<void(NodeId, Time now, const Packet &)> dropped;
    };

    /// State shared by legacy and learning BSSs: queue, backoff, PER stream and
    /// the RTS/CTS/A-MPDU/BlockAck exchange.
    class Station
    {
    public:
        Station(NodeId id, Scheduler &sched, Medium &medium, const PhyProfile &phy, const MacParams &mac,
                std::uint64_t seed, TrafficSink sink)
            : id_(id), sched_(sched), medium_(medium), phy_(phy), mac_(mac),
              backoff_rng_(seed, "backoff:" + std::to_string(id)), per_rng_(seed, "per:" + std::to_string(id)),
              queue_(mac.queue_capacity), backoff_(sched, medium, phy, id, backoff_rng_), sink_(std::move(sink))
        {
            medium_.add_listener(id_, [this](int c, bool busy) { backoff_.on_channel(c, busy); });
        }

        virtual ~Station() = default;
        Station(const Station &) = delete;
        Station &operator=(const Station &) = delete;

        [[nodiscard]] NodeId id() const noexcept { return id_; }
        [[nodiscard]] const TxQueue &queue() const noexcept { return queue_; }
        [[nodiscard]] const BackoffProcess &backoff() const noexcept { return backoff_; }
        [[nodiscard]] std::uint64_t drops() const noexcept { return drops_; }

        /// Attaches an arrival process (variable load). Without one and with
        /// full_buffer set, the queue is kept at capacity.
        void set_arrivals(std::unique_ptr<ArrivalStream> arrivals) { arrivals_ = std::move(arrivals); }
        void set_full_buffer(bool on) { full_buffer_ = on; }
        [[nodiscard]] bool full_buffer() const noexcept { return full_buffer_; }

        virtual void start() = 0;

    protected:
        /// Pulls every arrival up to now into the queue (overflow is dropped).
        void sync_arrivals()
        {
            const Time now = sched_.now();
            if (full_buffer_)
            {
                while (queue_.size() < queue_.capacity())
                {
                    queue_.push(Packet{now, mac_.msdu_bytes, 0, id_});
                }
                return;
            }
            if (!arrivals_)
            {
                return;
            }
            while (arrivals_->next_time() <= now)
            {
                const Packet p{arrivals_->next_time(), mac_.msdu_bytes, 0, id_};
                arrivals_->advance();
                if (!queue_.push(p))
                {
                    ++drops_;
                    if (sink_.dropped)
                    {
                        sink_.dropped(id_, now, p);
                    }
                }
            }
        }

        /// Schedules `wake` at the next arrival (used only while the queue is empty).
        void wait_for_arrival(std::function<void()> wake)
        {
            if (!arrivals_)
            {
                return;
            }
            const Time t = arrivals_->next_time();
            if (t == std::numeric_limits<Time>::max())
            {
                return;
            }
            sched_.schedule(std::max(t, sched_.now()), EventKind::arrival, id_, std::move(wake));
        }

        /// RTS - SIFS - CTS - SIFS - A-MPDU - SIFS - BlockAck on `channels`.
        void run_exchange(ChannelSet channels, std::function<void(ExchangeResult)> done)
        {
            sync_arrivals();
            const std::size_t n = queue_.take(static_cast<std::size_t>(mac_.max_mpdus()));
            const int width = 20 * channels.size();
            std::int64_t bits = 0;
            for (std::size_t i = 0; i < n; ++i)
            {
                bits += 8LL * queue_.packets()[i].size_bytes;
            }
            auto result = std::make_shared<ExchangeResult>();
            result->channels = channels;
            result->data_duration = frame_duration(phy_, FrameKind::data, bits, width);
            auto finish = std::make_shared<std::function<void(ExchangeResult)>>(std::move(done));

            auto send_back = [this, channels, result, finish](bool data_collided) {
                sched_.schedule_in(phy_.sifs_us, EventKind::exchange_step, id_, [=, this]() {
                    medium_.begin_frame(FrameTx{channels, 0, phy_.back_us, id_, FrameKind::back},
                                        [=, this](bool) {
                                            const std::size_t k = queue_.in_flight();
                                            result->mpdu_ok.resize(k);
                                            for (std::size_t i = 0; i < k; ++i)
                                            {
                                                // one PER draw per MPDU keeps the stream aligned
                                                const bool ok = !per_rng_.bernoulli(mac_.per);
                                                result->mpdu_ok[i] = ok && !data_collided;
                                            }
                                            (*finish)(*result);
                                        });
                });
            };
            auto send_data = [this, channels, result, send_back]() {
                medium_.begin_frame(FrameTx{channels, 0, result->data_duration, id_, FrameKind::data},
                                    [send_back](bool collided) { send_back(collided); });
            };

            if (!mac_.rts_cts)
            {
                send_data();
                return;
            }
            medium_.begin_frame(FrameTx{channels, 0, phy_.rts_us, id_, FrameKind::rts},
                                [this, channels, result, finish, send_data](bool collided) {
                                    if (collided)
                                    {
                                        result->cts_received = false;
                                        sched_.schedule_in(phy_.cts_timeout_us(), EventKind::exchange_step, id_,
                                                           [=]() { (*finish)(*result); });
                                        return;
                                    }
                                    sched_.schedule_in(phy_.sifs_us, EventKind::exchange_step, id_, [=, this]() {
                                        medium_.begin_frame(
                                            FrameTx{channels, 0, phy_.cts_us, id_, FrameKind::cts},
                                            [=, this](bool) {
                                                sched_.schedule_in(phy_.sifs_us, EventKind::exchange_step, id_,
                                                                   send_data);
                                            });
                                    });
                                });
        }

        /// Dequeues delivered MPDUs, requeues failures (dropping those past the
        /// retry limit). Returns the number delivered.
        std::size_t settle(const ExchangeResult &r)
        {
            sync_arrivals();
            const Time now = sched_.now();
            auto &q = queue_.packets();
            const std::size_t k = queue_.in_flight();
            std::deque<Packet> kept;
            std::size_t delivered = 0;
            for (std::size_t i = 0; i < k; ++i)
            {
                Packet p = q.front();
                q.pop_front();
                const bool ok = r.cts_received && i < r.mpdu_ok.size() && r.mpdu_ok[i];
                if (ok)
                {
                    ++delivered;
                    if (sink_.delivered)
                    {
                        sink_.delivered(id_, now, p);
                    }
                    continue;
                }
                if (!r.cts_received)
                {
                    kept.push_back(p); // nothing was sent; handled by the short-retry counter
                    continue;
                }
                if (p.retries >= mac_.retry_limit)
                {
                    ++drops_;
                    if (sink_.dropped)
                    {
                        sink_.dropped(id_, now, p);
                    }
                    continue;
                }
                ++p.retries;
                kept.push_back(p);
            }
            for (auto it = kept.rbegin(); it != kept.rend(); ++it)
            {
                q.push_front(*it);
            }
            queue_.release();
            if (!r.cts_received && ++short_retries_ > mac_.retry_limit)
            {
                short_retries_ = 0;
                if (!q.empty())
                {
                    ++drops_;
                    if (sink_.dropped)
                    {
                        sink_.dropped(id_, now, q.front());
                    }
                    q.pop_front();
                }
            }
            else if (r.cts_received)
            {
                short_retries_ = 0;
            }
            sync_arrivals();
            return delivered;
        }

        NodeId id_;
        Scheduler &sched_;
        Medium &medium_;
        const PhyProfile &phy_;
        const MacParams &mac_;
        RandomStream backoff_rng_;
        RandomStream per_rng_;
        TxQueue queue_;
        BackoffProcess backoff_;
        TrafficSink sink_;
        std::unique_ptr<ArrivalStream> arrivals_;
        bool full_buffer_ = false;
        int short_retries_ = 0;
        std::uint64_t drops_ = 0;
    };

    /// DCF with binary exponential backoff on a fixed 20 MHz channel.
    class LegacyNode final : public Station
    {
    public:
        LegacyNode(NodeId id, int channel, Scheduler &sched, Medium &medium, const PhyProfile &phy,
                   const MacParams &mac, std::uint64_t seed, TrafficSink sink)
            : Station(id, sched, medium, phy, mac, seed, std::move(sink)), channel_(channel), cw_(mac.cw_min)
        {
        }

        void start() override { resume(); }

        [[nodiscard]] int cw() const noexcept { return cw_; }
        [[nodiscard]] int channel() const noexcept { return channel_; }
        [[nodiscard]] const std::vector<int> &cw_trace() const noexcept { return cw_trace_; }
        void record_cw_trace(bool on) { trace_cw_ = on; }

        /// CW update rule: reset on success, double (capped) on failure.
        static int next_cw(int cw, bool success, const MacParams &mac)
        {
            return success ? mac.cw_min : std::min(2 * cw, mac.cw_max);
        }

        /// Re-evaluates the node after an arrival or a completed exchange.
        void resume()
        {
            if (busy_)
            {
                return;
            }
            sync_arrivals();
            if (queue_.empty())
            {
                wait_for_arrival([this]() { resume(); });
                return;
            }
            busy_ = true;
            backoff_.start(channel_, cw_, [this]() {
                run_exchange(ChannelSet{channel_}, [this](ExchangeResult r) {
                    const bool success = settle(r) > 0;
                    cw_ = next_cw(cw_, success, mac_);
                    if (trace_cw_)
                    {
                        cw_trace_.push_back(cw_);
                    }
                    busy_ = false;
                    resume();
                });
            });
        }

    private:
        int channel_;
        int cw_;
        bool busy_ = false;
        bool trace_cw_ = false;
        std::vector<int> cw_trace_;
    };

    /// Connects a learner to its decision logic (the harness).
    class CycleController
    {
    public:
        virtual ~CycleController() = default;
        /// Called at cycle start; returns the action for this cycle.
        virtual ActionTriple begin_cycle(NodeId node, Time now) = 0;
        /// Called once the cycle has ended (acked or timed out).
        virtual void end_cycle(NodeId node, const TransmissionCycle &cycle) = 0;
    };

    /// Learning BSS: back-to-back transmission cycles capped at D_max.
    class LearnerNode final : public Station
    {
    public:
        LearnerNode(NodeId id, Bonding bonding, Scheduler &sched, Medium &medium, const PhyProfile &phy,
                    const MacParams &mac, std::uint64_t seed, TrafficSink sink, CycleController &controller)
            : Station(id, sched, medium, phy, mac, seed, std::move(sink)), bonding_(bonding), controller_(controller)
        {
        }

        void start() override
        {
            sched_.schedule(sched_.now(), EventKind::cycle_start, id_, [this]() { begin_cycle(); });
        }

        [[nodiscard]] Bonding bonding() const noexcept { return bonding_; }
        [[nodiscard]] const TransmissionCycle &current() const noexcept { return cycle_; }
        [[nodiscard]] std::uint64_t cycles() const noexcept { return cycles_; }

    private:
        void begin_cycle()
        {
            sync_arrivals();
            if (queue_.empty())
            {
                wait_for_arrival([this]() { begin_cycle(); });
                return;
            }
            const Time now = sched_.now();
            cycle_ = TransmissionCycle{};
            cycle_.start = now;
            cycle_.action = controller_.begin_cycle(id_, now);
            if (!cycle_.action.valid())
            {
                throw std::logic_error("controller returned an invalid action");
            }
            deadline_passed_ = false;
            in_exchange_ = false;
            timeout_ = sched_.schedule(now + mac_.d_max, EventKind::cycle_timeout, id_, [this]() { on_timeout(); });
            contend();
        }

        void contend()
        {
            ++cycle_.contention_attempts;
            backoff_.start(cycle_.action.primary, cycle_.action.cw, [this]() { on_grant(); });
        }

        void on_grant()
        {
            ChannelSet idle;
            for (int c : cycle_.action.channel.channels.channels())
            {
                if (c == cycle_.action.primary || medium_.idle_for(c, phy_.pifs_us()))
                {
                    idle.insert(c);
                }
            }
            const auto set = bonding_decision(bonding_, cycle_.action.channel, cycle_.action.primary, idle);
            if (!set)
            {
                ++cycle_.deferrals;
                contend(); // same CW, fresh draw
                return;
            }
            in_exchange_ = true;
            run_exchange(*set, [this](ExchangeResult r) { on_exchange_done(std::move(r)); });
        }

        void on_timeout()
        {
            timeout_ = {};
            if (in_exchange_)
            {
                deadline_passed_ = true;
                return;
            }
            backoff_.abort();
            finish(CycleCause::timeout, sched_.now());
        }

        void on_exchange_done(ExchangeResult r)
        {
            in_exchange_ = false;
            settle(r);
            if (!r.cts_received)
            {
                ++cycle_.rts_failures;
                if (deadline_passed_)
                {
                    finish(CycleCause::timeout, sched_.now());
                    return;
                }
                contend();
                return;
            }
            cycle_.transmit_set = r.channels;
            cycle_.mpdu_ok = std::move(r.mpdu_ok);
            finish(CycleCause::acked, sched_.now());
        }

        void finish(CycleCause cause, Time end)
        {
            sched_.cancel(timeout_);
            timeout_ = {};
            cycle_.cause = cause;
            cycle_.end = end;
            ++cycles_;
            controller_.end_cycle(id_, cycle_);
            sched_.schedule(end, EventKind::cycle_start, id_, [this]() { begin_cycle(); });
        }

        Bonding bonding_;
        CycleController &controller_;
        TransmissionCycle cycle_;
        EventHandle timeout_;
        bool deadline_passed_ = false;
        bool in_exchange_ = false;
        std::uint64_t cycles_ = 0;
    };

} // namespace bms
