#pragma once

// Traffic models and the two experiment topologies.
//
//   sp: one full-buffer learner + four legacy BSSs, legacy k on channel k,
//       loads redrawn every interval (one underloaded, three near saturation)
//   mp: three full-buffer learners

#include "bms/actions.hpp"
#include "bms/engine.hpp"
#include "bms/mac.hpp"
#include "bms/medium.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace bms
{
    enum class Role : std::uint8_t
    {
        legacy,
        learner,
    };

    inline std::string_view to_string(Role r) { return r == Role::legacy ? "legacy" : "learner"; }

    struct TrafficModel
    {
        enum class Kind : std::uint8_t
        {
            full_buffer,
            variable_load,
        };

        Kind kind = Kind::full_buffer;
        std::vector<double> loads; // one load fraction per interval (variable_load)
        int msdu_bytes = 1500;
    };

    struct BssSpec
    {
        NodeId id = 0;
        Role role = Role::learner;
        int allocation = 1; // legacy only; learners pick their own
        int primary = 1;
        TrafficModel traffic;
    };

    struct ScenarioSpec
    {
        std::string name = "sp";
        Bonding bonding = Bonding::scb;
        std::vector<BssSpec> bss;
        Time duration = 60 * kSecond;
        Time interval = 15 * kSecond;
        /// Allocation id of the best channel per interval (sp only).
        std::vector<int> optimal_allocation;

        [[nodiscard]] std::size_t interval_count() const
        {
            return static_cast<std::size_t>((duration + interval - 1) / interval);
        }
    };

    struct LoadRanges
    {
        double low_min = 0.10;
        double low_max = 0.20;
        double high_min = 0.80;
        double high_max = 0.90;
    };

    struct LoadSchedule
    {
        std::vector<std::vector<double>> loads; // [legacy][interval]
        std::vector<std::size_t> underloaded;   // legacy index per interval
    };

    /// Per interval: one legacy BSS drawn uniformly gets a low load, the rest high.
    inline LoadSchedule sp_load_schedule(RandomStream &rng, std::size_t intervals = 4, std::size_t legacy = 4,
                                         const LoadRanges &ranges = {})
    {
        LoadSchedule s;
        s.loads.assign(legacy, std::vector<double>(intervals, 0.0));
        for (std::size_t i = 0; i < intervals; ++i)
        {
            const auto low = static_cast<std::size_t>(rng.uniform_int(legacy));
            s.underloaded.push_back(low);
            for (std::size_t j = 0; j < legacy; ++j)
            {
                s.loads[j][i] = j == low ? rng.uniform(ranges.low_min, ranges.low_max)
                                         : rng.uniform(ranges.high_min, ranges.high_max);
            }
        }
        return s;
    }

    /// Mean duration of one saturated 20 MHz cycle with CW 16 and full A-MPDUs.
    inline double saturated_cycle_us(const PhyProfile &phy, const MacParams &mac, int width_mhz = 20)
    {
        const double mean_backoff = (mac.cw_min - 1) / 2.0;
        const std::int64_t bits = 8LL * mac.msdu_bytes * mac.max_mpdus();
        return static_cast<double>(phy.difs_us()) + mean_backoff * static_cast<double>(phy.slot_us) +
               static_cast<double>(phy.rts_us + phy.sifs_us + phy.cts_us + phy.sifs_us) +
               static_cast<double>(frame_duration(phy, FrameKind::data, bits, width_mhz)) +
               static_cast<double>(phy.sifs_us + phy.back_us);
    }

    /// Reference capacity for load fractions: saturated lone-BSS 20 MHz goodput,
    /// in bits per microsecond.
    inline double reference_capacity(const PhyProfile &phy, const MacParams &mac)
    {
        const double bits = 8.0 * mac.msdu_bytes * mac.max_mpdus();
        return bits * (1.0 - mac.per) / saturated_cycle_us(phy, mac, 20);
    }

    /// Poisson arrivals with a piecewise-constant rate (packets per microsecond).
    class PoissonArrivals final : public ArrivalStream
    {
    public:
        PoissonArrivals(std::vector<double> rates, Time interval, Time t_end, RandomStream rng)
            : rates_(std::move(rates)), interval_(interval), t_end_(t_end), rng_(std::move(rng))
        {
            if (interval_ <= 0)
            {
                throw std::invalid_argument("interval length must be positive");
            }
            draw();
        }

        [[nodiscard]] Time next_time() const override { return next_; }
        void advance() override { draw(); }

    private:
        static constexpr Time kNever = std::numeric_limits<Time>::max();

        // Memorylessness lets a gap crossing a boundary restart at the boundary.
        void draw()
        {
            for (;;)
            {
                const auto k = static_cast<std::size_t>(cursor_ / static_cast<double>(interval_));
                if (k >= rates_.size() || cursor_ >= static_cast<double>(t_end_))
                {
                    next_ = kNever;
                    return;
                }
                const double boundary = std::min(static_cast<double>((k + 1) * interval_), static_cast<double>(t_end_));
                const double rate = rates_[k];
                if (rate <= 0.0)
                {
                    cursor_ = boundary;
                    continue;
                }
                const double t = cursor_ + rng_.exponential(rate);
                if (t >= boundary)
                {
                    cursor_ = boundary;
                    continue;
                }
                cursor_ = t;
                next_ = static_cast<Time>(std::ceil(t));
                return;
            }
        }

        std::vector<double> rates_;
        Time interval_;
        Time t_end_;
        RandomStream rng_;
        double cursor_ = 0.0;
        Time next_ = kNever;
    };

    /// Per-interval packet rates for a load schedule.
    inline std::vector<double> arrival_rates(const TrafficModel &model, double c_ref_bits_per_us)
    {
        std::vector<double> rates;
        for (double load : model.loads)
        {
            if (load < 0.0 || load > 1.0)
            {
                throw std::invalid_argument("load fraction outside [0,1]");
            }
            rates.push_back(load * c_ref_bits_per_us / (8.0 * model.msdu_bytes));
        }
        return rates;
    }

    /// All arrival instants up to t_end (empty for full-buffer traffic).
    inline std::vector<Time> generate_arrivals(const TrafficModel &model, Time interval, Time t_end,
                                               double c_ref_bits_per_us, RandomStream rng)
    {
        std::vector<Time> out;
        if (model.kind == TrafficModel::Kind::full_buffer)
        {
            return out;
        }
        PoissonArrivals arrivals(arrival_rates(model, c_ref_bits_per_us), interval, t_end, std::move(rng));
        while (arrivals.next_time() <= t_end)
        {
            out.push_back(arrivals.next_time());
            arrivals.advance();
        }
        return out;
    }

    struct ScenarioOptions
    {
        Time duration = 60 * kSecond;
        Time interval = 15 * kSecond;
        Bonding bonding = Bonding::scb;
        LoadRanges loads{};
        int msdu_bytes = 1500;
        std::vector<std::pair<int, int>> legacy_placement{{1, 1}, {2, 2}, {3, 3}, {4, 4}}; // (alloc, primary)
        std::size_t learners = 3;                                                          // mp only
    };

    /// One full-buffer learner (id 0) plus legacy BSSs 1..n on their pinned channels.
    inline ScenarioSpec sp_preset(std::uint64_t seed, const ScenarioOptions &opt = {})
    {
        ScenarioSpec s;
        s.name = "sp";
        s.bonding = opt.bonding;
        s.duration = opt.duration;
        s.interval = opt.interval;
        s.bss.push_back(BssSpec{0, Role::learner, 1, 1, TrafficModel{TrafficModel::Kind::full_buffer, {}, opt.msdu_bytes}});

        RandomStream rng(seed, "schedule");
        const LoadSchedule sched =
            sp_load_schedule(rng, s.interval_count(), opt.legacy_placement.size(), opt.loads);
        for (std::size_t j = 0; j < opt.legacy_placement.size(); ++j)
        {
            const auto [alloc, primary] = opt.legacy_placement[j];
            s.bss.push_back(BssSpec{static_cast<NodeId>(j + 1), Role::legacy, alloc, primary,
                                    TrafficModel{TrafficModel::Kind::variable_load, sched.loads[j], opt.msdu_bytes}});
        }
        for (std::size_t low : sched.underloaded)
        {
            s.optimal_allocation.push_back(opt.legacy_placement[low].first);
        }
        return s;
    }

    /// Full-buffer learners 0..n-1.
    inline ScenarioSpec mp_preset(const ScenarioOptions &opt = {})
    {
        ScenarioSpec s;
        s.name = "mp";
        s.bonding = opt.bonding;
        s.duration = opt.duration;
        s.interval = opt.interval;
        for (std::size_t i = 0; i < opt.learners; ++i)
        {
            s.bss.push_back(BssSpec{static_cast<NodeId>(i), Role::learner, 1, 1,
                                    TrafficModel{TrafficModel::Kind::full_buffer, {}, opt.msdu_bytes}});
        }
        return s;
    }

} // namespace bms
