#pragma once

// Goodput, delay, fairness and action-selection statistics, plus the trial
// artifacts: rounds.csv, intervals.csv, summary.json, goodput_timeline.svg.

#include "bms/actions.hpp"
#include "bms/engine.hpp"
#include "bms/mac.hpp"
#include "bms/scenarios.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bms
{
    /// Six significant digits; integers print exactly.
    inline std::string fmt6(double v)
    {
        if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15)
        {
            return std::to_string(static_cast<long long>(v));
        }
        std::ostringstream os;
        os << std::setprecision(6) << v;
        return os.str();
    }

    struct IntervalStats
    {
        std::int64_t delivered_bits = 0;
        std::uint64_t delivered = 0;
        double delay_sum_ms = 0.0;
        std::uint64_t drops = 0;
        std::uint64_t cycles = 0;
    };

    class BssStats
    {
    public:
        BssStats(NodeId id, Role role, Time interval, Time duration)
            : id_(id), role_(role), interval_(interval), duration_(duration),
              intervals_(static_cast<std::size_t>((duration + interval - 1) / interval)),
              bins_(static_cast<std::size_t>((duration + kSecond - 1) / kSecond), 0)
        {
        }

        [[nodiscard]] NodeId id() const noexcept { return id_; }
        [[nodiscard]] Role role() const noexcept { return role_; }
        [[nodiscard]] Time interval_length() const noexcept { return interval_; }
        [[nodiscard]] Time duration() const noexcept { return duration_; }
        [[nodiscard]] const std::vector<IntervalStats> &intervals() const noexcept { return intervals_; }
        [[nodiscard]] const std::vector<std::int64_t> &timeline_bits() const noexcept { return bins_; }

        void on_delivered(Time now, const Packet &p)
        {
            auto &iv = at(now);
            const std::int64_t bits = 8LL * p.size_bytes;
            iv.delivered_bits += bits;
            ++iv.delivered;
            iv.delay_sum_ms += static_cast<double>(now - p.arrival) / static_cast<double>(kMillisecond);
            const auto b = std::min(bins_.size() - 1, static_cast<std::size_t>(now / kSecond));
            bins_[b] += bits;
        }

        void on_dropped(Time now) { ++at(now).drops; }
        void on_cycle(Time start) { ++at(start).cycles; }

        [[nodiscard]] std::int64_t delivered_bits() const
        {
            std::int64_t total = 0;
            for (const auto &iv : intervals_)
            {
                total += iv.delivered_bits;
            }
            return total;
        }

        [[nodiscard]] std::uint64_t drops() const
        {
            std::uint64_t total = 0;
            for (const auto &iv : intervals_)
            {
                total += iv.drops;
            }
            return total;
        }

        /// Mbps over the whole trial.
        [[nodiscard]] double goodput_mbps() const
        {
            return static_cast<double>(delivered_bits()) / static_cast<double>(duration_);
        }

        [[nodiscard]] Time interval_span(std::size_t k) const
        {
            const Time start = static_cast<Time>(k) * interval_;
            return std::min(duration_, start + interval_) - start;
        }

        [[nodiscard]] double goodput_mbps(std::size_t k) const
        {
            return static_cast<double>(intervals_.at(k).delivered_bits) / static_cast<double>(interval_span(k));
        }

        /// Mean delay of delivered packets in ms (0 when nothing was delivered).
        [[nodiscard]] double mean_delay_ms(std::size_t k) const
        {
            const auto &iv = intervals_.at(k);
            return iv.delivered ? iv.delay_sum_ms / static_cast<double>(iv.delivered) : 0.0;
        }

        [[nodiscard]] double mean_delay_ms() const
        {
            double sum = 0.0;
            std::uint64_t n = 0;
            for (const auto &iv : intervals_)
            {
                sum += iv.delay_sum_ms;
                n += iv.delivered;
            }
            return n ? sum / static_cast<double>(n) : 0.0;
        }

    private:
        IntervalStats &at(Time t)
        {
            const auto k = std::min(intervals_.size() - 1, static_cast<std::size_t>(std::max<Time>(0, t) / interval_));
            return intervals_[k];
        }

        NodeId id_;
        Role role_;
        Time interval_;
        Time duration_;
        std::vector<IntervalStats> intervals_;
        std::vector<std::int64_t> bins_;
    };

    struct RoundRow
    {
        std::size_t trial = 0;
        Time time_us = 0; // cycle start
        NodeId bss = 0;
        int alloc = 1;
        int primary = 1;
        int cw = 16;
        double d_ms = 0.0;
        double reward = 0.0;
        CycleCause cause = CycleCause::acked;
        ChannelSet transmit_set;
        std::vector<double> context;
    };

    struct TrialRecord
    {
        std::size_t trial = 0;
        std::uint64_t seed = 0;
        std::string scenario;
        std::string algorithm;
        std::string architecture;
        Bonding bonding = Bonding::scb;
        Time duration = 60 * kSecond;
        Time interval = 15 * kSecond;
        std::vector<int> optimal_allocation;
        std::vector<BssStats> bss;
        std::vector<RoundRow> rows;

        [[nodiscard]] std::size_t interval_count() const
        {
            return static_cast<std::size_t>((duration + interval - 1) / interval);
        }

        [[nodiscard]] const BssStats &stats(NodeId id) const
        {
            for (const auto &s : bss)
            {
                if (s.id() == id)
                {
                    return s;
                }
            }
            throw std::out_of_range("no BSS with id " + std::to_string(id));
        }

        [[nodiscard]] std::vector<NodeId> learners() const
        {
            std::vector<NodeId> out;
            for (const auto &s : bss)
            {
                if (s.role() == Role::learner)
                {
                    out.push_back(s.id());
                }
            }
            return out;
        }
    };

    struct JainResult
    {
        double value = 1.0;
        bool degenerate = false; // all-zero input
    };

    /// (sum x)^2 / (n sum x^2). All-zero input yields 1 with the degenerate flag.
    inline JainResult jain_index(std::span<const double> x)
    {
        if (x.empty())
        {
            throw std::invalid_argument("jain_index of an empty set");
        }
        double sum = 0.0;
        double sq = 0.0;
        for (double v : x)
        {
            if (v < 0.0)
            {
                throw std::invalid_argument("jain_index needs non-negative inputs");
            }
            sum += v;
            sq += v * v;
        }
        if (sq == 0.0)
        {
            return {1.0, true};
        }
        return {sum * sum / (static_cast<double>(x.size()) * sq), false};
    }

    inline std::string action_label(int alloc, int primary, bool with_primary)
    {
        return with_primary ? "#" + std::to_string(alloc) + "_" + std::to_string(primary) : "#" + std::to_string(alloc);
    }

    /// Fraction of a BSS's cycles starting in [from, to) per action label.
    inline std::map<std::string, double> selection_frequency(std::span<const RoundRow> rows, NodeId bss, Time from,
                                                             Time to, bool with_primary)
    {
        std::map<std::string, double> freq;
        std::size_t n = 0;
        for (const auto &r : rows)
        {
            if (r.bss == bss && r.time_us >= from && r.time_us < to)
            {
                freq[action_label(r.alloc, r.primary, with_primary)] += 1.0;
                ++n;
            }
        }
        for (auto &[label, f] : freq)
        {
            f /= static_cast<double>(n);
        }
        return freq;
    }

    /// Fraction of a BSS's cycles in interval k that used the given allocation.
    inline double allocation_rate(const TrialRecord &rec, NodeId bss, std::size_t k, int alloc)
    {
        const Time from = static_cast<Time>(k) * rec.interval;
        const Time to = from + rec.interval;
        std::size_t hit = 0;
        std::size_t n = 0;
        for (const auto &r : rec.rows)
        {
            if (r.bss == bss && r.time_us >= from && r.time_us < to)
            {
                ++n;
                hit += r.alloc == alloc ? 1 : 0;
            }
        }
        return n ? static_cast<double>(hit) / static_cast<double>(n) : 0.0;
    }

    /// Share of cycles in interval k on that interval's best channel.
    inline double optimal_selection_rate(const TrialRecord &rec, NodeId bss, std::size_t k)
    {
        if (k >= rec.optimal_allocation.size())
        {
            throw std::out_of_range("no optimal allocation recorded for interval " + std::to_string(k));
        }
        return allocation_rate(rec, bss, k, rec.optimal_allocation[k]);
    }

    /// Most frequent primary of a BSS over cycles starting in [from, to); 0 if none.
    inline int modal_primary(std::span<const RoundRow> rows, NodeId bss, Time from, Time to)
    {
        std::array<std::size_t, kBasicChannels + 1> counts{};
        for (const auto &r : rows)
        {
            if (r.bss == bss && r.time_us >= from && r.time_us < to)
            {
                ++counts[static_cast<std::size_t>(r.primary)];
            }
        }
        int best = 0;
        for (int c = 1; c <= kBasicChannels; ++c)
        {
            if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)])
            {
                best = c;
            }
        }
        return best;
    }

    inline std::vector<double> goodputs(const TrialRecord &rec)
    {
        std::vector<double> out;
        for (const auto &s : rec.bss)
        {
            out.push_back(s.goodput_mbps());
        }
        return out;
    }

    inline constexpr const char *kRoundsHeader = "trial,time_us,bss,alloc,primary,cw,D_ms,reward,cause";

    inline void write_rounds_csv(std::ostream &os, std::span<const RoundRow> rows)
    {
        os << kRoundsHeader << '\n';
        for (const auto &r : rows)
        {
            os << r.trial << ',' << r.time_us << ',' << r.bss << ",#" << r.alloc << ',' << r.primary << ',' << r.cw
               << ',' << fmt6(r.d_ms) << ',' << fmt6(r.reward) << ',' << to_string(r.cause) << '\n';
        }
    }

    inline void write_contexts_csv(std::ostream &os, std::span<const RoundRow> rows)
    {
        os << "trial,time_us,bss,transmit_set,context\n";
        for (const auto &r : rows)
        {
            os << r.trial << ',' << r.time_us << ',' << r.bss << ",\"" << r.transmit_set.to_string() << "\",\"";
            for (std::size_t i = 0; i < r.context.size(); ++i)
            {
                os << (i ? " " : "") << fmt6(r.context[i]);
            }
            os << "\"\n";
        }
    }

    inline void write_intervals_csv(std::ostream &os, const TrialRecord &rec)
    {
        os << "trial,bss,role,interval,start_s,end_s,goodput_mbps,mean_delay_ms,delivered_bits,drops,cycles,"
              "optimal_alloc,top_action,top_fraction\n";
        const bool with_primary = rec.bonding == Bonding::dcb;
        for (const auto &s : rec.bss)
        {
            for (std::size_t k = 0; k < s.intervals().size(); ++k)
            {
                const Time from = static_cast<Time>(k) * rec.interval;
                const Time to = from + s.interval_span(k);
                std::string top = "";
                double top_f = 0.0;
                if (s.role() == Role::learner)
                {
                    for (const auto &[label, f] : selection_frequency(rec.rows, s.id(), from, to, with_primary))
                    {
                        if (f > top_f)
                        {
                            top = label;
                            top_f = f;
                        }
                    }
                }
                const auto &iv = s.intervals()[k];
                os << rec.trial << ',' << s.id() << ',' << to_string(s.role()) << ',' << k + 1 << ','
                   << fmt6(static_cast<double>(from) / kSecond) << ',' << fmt6(static_cast<double>(to) / kSecond)
                   << ',' << fmt6(s.goodput_mbps(k)) << ',' << fmt6(s.mean_delay_ms(k)) << ',' << iv.delivered_bits
                   << ',' << iv.drops << ',' << iv.cycles << ','
                   << (k < rec.optimal_allocation.size() ? "#" + std::to_string(rec.optimal_allocation[k]) : "")
                   << ',' << top << ',' << (top.empty() ? "" : fmt6(top_f)) << '\n';
            }
        }
    }

    /// Rounds a double to six significant digits for JSON output.
    inline double round6(double v)
    {
        if (v == 0.0 || !std::isfinite(v))
        {
            return v;
        }
        return std::stod(fmt6(v));
    }

    inline nlohmann::ordered_json trial_summary(const TrialRecord &rec)
    {
        nlohmann::ordered_json j;
        j["trial"] = rec.trial;
        j["seed"] = rec.seed;
        j["scenario"] = rec.scenario;
        j["algorithm"] = rec.algorithm;
        j["architecture"] = rec.architecture;
        j["bonding"] = std::string(to_string(rec.bonding));
        j["duration_s"] = round6(static_cast<double>(rec.duration) / kSecond);
        const bool with_primary = rec.bonding == Bonding::dcb;
        nlohmann::ordered_json bss = nlohmann::ordered_json::array();
        for (const auto &s : rec.bss)
        {
            nlohmann::ordered_json b;
            b["id"] = s.id();
            b["role"] = std::string(to_string(s.role()));
            b["goodput_mbps"] = round6(s.goodput_mbps());
            b["mean_delay_ms"] = round6(s.mean_delay_ms());
            b["delivered_bits"] = s.delivered_bits();
            b["drops"] = s.drops();
            nlohmann::ordered_json ivs = nlohmann::ordered_json::array();
            for (std::size_t k = 0; k < s.intervals().size(); ++k)
            {
                nlohmann::ordered_json iv;
                iv["interval"] = k + 1;
                iv["goodput_mbps"] = round6(s.goodput_mbps(k));
                iv["mean_delay_ms"] = round6(s.mean_delay_ms(k));
                if (s.role() == Role::learner)
                {
                    const Time from = static_cast<Time>(k) * rec.interval;
                    nlohmann::ordered_json freq;
                    for (const auto &[label, f] :
                         selection_frequency(rec.rows, s.id(), from, from + s.interval_span(k), with_primary))
                    {
                        freq[label] = round6(f);
                    }
                    iv["selection"] = freq;
                    if (k < rec.optimal_allocation.size())
                    {
                        iv["optimal_alloc"] = "#" + std::to_string(rec.optimal_allocation[k]);
                        iv["optimal_rate"] = round6(optimal_selection_rate(rec, s.id(), k));
                    }
                }
                ivs.push_back(iv);
            }
            b["intervals"] = ivs;
            bss.push_back(b);
        }
        j["bss"] = bss;
        const auto g = goodputs(rec);
        const auto jain = jain_index(g);
        j["jain"] = round6(jain.value);
        return j;
    }

    struct MeanStd
    {
        double mean = 0.0;
        double std = 0.0;
    };

    /// Sample mean and (n-1) standard deviation.
    inline MeanStd mean_std(std::span<const double> x)
    {
        MeanStd m;
        if (x.empty())
        {
            return m;
        }
        m.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
        if (x.size() > 1)
        {
            double ss = 0.0;
            for (double v : x)
            {
                ss += (v - m.mean) * (v - m.mean);
            }
            m.std = std::sqrt(ss / static_cast<double>(x.size() - 1));
        }
        return m;
    }

    /// Mean +- std across trials of per-BSS goodput, delay, per-interval goodput and J.
    inline nlohmann::ordered_json aggregate_summary(std::span<const TrialRecord> records)
    {
        nlohmann::ordered_json j;
        if (records.empty())
        {
            return j;
        }
        const TrialRecord &first = records.front();
        j["scenario"] = first.scenario;
        j["algorithm"] = first.algorithm;
        j["architecture"] = first.architecture;
        j["bonding"] = std::string(to_string(first.bonding));
        j["trials"] = records.size();
        auto pack = [](std::span<const double> v) {
            const MeanStd m = mean_std(v);
            return nlohmann::ordered_json{{"mean", round6(m.mean)}, {"std", round6(m.std)}};
        };
        nlohmann::ordered_json bss = nlohmann::ordered_json::array();
        for (std::size_t b = 0; b < first.bss.size(); ++b)
        {
            std::vector<double> g;
            std::vector<double> d;
            std::vector<std::vector<double>> per_iv(first.bss[b].intervals().size());
            for (const auto &rec : records)
            {
                g.push_back(rec.bss[b].goodput_mbps());
                d.push_back(rec.bss[b].mean_delay_ms());
                for (std::size_t k = 0; k < per_iv.size(); ++k)
                {
                    per_iv[k].push_back(rec.bss[b].goodput_mbps(k));
                }
            }
            nlohmann::ordered_json e;
            e["id"] = first.bss[b].id();
            e["role"] = std::string(to_string(first.bss[b].role()));
            e["goodput_mbps"] = pack(g);
            e["mean_delay_ms"] = pack(d);
            nlohmann::ordered_json ivs = nlohmann::ordered_json::array();
            for (const auto &v : per_iv)
            {
                ivs.push_back(pack(v));
            }
            e["interval_goodput_mbps"] = ivs;
            bss.push_back(e);
        }
        j["bss"] = bss;
        std::vector<double> jain;
        for (const auto &rec : records)
        {
            jain.push_back(jain_index(goodputs(rec)).value);
        }
        j["jain"] = pack(jain);
        return j;
    }

    /// 1 s-binned goodput per BSS as an SVG line chart.
    inline void write_timeline_svg(std::ostream &os, const TrialRecord &rec)
    {
        constexpr double w = 800.0;
        constexpr double h = 400.0;
        constexpr double pad = 50.0;
        static const char *colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
        double ymax = 1.0;
        std::size_t nbins = 1;
        for (const auto &s : rec.bss)
        {
            nbins = std::max(nbins, s.timeline_bits().size());
            for (auto bits : s.timeline_bits())
            {
                ymax = std::max(ymax, static_cast<double>(bits) / kSecond);
            }
        }
        auto px = [&](double i) { return pad + (w - 2 * pad) * i / static_cast<double>(nbins); };
        auto py = [&](double v) { return h - pad - (h - 2 * pad) * v / ymax; };

        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
           << "\" stroke=\"black\"/>\n";
        os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << w / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">time (s)</text>\n";
        os << "<text x=\"15\" y=\"" << h / 2 << "\" transform=\"rotate(-90 15 " << h / 2
           << ")\" text-anchor=\"middle\">goodput (Mbps)</text>\n";
        os << "<text x=\"" << pad - 5 << "\" y=\"" << pad << "\" text-anchor=\"end\">" << fmt6(ymax) << "</text>\n";
        for (Time t = rec.interval; t < rec.duration; t += rec.interval)
        {
            const double x = px(static_cast<double>(t) / kSecond);
            os << "<line x1=\"" << x << "\" y1=\"" << pad << "\" x2=\"" << x << "\" y2=\"" << h - pad
               << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4\"/>\n";
        }
        for (std::size_t b = 0; b < rec.bss.size(); ++b)
        {
            const auto &s = rec.bss[b];
            os << "<polyline fill=\"none\" stroke=\"" << colors[b % 6] << "\" points=\"";
            for (std::size_t i = 0; i < s.timeline_bits().size(); ++i)
            {
                os << fmt6(px(static_cast<double>(i) + 0.5)) << ','
                   << fmt6(py(static_cast<double>(s.timeline_bits()[i]) / kSecond)) << ' ';
            }
            os << "\"/>\n";
            os << "<text x=\"" << w - pad + 5 << "\" y=\"" << pad + 15.0 * static_cast<double>(b) << "\" fill=\""
               << colors[b % 6] << "\">BSS" << s.id() + 1 << "</text>\n";
        }
        os << "</svg>\n";
    }

    inline std::ofstream open_output(const std::filesystem::path &path)
    {
        std::ofstream f(path, std::ios::binary);
        if (!f)
        {
            throw std::runtime_error("cannot write " + path.string());
        }
        return f;
    }

    struct ExportOptions
    {
        bool plots = false;
        bool contexts = false;
    };

    /// Writes one trial's artifacts into `dir` (created if missing).
    inline void export_trial(const TrialRecord &rec, const std::filesystem::path &dir, const ExportOptions &opt = {})
    {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
        {
            throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
        }
        {
            auto f = open_output(dir / "rounds.csv");
            write_rounds_csv(f, rec.rows);
        }
        {
            auto f = open_output(dir / "intervals.csv");
            write_intervals_csv(f, rec);
        }
        {
            auto f = open_output(dir / "summary.json");
            f << trial_summary(rec).dump(2) << '\n';
        }
        if (opt.contexts)
        {
            auto f = open_output(dir / "contexts.csv");
            write_contexts_csv(f, rec.rows);
        }
        if (opt.plots)
        {
            auto f = open_output(dir / "goodput_timeline.svg");
            write_timeline_svg(f, rec);
        }
    }

} // namespace bms
