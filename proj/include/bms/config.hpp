#pragma once

// Flat dotted key = value configuration (phy.slot_us = 9, erlb.eta = 0.086, ...).
// '#' starts a comment. Unknown keys and bad values are collected as
// violations; hyperparameters outside their tuning ranges produce warnings.

#include "bms/actions.hpp"
#include "bms/harness.hpp"
#include "bms/mac.hpp"
#include "bms/medium.hpp"
#include "bms/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace bms
{
    struct RunConfig
    {
        std::string scenario = "sp"; // sp | mp | synth:<kind>
        Algorithm algorithm = Algorithm::linucb;
        Architecture architecture = Architecture::sa;
        Bonding bonding = Bonding::scb;
        std::size_t trials = 20;
        std::uint64_t base_seed = 1;
        std::size_t jobs = 1;

        double duration_s = 60.0;
        double interval_s = 15.0;
        LoadRanges loads{};
        std::vector<std::pair<int, int>> legacy{{1, 1}, {2, 2}, {3, 3}, {4, 4}};
        std::size_t learners = 3;

        PhyProfile phy{};
        MacParams mac{};
        double window_ms = 100.0;

        std::optional<double> ucb_alpha;
        std::optional<double> linucb_alpha;
        std::optional<double> erlb_epsilon;
        std::optional<double> erlb_eta;
        std::optional<double> erlb_gamma;
        std::optional<double> erlb_alpha_ema;
        std::optional<double> erlb_eps_num;
        std::optional<double> osub_p;
        double kl_c = 0.0;

        std::string output_dir;
        bool plots = false;
        bool contexts = false;

        /// Architecture defaults with any explicit overrides applied.
        [[nodiscard]] Hyperparameters hyperparameters() const
        {
            Hyperparameters h = Hyperparameters::defaults(architecture);
            h.ucb_alpha = ucb_alpha.value_or(h.ucb_alpha);
            h.linucb_alpha = linucb_alpha.value_or(h.linucb_alpha);
            h.erlb.epsilon = erlb_epsilon.value_or(h.erlb.epsilon);
            h.erlb.eta = erlb_eta.value_or(h.erlb.eta);
            h.erlb.gamma = erlb_gamma.value_or(h.erlb.gamma);
            h.erlb.alpha_ema = erlb_alpha_ema.value_or(h.erlb.alpha_ema);
            h.erlb.eps_num = erlb_eps_num.value_or(h.erlb.eps_num);
            h.osub_p = osub_p.value_or(h.osub_p);
            h.kl_c = kl_c;
            return h;
        }

        [[nodiscard]] Time duration() const { return static_cast<Time>(duration_s * kSecond + 0.5); }
        [[nodiscard]] Time interval() const { return static_cast<Time>(interval_s * kSecond + 0.5); }

        [[nodiscard]] ScenarioOptions scenario_options() const
        {
            ScenarioOptions o;
            o.duration = duration();
            o.interval = interval();
            o.bonding = bonding;
            o.loads = loads;
            o.msdu_bytes = mac.msdu_bytes;
            o.legacy_placement = legacy;
            o.learners = learners;
            return o;
        }

        [[nodiscard]] std::uint64_t trial_seed(std::size_t k) const { return base_seed + k; }
    };

    struct ValidationReport
    {
        std::vector<std::string> violations;
        std::vector<std::string> warnings;

        [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
    };

    namespace detail
    {
        inline std::string trim(std::string_view s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string_view::npos)
            {
                return {};
            }
            const auto e = s.find_last_not_of(" \t\r\n");
            return std::string(s.substr(b, e - b + 1));
        }

        template <class T>
        bool parse_number(const std::string &s, T &out)
        {
            if constexpr (std::is_floating_point_v<T>)
            {
                try
                {
                    std::size_t pos = 0;
                    out = static_cast<T>(std::stod(s, &pos));
                    return pos == s.size();
                }
                catch (const std::exception &)
                {
                    return false;
                }
            }
            else
            {
                const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
                return r.ec == std::errc() && r.ptr == s.data() + s.size();
            }
        }

        inline bool parse_bool(const std::string &s, bool &out)
        {
            if (s == "true" || s == "1" || s == "on" || s == "yes")
            {
                out = true;
                return true;
            }
            if (s == "false" || s == "0" || s == "off" || s == "no")
            {
                out = false;
                return true;
            }
            return false;
        }

        inline std::string show(double v)
        {
            std::ostringstream os;
            os << std::setprecision(10) << v;
            return os.str();
        }

        struct KeyEntry
        {
            std::string key;
            std::function<bool(RunConfig &, const std::string &)> set;
            std::function<std::string(const RunConfig &)> get;
        };

        template <class T, class F>
        KeyEntry number_key(std::string key, F field)
        {
            return KeyEntry{
                std::move(key),
                [field](RunConfig &c, const std::string &v) {
                    T x{};
                    if (!parse_number(v, x))
                    {
                        return false;
                    }
                    field(c) = x;
                    return true;
                },
                [field](const RunConfig &c) {
                    if constexpr (std::is_floating_point_v<T>)
                    {
                        return show(static_cast<double>(field(c)));
                    }
                    else
                    {
                        return std::to_string(field(c));
                    }
                }};
        }

        template <class F>
        KeyEntry optional_key(std::string key, F field, std::function<double(const Hyperparameters &)> resolved)
        {
            return KeyEntry{std::move(key),
                            [field](RunConfig &c, const std::string &v) {
                                double x = 0.0;
                                if (!parse_number(v, x))
                                {
                                    return false;
                                }
                                field(c) = x;
                                return true;
                            },
                            [resolved](const RunConfig &c) { return show(resolved(c.hyperparameters())); }};
        }

        template <class F>
        KeyEntry bool_key(std::string key, F field)
        {
            return KeyEntry{std::move(key),
                            [field](RunConfig &c, const std::string &v) { return parse_bool(v, field(c)); },
                            [field](const RunConfig &c) {
                                return std::string(field(c) ? "true" : "false");
                            }};
        }

        inline std::vector<KeyEntry> key_table()
        {
            std::vector<KeyEntry> t;
            t.push_back({"scenario.name",
                         [](RunConfig &c, const std::string &v) {
                             c.scenario = v;
                             return true;
                         },
                         [](const RunConfig &c) { return c.scenario; }});
            t.push_back({"scenario.bonding",
                         [](RunConfig &c, const std::string &v) {
                             if (v == "scb" || v == "dcb")
                             {
                                 c.bonding = v == "scb" ? Bonding::scb : Bonding::dcb;
                                 return true;
                             }
                             return false;
                         },
                         [](const RunConfig &c) { return std::string(to_string(c.bonding)); }});
            t.push_back(number_key<double>("scenario.duration_s", [](auto &c) -> auto & { return c.duration_s; }));
            t.push_back(number_key<double>("scenario.interval_s", [](auto &c) -> auto & { return c.interval_s; }));
            t.push_back(number_key<std::size_t>("scenario.trials", [](auto &c) -> auto & { return c.trials; }));
            t.push_back(number_key<std::size_t>("scenario.learners", [](auto &c) -> auto & { return c.learners; }));
            t.push_back(number_key<double>("scenario.low_load_min", [](auto &c) -> auto & { return c.loads.low_min; }));
            t.push_back(number_key<double>("scenario.low_load_max", [](auto &c) -> auto & { return c.loads.low_max; }));
            t.push_back(number_key<double>("scenario.high_load_min", [](auto &c) -> auto & { return c.loads.high_min; }));
            t.push_back(number_key<double>("scenario.high_load_max", [](auto &c) -> auto & { return c.loads.high_max; }));
            for (std::size_t k = 0; k < 4; ++k)
            {
                const std::string base = "scenario.legacy." + std::to_string(k + 1);
                t.push_back(number_key<int>(base + ".alloc", [k](auto &c) -> auto & { return c.legacy.at(k).first; }));
                t.push_back(number_key<int>(base + ".primary", [k](auto &c) -> auto & { return c.legacy.at(k).second; }));
            }

            t.push_back({"run.algorithm",
                         [](RunConfig &c, const std::string &v) {
                             const auto a = parse_algorithm(v);
                             if (a)
                             {
                                 c.algorithm = *a;
                             }
                             return a.has_value();
                         },
                         [](const RunConfig &c) { return std::string(to_string(c.algorithm)); }});
            t.push_back({"run.architecture",
                         [](RunConfig &c, const std::string &v) {
                             const auto a = parse_architecture(v);
                             if (a)
                             {
                                 c.architecture = *a;
                             }
                             return a.has_value();
                         },
                         [](const RunConfig &c) { return std::string(to_string(c.architecture)); }});
            t.push_back(number_key<std::uint64_t>("run.seed", [](auto &c) -> auto & { return c.base_seed; }));
            t.push_back(number_key<std::size_t>("run.jobs", [](auto &c) -> auto & { return c.jobs; }));

            t.push_back(number_key<Time>("phy.slot_us", [](auto &c) -> auto & { return c.phy.slot_us; }));
            t.push_back(number_key<Time>("phy.sifs_us", [](auto &c) -> auto & { return c.phy.sifs_us; }));
            t.push_back(number_key<Time>("phy.rts_us", [](auto &c) -> auto & { return c.phy.rts_us; }));
            t.push_back(number_key<Time>("phy.cts_us", [](auto &c) -> auto & { return c.phy.cts_us; }));
            t.push_back(number_key<Time>("phy.back_us", [](auto &c) -> auto & { return c.phy.back_us; }));
            t.push_back(number_key<Time>("phy.preamble_us", [](auto &c) -> auto & { return c.phy.preamble_us; }));
            t.push_back(number_key<double>("phy.rate20_mbps", [](auto &c) -> auto & { return c.phy.rate20_mbps; }));
            t.push_back(number_key<double>("phy.rate40_mbps", [](auto &c) -> auto & { return c.phy.rate40_mbps; }));
            t.push_back(number_key<double>("phy.rate80_mbps", [](auto &c) -> auto & { return c.phy.rate80_mbps; }));

            t.push_back(number_key<double>("mac.per", [](auto &c) -> auto & { return c.mac.per; }));
            t.push_back(number_key<int>("mac.msdu_bytes", [](auto &c) -> auto & { return c.mac.msdu_bytes; }));
            t.push_back(number_key<int>("mac.ampdu_max_bytes", [](auto &c) -> auto & { return c.mac.ampdu_max_bytes; }));
            t.push_back(number_key<std::size_t>("mac.queue_capacity",
                                                [](auto &c) -> auto & { return c.mac.queue_capacity; }));
            t.push_back(number_key<int>("mac.retry_limit", [](auto &c) -> auto & { return c.mac.retry_limit; }));
            t.push_back(number_key<int>("mac.cw_min", [](auto &c) -> auto & { return c.mac.cw_min; }));
            t.push_back(number_key<int>("mac.cw_max", [](auto &c) -> auto & { return c.mac.cw_max; }));
            t.push_back(number_key<Time>("mac.d_max_us", [](auto &c) -> auto & { return c.mac.d_max; }));
            t.push_back(bool_key("mac.rts_cts", [](auto &c) -> auto & { return c.mac.rts_cts; }));
            t.push_back(number_key<double>("medium.window_ms", [](auto &c) -> auto & { return c.window_ms; }));

            t.push_back(optional_key("ucb.alpha", [](auto &c) -> auto & { return c.ucb_alpha; },
                                     [](const Hyperparameters &h) { return h.ucb_alpha; }));
            t.push_back(optional_key("linucb.alpha",
                                     [](auto &c) -> auto & { return c.linucb_alpha; },
                                     [](const Hyperparameters &h) { return h.linucb_alpha; }));
            t.push_back(optional_key("erlb.epsilon",
                                     [](auto &c) -> auto & { return c.erlb_epsilon; },
                                     [](const Hyperparameters &h) { return h.erlb.epsilon; }));
            t.push_back(optional_key("erlb.eta", [](auto &c) -> auto & { return c.erlb_eta; },
                                     [](const Hyperparameters &h) { return h.erlb.eta; }));
            t.push_back(optional_key("erlb.gamma", [](auto &c) -> auto & { return c.erlb_gamma; },
                                     [](const Hyperparameters &h) { return h.erlb.gamma; }));
            t.push_back(optional_key("erlb.alpha_ema",
                                     [](auto &c) -> auto & { return c.erlb_alpha_ema; },
                                     [](const Hyperparameters &h) { return h.erlb.alpha_ema; }));
            t.push_back(optional_key("erlb.eps_num",
                                     [](auto &c) -> auto & { return c.erlb_eps_num; },
                                     [](const Hyperparameters &h) { return h.erlb.eps_num; }));
            t.push_back(optional_key("osub.p", [](auto &c) -> auto & { return c.osub_p; },
                                     [](const Hyperparameters &h) { return h.osub_p; }));
            t.push_back(number_key<double>("osub.kl_c", [](auto &c) -> auto & { return c.kl_c; }));

            t.push_back({"output.dir",
                         [](RunConfig &c, const std::string &v) {
                             c.output_dir = v;
                             return true;
                         },
                         [](const RunConfig &c) { return c.output_dir; }});
            t.push_back(bool_key("output.plots", [](auto &c) -> auto & { return c.plots; }));
            t.push_back(bool_key("output.contexts", [](auto &c) -> auto & { return c.contexts; }));
            return t;
        }
    } // namespace detail

    /// Applies one key; returns a violation message or nullopt.
    inline std::optional<std::string> apply_key(RunConfig &cfg, const std::string &key, const std::string &value)
    {
        static const std::vector<detail::KeyEntry> table = detail::key_table();
        for (const auto &e : table)
        {
            if (e.key == key)
            {
                if (!e.set(cfg, value))
                {
                    return "invalid value for " + key + ": '" + value + "'";
                }
                return std::nullopt;
            }
        }
        return "unknown key: " + key;
    }

    /// Parses key = value text into cfg; problems go to report.violations.
    inline void parse_config(std::istream &in, RunConfig &cfg, ValidationReport &report, const std::string &origin = "config")
    {
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            const auto hash = line.find('#');
            const std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
            if (body.empty())
            {
                continue;
            }
            const auto eq = body.find('=');
            if (eq == std::string::npos)
            {
                report.violations.push_back(origin + ":" + std::to_string(lineno) + ": expected key = value");
                continue;
            }
            const std::string key = detail::trim(body.substr(0, eq));
            const std::string value = detail::trim(body.substr(eq + 1));
            if (auto err = apply_key(cfg, key, value))
            {
                report.violations.push_back(origin + ":" + std::to_string(lineno) + ": " + *err);
            }
        }
    }

    inline void load_config_file(const std::string &path, RunConfig &cfg, ValidationReport &report)
    {
        std::ifstream f(path);
        if (!f)
        {
            report.violations.push_back("cannot read config file " + path);
            return;
        }
        parse_config(f, cfg, report, path);
    }

    inline bool valid_scenario_name(const std::string &s)
    {
        static const char *synth[] = {"synth:bernoulli-k", "synth:unimodal-chain", "synth:linear-context",
                                      "synth:piecewise-linear-context"};
        if (s == "sp" || s == "mp")
        {
            return true;
        }
        return std::any_of(std::begin(synth), std::end(synth), [&](const char *k) { return s == k; });
    }

    /// Semantic checks on a parsed config.
    inline void check_config(const RunConfig &c, ValidationReport &r)
    {
        auto bad = [&](std::string m) { r.violations.push_back(std::move(m)); };
        if (!valid_scenario_name(c.scenario))
        {
            bad("scenario.name: unknown scenario '" + c.scenario + "'");
        }
        if (c.trials == 0)
        {
            bad("scenario.trials: must be at least 1");
        }
        if (!(c.duration_s > 0.0) || !(c.interval_s > 0.0))
        {
            bad("scenario.duration_s / scenario.interval_s: must be positive");
        }
        if (c.learners == 0 || c.learners > 3)
        {
            bad("scenario.learners: must be 1..3");
        }
        for (double v : {c.loads.low_min, c.loads.low_max, c.loads.high_min, c.loads.high_max})
        {
            if (v < 0.0 || v > 1.0)
            {
                bad("scenario load ranges must lie in [0,1]");
                break;
            }
        }
        if (c.loads.low_min > c.loads.low_max || c.loads.high_min > c.loads.high_max)
        {
            bad("scenario load ranges: min exceeds max");
        }
        for (std::size_t k = 0; k < c.legacy.size(); ++k)
        {
            const auto [alloc, primary] = c.legacy[k];
            const std::string base = "scenario.legacy." + std::to_string(k + 1);
            if (alloc < 1 || alloc > 7)
            {
                bad(base + ".alloc: no allocation #" + std::to_string(alloc));
                continue;
            }
            if (!allocation(alloc).channels.contains(primary))
            {
                bad(base + ".primary: channel " + std::to_string(primary) + " not in allocation #" +
                    std::to_string(alloc));
            }
            if (allocation(alloc).width_mhz() != 20)
            {
                bad(base + ".alloc: legacy BSSs operate on a single 20 MHz channel");
            }
        }
        if (!cw_index(c.mac.cw_min))
        {
            bad("mac.cw_min: " + std::to_string(c.mac.cw_min) + " is not in the CW ladder 16..1024");
        }
        if (!cw_index(c.mac.cw_max))
        {
            bad("mac.cw_max: " + std::to_string(c.mac.cw_max) + " is not in the CW ladder 16..1024");
        }
        if (c.mac.cw_min > c.mac.cw_max)
        {
            bad("mac.cw_min exceeds mac.cw_max");
        }
        if (c.mac.per < 0.0 || c.mac.per >= 1.0)
        {
            bad("mac.per: must lie in [0,1)");
        }
        if (c.mac.msdu_bytes <= 0 || c.mac.ampdu_max_bytes < c.mac.msdu_bytes)
        {
            bad("mac.msdu_bytes / mac.ampdu_max_bytes: need 0 < msdu <= ampdu_max");
        }
        if (c.mac.queue_capacity == 0)
        {
            bad("mac.queue_capacity: must be positive");
        }
        if (c.mac.d_max <= 0)
        {
            bad("mac.d_max_us: must be positive");
        }
        if (!(c.window_ms > 0.0))
        {
            bad("medium.window_ms: must be positive");
        }
        try
        {
            c.phy.validate();
        }
        catch (const ConfigError &e)
        {
            bad(std::string("phy: ") + e.what());
        }

        const Hyperparameters h = c.hyperparameters();
        auto range = [&](const char *key, double v, double lo, double hi) {
            if (v < lo || v > hi)
            {
                r.warnings.push_back(std::string(key) + " = " + detail::show(v) + " outside tuning range [" +
                                     detail::show(lo) + ", " + detail::show(hi) + "]");
            }
        };
        range("ucb.alpha", h.ucb_alpha, 1.0, 10.0);
        range("linucb.alpha", h.linucb_alpha, 0.2, 20.0);
        range("erlb.epsilon", h.erlb.epsilon, 0.01, 0.30);
        range("erlb.eta", h.erlb.eta, 1e-4, 1e-1);
        range("erlb.gamma", h.erlb.gamma, 0.70, 0.99);
        range("erlb.alpha_ema", h.erlb.alpha_ema, 0.01, 0.30);
        if (h.osub_p < 0.0 || h.osub_p > 1.0)
        {
            bad("osub.p: must lie in [0,1]");
        }
        if (h.erlb.eps_num <= 0.0)
        {
            bad("erlb.eps_num: must be positive");
        }
    }

    /// Every key with its effective value, one "key = value" line each.
    inline std::string resolved_config(const RunConfig &c)
    {
        std::ostringstream os;
        for (const auto &e : detail::key_table())
        {
            os << e.key << " = " << e.get(c) << '\n';
        }
        return os.str();
    }

} // namespace bms
