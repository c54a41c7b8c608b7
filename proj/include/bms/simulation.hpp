#pragma once

// Builds one trial from a RunConfig, runs it to the end of the scenario and
// returns its record. Trial k uses seed base_seed + k; trials share nothing.

#include "bms/config.hpp"
#include "bms/harness.hpp"
#include "bms/mac.hpp"
#include "bms/medium.hpp"
#include "bms/metrics.hpp"
#include "bms/scenarios.hpp"

#include <atomic>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace bms
{
    inline ScenarioSpec build_scenario(const RunConfig &cfg, std::uint64_t seed)
    {
        if (cfg.scenario == "sp")
        {
            return sp_preset(seed, cfg.scenario_options());
        }
        if (cfg.scenario == "mp")
        {
            return mp_preset(cfg.scenario_options());
        }
        throw ConfigError("scenario '" + cfg.scenario + "' is not a network scenario");
    }

    inline TrialRecord run_trial(const RunConfig &cfg, std::size_t trial)
    {
        const std::uint64_t seed = cfg.trial_seed(trial);
        const ScenarioSpec spec = build_scenario(cfg, seed);
        const Hyperparameters hyper = cfg.hyperparameters();
        cfg.phy.validate();

        TrialRecord rec;
        rec.trial = trial;
        rec.seed = seed;
        rec.scenario = spec.name;
        rec.algorithm = std::string(to_string(cfg.algorithm));
        rec.architecture = std::string(to_string(cfg.architecture));
        rec.bonding = spec.bonding;
        rec.duration = spec.duration;
        rec.interval = spec.interval;
        rec.optimal_allocation = spec.optimal_allocation;
        rec.bss.reserve(spec.bss.size());
        for (const auto &b : spec.bss)
        {
            rec.bss.emplace_back(b.id, b.role, spec.interval, spec.duration);
        }
        auto stats_of = [&rec](NodeId id) -> BssStats & { return rec.bss[id]; };

        Scheduler sched;
        Medium medium(sched, static_cast<Time>(cfg.window_ms * kMillisecond + 0.5));
        Harness harness(medium, cfg.mac);
        harness.set_round_sink([&](const RoundRecord &r) {
            RoundRow row;
            row.trial = trial;
            row.time_us = r.cycle.start;
            row.bss = r.bss;
            row.alloc = r.cycle.action.channel.id;
            row.primary = r.cycle.action.primary;
            row.cw = r.cycle.action.cw;
            row.d_ms = r.duration_ms;
            row.reward = r.reward;
            row.cause = r.cycle.cause;
            row.transmit_set = r.cycle.transmit_set;
            if (cfg.contexts)
            {
                for (const auto &x : r.decision.contexts)
                {
                    row.context.insert(row.context.end(), x.begin(), x.end());
                }
            }
            rec.rows.push_back(std::move(row));
            stats_of(r.bss).on_cycle(r.cycle.start);
        });

        const TrafficSink sink{
            [&](NodeId id, Time now, const Packet &p) { stats_of(id).on_delivered(now, p); },
            [&](NodeId id, Time now, const Packet &) { stats_of(id).on_dropped(now); },
        };
        const double c_ref = reference_capacity(cfg.phy, cfg.mac);

        std::vector<std::unique_ptr<Station>> nodes;
        for (const auto &b : spec.bss)
        {
            if (b.id != nodes.size())
            {
                throw std::logic_error("BSS ids must be dense and ordered");
            }
            medium.add_observer(b.id);
            if (b.role == Role::legacy)
            {
                auto node = std::make_unique<LegacyNode>(b.id, b.primary, sched, medium, cfg.phy, cfg.mac, seed, sink);
                if (b.traffic.kind == TrafficModel::Kind::full_buffer)
                {
                    node->set_full_buffer(true);
                }
                else
                {
                    node->set_arrivals(std::make_unique<PoissonArrivals>(
                        arrival_rates(b.traffic, c_ref), spec.interval, spec.duration,
                        RandomStream(seed, "traffic:" + std::to_string(b.id))));
                }
                nodes.push_back(std::move(node));
            }
            else
            {
                auto node = std::make_unique<LearnerNode>(b.id, spec.bonding, sched, medium, cfg.phy, cfg.mac, seed,
                                                          sink, harness);
                node->set_full_buffer(true);
                harness.bind(b.id, node->queue(),
                             std::make_unique<AgentBinding>(cfg.architecture, cfg.algorithm, hyper, seed, b.id));
                nodes.push_back(std::move(node));
            }
        }
        for (auto &n : nodes)
        {
            n->start();
        }
        sched.run_until(spec.duration);
        return rec;
    }

    /// Runs every trial of cfg; results are ordered by trial index whatever `jobs` is.
    inline std::vector<TrialRecord> run_trials(const RunConfig &cfg, std::size_t jobs = 1)
    {
        std::vector<TrialRecord> out(cfg.trials);
        jobs = std::max<std::size_t>(1, std::min(jobs, cfg.trials));
        if (jobs == 1)
        {
            for (std::size_t k = 0; k < cfg.trials; ++k)
            {
                out[k] = run_trial(cfg, k);
            }
            return out;
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> workers;
        for (std::size_t w = 0; w < jobs; ++w)
        {
            workers.emplace_back([&]() {
                for (std::size_t k = next++; k < cfg.trials; k = next++)
                {
                    try
                    {
                        out[k] = run_trial(cfg, k);
                    }
                    catch (...)
                    {
                        const std::lock_guard<std::mutex> lock(error_mutex);
                        error = std::current_exception();
                    }
                }
            });
        }
        for (auto &t : workers)
        {
            t.join();
        }
        if (error)
        {
            std::rethrow_exception(error);
        }
        return out;
    }

} // namespace bms
