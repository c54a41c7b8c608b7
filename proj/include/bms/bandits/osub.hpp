#pragma once

#include "bms/actions.hpp"
#include "bms/bandits/agent.hpp"
#include "bms/bandits/kl_ucb.hpp"
#include "bms/bandits/ucb.hpp"
#include "bms/engine.hpp"

#include <limits>
#include <vector>

namespace bms
{
    /// Optimal Sampling for Unimodal Bandits over a neighbor graph, with an
    /// optional uniform exploration probability p (used by factorized agents).
    class Osub final : public Agent
    {
    public:
        Osub(NeighborGraph graph, double explore_p, RandomStream rng, double kl_c = 0.0)
            : Agent(graph.size()), graph_(std::move(graph)), gamma_(graph_.max_degree()), p_(explore_p),
              kl_c_(kl_c), rng_(std::move(rng)), stats_(graph_.size()), leader_count_(graph_.size(), 0)
        {
            if (p_ < 0.0 || p_ > 1.0)
            {
                throw std::invalid_argument("OSUB exploration probability must lie in [0,1]");
            }
        }

        [[nodiscard]] std::string_view name() const override { return "osub"; }
        [[nodiscard]] bool last_explored() const override { return last_explored_; }

        [[nodiscard]] const NeighborGraph &graph() const noexcept { return graph_; }
        [[nodiscard]] std::size_t gamma() const noexcept { return gamma_; }
        [[nodiscard]] const ArmStats &stats() const noexcept { return stats_; }
        [[nodiscard]] std::size_t leader_count(std::size_t arm) const { return leader_count_.at(arm); }
        [[nodiscard]] std::size_t round() const noexcept { return round_; }
        /// Leader of the last non-initialization, non-random round (npos otherwise).
        [[nodiscard]] std::size_t last_leader() const noexcept { return last_leader_; }

        /// Test hook: overwrite the statistics of one arm.
        void set_arm(std::size_t arm, std::size_t pulls, double mean, std::size_t leader_count = 0)
        {
            stats_.pulls.at(arm) = pulls;
            stats_.mean.at(arm) = mean;
            leader_count_.at(arm) = leader_count;
        }

    protected:
        std::size_t do_select(std::span<const double>, std::span<const std::size_t> allowed) override
        {
            ++round_;
            last_explored_ = false;
            last_leader_ = ArmStats::npos;
            if (const std::size_t a = stats_.first_unpulled(allowed); a != ArmStats::npos)
            {
                return a;
            }
            if (p_ > 0.0 && rng_.bernoulli(p_))
            {
                last_explored_ = true;
                return allowed[rng_.uniform_int(allowed.size())];
            }

            const std::size_t leader = stats_.leader(allowed);
            last_leader_ = leader;
            if (++leader_count_[leader] % (gamma_ + 1) == 0)
            {
                return leader;
            }

            const double budget = kl_ucb_budget(round_, kl_c_);
            const auto &nbrs = graph_.neighbors(leader);
            std::size_t best = leader;
            double best_index = -std::numeric_limits<double>::infinity();
            // Candidates in ascending index order: the leader merged into its neighbor list.
            auto consider = [&](std::size_t a) {
                const double idx = kl_ucb_index(stats_.mean[a], stats_.pulls[a], budget);
                if (idx > best_index)
                {
                    best_index = idx;
                    best = a;
                }
            };
            bool leader_done = false;
            for (std::size_t a : nbrs)
            {
                if (!leader_done && leader < a)
                {
                    consider(leader);
                    leader_done = true;
                }
                if (std::binary_search(allowed.begin(), allowed.end(), a))
                {
                    consider(a);
                }
            }
            if (!leader_done)
            {
                consider(leader);
            }
            return best;
        }

        void do_update(std::size_t arm, std::span<const double>, double reward) override { stats_.record(arm, reward); }

    private:
        NeighborGraph graph_;
        std::size_t gamma_;
        double p_;
        double kl_c_;
        RandomStream rng_;
        ArmStats stats_;
        std::vector<std::size_t> leader_count_;
        std::size_t round_ = 0;
        std::size_t last_leader_ = ArmStats::npos;
        bool last_explored_ = false;
    };

} // namespace bms
