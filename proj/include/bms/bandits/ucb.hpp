#pragma once

#include "bms/bandits/agent.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace bms
{
    /// mu + sqrt(alpha ln t / (2 N)).
    inline double ucb_index(double mean, std::size_t pulls, std::size_t round, double alpha)
    {
        return mean + std::sqrt(alpha * std::log(static_cast<double>(round)) / (2.0 * static_cast<double>(pulls)));
    }

    /// Empirical-mean statistics shared by the UCB family.
    struct ArmStats
    {
        std::vector<std::size_t> pulls;
        std::vector<double> mean;

        explicit ArmStats(std::size_t arms) : pulls(arms, 0), mean(arms, 0.0) {}

        void record(std::size_t arm, double reward)
        {
            ++pulls[arm];
            mean[arm] += (reward - mean[arm]) / static_cast<double>(pulls[arm]);
        }

        /// Lowest-index allowed arm with no pulls, or npos.
        [[nodiscard]] std::size_t first_unpulled(std::span<const std::size_t> allowed) const
        {
            for (std::size_t a : allowed)
            {
                if (pulls[a] == 0)
                {
                    return a;
                }
            }
            return npos;
        }

        /// argmax of the empirical mean over `allowed`, lowest index on ties.
        [[nodiscard]] std::size_t leader(std::span<const std::size_t> allowed) const
        {
            std::size_t best = allowed.front();
            for (std::size_t a : allowed)
            {
                if (mean[a] > mean[best])
                {
                    best = a;
                }
            }
            return best;
        }

        static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    };

    class Ucb final : public Agent
    {
    public:
        Ucb(std::size_t arms, double alpha) : Agent(arms), alpha_(alpha), stats_(arms)
        {
            if (!(alpha > 0.0))
            {
                throw std::invalid_argument("UCB alpha must be positive");
            }
        }

        [[nodiscard]] std::string_view name() const override { return "ucb"; }
        [[nodiscard]] std::size_t round() const noexcept { return round_; }
        [[nodiscard]] const ArmStats &stats() const noexcept { return stats_; }
        [[nodiscard]] double alpha() const noexcept { return alpha_; }

    protected:
        std::size_t do_select(std::span<const double>, std::span<const std::size_t> allowed) override
        {
            ++round_;
            if (const std::size_t a = stats_.first_unpulled(allowed); a != ArmStats::npos)
            {
                return a;
            }
            std::size_t best = allowed.front();
            double best_index = -std::numeric_limits<double>::infinity();
            for (std::size_t a : allowed)
            {
                const double idx = ucb_index(stats_.mean[a], stats_.pulls[a], round_, alpha_);
                if (idx > best_index)
                {
                    best_index = idx;
                    best = a;
                }
            }
            return best;
        }

        void do_update(std::size_t arm, std::span<const double>, double reward) override { stats_.record(arm, reward); }

    private:
        double alpha_;
        ArmStats stats_;
        std::size_t round_ = 0;
    };

} // namespace bms
