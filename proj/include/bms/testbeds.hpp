#pragma once

// Synthetic bandit environments for checking the agents away from the network
// simulator: Bernoulli arms, a unimodal chain, and (piecewise-)linear contextual
// rewards over contexts drawn uniformly from [0,1]^d.

#include "bms/bandits/agent.hpp"
#include "bms/engine.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bms
{
    enum class EnvKind : std::uint8_t
    {
        bernoulli_k,
        unimodal_chain,
        linear_context,
        piecewise_linear_context,
    };

    inline std::string_view to_string(EnvKind k)
    {
        switch (k)
        {
        case EnvKind::bernoulli_k: return "bernoulli-k";
        case EnvKind::unimodal_chain: return "unimodal-chain";
        case EnvKind::linear_context: return "linear-context";
        case EnvKind::piecewise_linear_context: return "piecewise-linear-context";
        }
        return "?";
    }

    inline std::optional<EnvKind> parse_env_kind(std::string_view s)
    {
        for (EnvKind k : {EnvKind::bernoulli_k, EnvKind::unimodal_chain, EnvKind::linear_context,
                          EnvKind::piecewise_linear_context})
        {
            if (to_string(k) == s)
            {
                return k;
            }
        }
        return std::nullopt;
    }

    class SyntheticEnv
    {
    public:
        using Weights = std::vector<std::vector<double>>; // [arm][feature]

        /// k Bernoulli arms; arm `best` has mean `best_mean`, the rest `rest_mean`.
        static SyntheticEnv bernoulli(std::size_t k = 10, double best_mean = 0.9, double rest_mean = 0.5,
                                      std::size_t best = 7)
        {
            SyntheticEnv e(EnvKind::bernoulli_k);
            e.means_.assign(k, rest_mean);
            e.means_.at(best) = best_mean;
            return e;
        }

        /// Bernoulli arms whose means rise to a single peak along the index order.
        static SyntheticEnv unimodal_chain(std::vector<double> means = {0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70,
                                                                        0.80, 0.70, 0.60})
        {
            SyntheticEnv e(EnvKind::unimodal_chain);
            const auto peak = static_cast<std::size_t>(std::max_element(means.begin(), means.end()) - means.begin());
            for (std::size_t i = 0; i + 1 < means.size(); ++i)
            {
                if ((i < peak && !(means[i] < means[i + 1])) || (i >= peak && !(means[i] > means[i + 1])))
                {
                    throw std::invalid_argument("chain means are not unimodal");
                }
            }
            e.means_ = std::move(means);
            return e;
        }

        /// Reward clip(x . theta_a + u, 0, 1), u ~ U[-noise, noise]. Default
        /// weights: a shared 0.04 on every feature plus 0.55 on feature a.
        static SyntheticEnv linear(std::size_t arms = 4, std::size_t dim = 9, double noise = 0.1)
        {
            SyntheticEnv e(EnvKind::linear_context);
            e.dim_ = dim;
            e.noise_ = noise;
            e.segments_.push_back(default_weights(arms, dim, 0));
            return e;
        }

        /// Linear rewards whose per-arm weights rotate by one arm at each changepoint.
        static SyntheticEnv piecewise_linear(std::vector<std::size_t> changepoints = {5000, 10000, 15000},
                                             std::size_t arms = 4, std::size_t dim = 9, double noise = 0.1)
        {
            SyntheticEnv e(EnvKind::piecewise_linear_context);
            e.dim_ = dim;
            e.noise_ = noise;
            e.changepoints_ = std::move(changepoints);
            if (!std::is_sorted(e.changepoints_.begin(), e.changepoints_.end()))
            {
                throw std::invalid_argument("changepoints must be ascending");
            }
            for (std::size_t s = 0; s <= e.changepoints_.size(); ++s)
            {
                e.segments_.push_back(default_weights(arms, dim, s));
            }
            return e;
        }

        static SyntheticEnv from_kind(EnvKind k)
        {
            switch (k)
            {
            case EnvKind::bernoulli_k: return bernoulli();
            case EnvKind::unimodal_chain: return unimodal_chain();
            case EnvKind::linear_context: return linear();
            case EnvKind::piecewise_linear_context: return piecewise_linear();
            }
            throw std::invalid_argument("unknown environment");
        }

        [[nodiscard]] EnvKind kind() const noexcept { return kind_; }
        [[nodiscard]] bool contextual() const noexcept
        {
            return kind_ == EnvKind::linear_context || kind_ == EnvKind::piecewise_linear_context;
        }
        [[nodiscard]] std::size_t arms() const noexcept { return contextual() ? segments_.front().size() : means_.size(); }
        /// 0 for non-contextual environments.
        [[nodiscard]] std::size_t context_dim() const noexcept { return contextual() ? dim_ : 0; }
        [[nodiscard]] const std::vector<double> &means() const noexcept { return means_; }
        [[nodiscard]] const std::vector<std::size_t> &changepoints() const noexcept { return changepoints_; }

        [[nodiscard]] std::vector<double> draw_context(RandomStream &rng) const
        {
            std::vector<double> x(context_dim());
            for (auto &v : x)
            {
                v = rng.uniform01();
            }
            return x;
        }

        /// Mean reward of `arm` in `round` under context x.
        [[nodiscard]] double expected(std::size_t arm, const std::vector<double> &x, std::size_t round) const
        {
            if (!contextual())
            {
                return means_.at(arm);
            }
            const auto &theta = segments_[segment(round)].at(arm);
            double dot = 0.0;
            for (std::size_t j = 0; j < dim_; ++j)
            {
                dot += theta[j] * x[j];
            }
            return std::clamp(dot, 0.0, 1.0);
        }

        [[nodiscard]] double sample(std::size_t arm, const std::vector<double> &x, std::size_t round,
                                    RandomStream &rng) const
        {
            if (!contextual())
            {
                return rng.bernoulli(means_.at(arm)) ? 1.0 : 0.0;
            }
            const auto &theta = segments_[segment(round)].at(arm);
            double dot = 0.0;
            for (std::size_t j = 0; j < dim_; ++j)
            {
                dot += theta[j] * x[j];
            }
            return std::clamp(dot + rng.uniform(-noise_, noise_), 0.0, 1.0);
        }

        [[nodiscard]] std::size_t best_arm(const std::vector<double> &x, std::size_t round) const
        {
            std::size_t best = 0;
            for (std::size_t a = 1; a < arms(); ++a)
            {
                if (expected(a, x, round) > expected(best, x, round))
                {
                    best = a;
                }
            }
            return best;
        }

    private:
        explicit SyntheticEnv(EnvKind k) : kind_(k) {}

        static Weights default_weights(std::size_t arms, std::size_t dim, std::size_t shift)
        {
            if (arms > dim)
            {
                throw std::invalid_argument("linear environment needs arms <= dim");
            }
            Weights w(arms, std::vector<double>(dim, 0.04));
            for (std::size_t a = 0; a < arms; ++a)
            {
                w[a][(a + shift) % arms] += 0.55;
            }
            return w;
        }

        [[nodiscard]] std::size_t segment(std::size_t round) const
        {
            return static_cast<std::size_t>(std::upper_bound(changepoints_.begin(), changepoints_.end(), round) -
                                            changepoints_.begin());
        }

        EnvKind kind_;
        std::vector<double> means_;
        std::size_t dim_ = 0;
        double noise_ = 0.0;
        std::vector<Weights> segments_;
        std::vector<std::size_t> changepoints_;
    };

    struct PlayResult
    {
        std::vector<double> cumulative_regret; // pseudo-regret after each round
        std::vector<std::uint8_t> optimal;     // 1 when the chosen arm was the best for that round
        std::vector<std::size_t> chosen;

        [[nodiscard]] double regret_at(std::size_t round) const { return cumulative_regret.at(round - 1); }

        /// Fraction of optimal choices over rounds [from, to).
        [[nodiscard]] double optimal_rate(std::size_t from, std::size_t to) const
        {
            to = std::min(to, optimal.size());
            if (from >= to)
            {
                return 0.0;
            }
            std::size_t hits = 0;
            for (std::size_t t = from; t < to; ++t)
            {
                hits += optimal[t];
            }
            return static_cast<double>(hits) / static_cast<double>(to - from);
        }
    };

    /// Runs `agent` for T rounds. Contexts and rewards come from the seed's "env"
    /// stream, so agents compared on one seed see the same contexts.
    inline PlayResult play(const SyntheticEnv &env, Agent &agent, std::size_t T, std::uint64_t seed)
    {
        if (agent.arm_count() != env.arms())
        {
            throw std::invalid_argument("agent has " + std::to_string(agent.arm_count()) + " arms, environment " +
                                        std::to_string(env.arms()));
        }
        RandomStream ctx_rng(seed, "env:context");
        RandomStream reward_rng(seed, "env:reward");
        PlayResult out;
        out.cumulative_regret.reserve(T);
        out.optimal.reserve(T);
        out.chosen.reserve(T);
        double regret = 0.0;
        static const std::vector<double> none;
        for (std::size_t t = 0; t < T; ++t)
        {
            const std::vector<double> x = env.draw_context(ctx_rng);
            const std::vector<double> &agent_x = agent.context_dim() ? x : none;
            const std::size_t a = agent.select(agent_x);
            const std::size_t best = env.best_arm(x, t);
            regret += env.expected(best, x, t) - env.expected(a, x, t);
            out.cumulative_regret.push_back(regret);
            out.optimal.push_back(env.expected(a, x, t) >= env.expected(best, x, t) ? 1 : 0);
            out.chosen.push_back(a);
            agent.update(a, agent_x, env.sample(a, x, t, reward_rng));
        }
        return out;
    }

} // namespace bms
