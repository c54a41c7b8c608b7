#pragma once

#include "bms/bandits/agent.hpp"
#include "bms/engine.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace bms
{
    struct ErlbParams
    {
        double epsilon = 0.020;
        double eta = 0.086;
        double gamma = 0.87;
        double alpha_ema = 0.22;
        double eps_num = 1e-8;
    };

    /// Epsilon-greedy disjoint linear bandit with per-arm RMSProp weight updates
    /// and greedy selection on an exponential moving average of the weights.
    class Erlb final : public Agent
    {
    public:
        struct ArmModel
        {
            std::vector<double> theta;
            std::vector<double> theta_ema;
            std::vector<double> v;
        };

        Erlb(std::size_t arms, std::size_t dim, ErlbParams params, RandomStream rng)
            : Agent(arms), dim_(dim), params_(params), rng_(std::move(rng)),
              models_(arms, ArmModel{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0),
                                     std::vector<double>(dim, 0.0)})
        {
            if (dim == 0)
            {
                throw std::invalid_argument("E-RLB needs a positive context dimension");
            }
            if (params.epsilon < 0.0 || params.epsilon > 1.0 || !(params.eta > 0.0) || !(params.gamma > 0.0) ||
                params.gamma > 1.0 || params.alpha_ema < 0.0 || params.alpha_ema >= 1.0 || !(params.eps_num > 0.0))
            {
                throw std::invalid_argument("E-RLB hyperparameters out of domain");
            }
        }

        [[nodiscard]] std::string_view name() const override { return "erlb"; }
        [[nodiscard]] std::size_t context_dim() const override { return dim_; }
        [[nodiscard]] bool last_explored() const override { return last_explored_; }
        [[nodiscard]] const ErlbParams &params() const noexcept { return params_; }
        [[nodiscard]] const ArmModel &model(std::size_t arm) const { return models_.at(arm); }

        [[nodiscard]] double estimate(std::size_t arm, std::span<const double> context) const
        {
            const auto &w = models_.at(arm).theta_ema;
            double s = 0.0;
            for (std::size_t i = 0; i < dim_; ++i)
            {
                s += context[i] * w[i];
            }
            return s;
        }

    protected:
        std::size_t do_select(std::span<const double> context, std::span<const std::size_t> allowed) override
        {
            last_explored_ = rng_.uniform01() < params_.epsilon;
            if (last_explored_)
            {
                return allowed[rng_.uniform_int(allowed.size())];
            }
            std::size_t best = allowed.front();
            double best_value = -std::numeric_limits<double>::infinity();
            for (std::size_t a : allowed)
            {
                const double v = estimate(a, context);
                if (v > best_value)
                {
                    best_value = v;
                    best = a;
                }
            }
            return best;
        }

        void do_update(std::size_t arm, std::span<const double> x, double reward) override
        {
            auto &m = models_[arm];
            double prediction = 0.0;
            for (std::size_t i = 0; i < dim_; ++i)
            {
                prediction += x[i] * m.theta[i];
            }
            const double err = prediction - reward;
            for (std::size_t i = 0; i < dim_; ++i)
            {
                const double g = err * x[i];
                m.v[i] = params_.gamma * m.v[i] + (1.0 - params_.gamma) * g * g;
                m.theta[i] -= params_.eta / std::sqrt(m.v[i] + params_.eps_num) * g;
                m.theta_ema[i] = params_.alpha_ema * m.theta_ema[i] + (1.0 - params_.alpha_ema) * m.theta[i];
            }
        }

    private:
        std::size_t dim_;
        ErlbParams params_;
        RandomStream rng_;
        std::vector<ArmModel> models_;
        bool last_explored_ = false;
    };

} // namespace bms
