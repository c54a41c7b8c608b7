#pragma once

#include "bms/bandits/agent.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

namespace bms
{
    /// Disjoint LinUCB. Each arm keeps A = D^T D + I, b = D^T r and the inverse of A,
    /// maintained by Sherman-Morrison rank-one updates.
    class LinUcb final : public Agent
    {
    public:
        struct ArmModel
        {
            Eigen::MatrixXd a;
            Eigen::MatrixXd a_inv;
            Eigen::VectorXd b;
            Eigen::VectorXd theta;
        };

        LinUcb(std::size_t arms, std::size_t dim, double alpha) : Agent(arms), dim_(dim), alpha_(alpha)
        {
            if (dim == 0)
            {
                throw std::invalid_argument("LinUCB needs a positive context dimension");
            }
            models_.reserve(arms);
            for (std::size_t i = 0; i < arms; ++i)
            {
                models_.push_back(ArmModel{Eigen::MatrixXd::Identity(dim, dim), Eigen::MatrixXd::Identity(dim, dim),
                                           Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim)});
            }
        }

        [[nodiscard]] std::string_view name() const override { return "linucb"; }
        [[nodiscard]] std::size_t context_dim() const override { return dim_; }
        [[nodiscard]] double alpha() const noexcept { return alpha_; }
        [[nodiscard]] const ArmModel &model(std::size_t arm) const { return models_.at(arm); }

        [[nodiscard]] double score(std::size_t arm, std::span<const double> context) const
        {
            const Eigen::Map<const Eigen::VectorXd> x(context.data(), static_cast<Eigen::Index>(context.size()));
            const auto &m = models_.at(arm);
            const double width = x.dot(m.a_inv * x);
            return m.theta.dot(x) + alpha_ * std::sqrt(std::max(0.0, width));
        }

    protected:
        std::size_t do_select(std::span<const double> context, std::span<const std::size_t> allowed) override
        {
            std::size_t best = allowed.front();
            double best_score = -std::numeric_limits<double>::infinity();
            for (std::size_t a : allowed)
            {
                const double s = score(a, context);
                if (s > best_score)
                {
                    best_score = s;
                    best = a;
                }
            }
            return best;
        }

        void do_update(std::size_t arm, std::span<const double> context, double reward) override
        {
            const Eigen::Map<const Eigen::VectorXd> x(context.data(), static_cast<Eigen::Index>(context.size()));
            auto &m = models_[arm];
            m.a.noalias() += x * x.transpose();
            m.b += reward * x;
            const Eigen::VectorXd ax = m.a_inv * x;
            const double denom = 1.0 + x.dot(ax);
            m.a_inv.noalias() -= (ax * ax.transpose()) / denom;
            m.theta.noalias() = m.a_inv * m.b;
        }

    private:
        std::size_t dim_;
        double alpha_;
        std::vector<ArmModel> models_;
    };

} // namespace bms
