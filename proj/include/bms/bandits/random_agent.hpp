#pragma once

#include "bms/bandits/agent.hpp"
#include "bms/engine.hpp"

namespace bms
{
    /// Uniform-random baseline.
    class RandomAgent final : public Agent
    {
    public:
        RandomAgent(std::size_t arms, RandomStream rng) : Agent(arms), rng_(std::move(rng)) {}

        [[nodiscard]] std::string_view name() const override { return "random"; }
        [[nodiscard]] bool last_explored() const override { return true; }

    protected:
        std::size_t do_select(std::span<const double>, std::span<const std::size_t> allowed) override
        {
            return allowed[rng_.uniform_int(allowed.size())];
        }

        void do_update(std::size_t, std::span<const double>, double) override {}

    private:
        RandomStream rng_;
    };

} // namespace bms
