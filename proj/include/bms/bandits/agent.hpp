#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bms
{
    class SelectionError : public std::logic_error
    {
    public:
        using std::logic_error::logic_error;
    };

    /// Common select/update surface for every bandit. Context is ignored by the
    /// non-contextual algorithms. `allowed` lists permitted arm indices; it is
    /// scanned in ascending order so ties resolve to the lowest index.
    class Agent
    {
    public:
        explicit Agent(std::size_t arms) : arms_(arms)
        {
            if (arms == 0)
            {
                throw std::invalid_argument("agent needs at least one arm");
            }
        }
        virtual ~Agent() = default;

        Agent(const Agent &) = delete;
        Agent &operator=(const Agent &) = delete;

        [[nodiscard]] std::size_t arm_count() const noexcept { return arms_; }
        [[nodiscard]] virtual std::string_view name() const = 0;
        /// Required context width; 0 for non-contextual agents.
        [[nodiscard]] virtual std::size_t context_dim() const { return 0; }
        /// Whether the last select() took a random exploratory branch.
        [[nodiscard]] virtual bool last_explored() const { return false; }

        std::size_t select(std::span<const double> context, std::span<const std::size_t> allowed)
        {
            if (allowed.empty())
            {
                throw SelectionError(std::string(name()) + ": empty allowed-arm set");
            }
            check_context(context);
            if (std::is_sorted(allowed.begin(), allowed.end()))
            {
                check_arms(allowed);
                return do_select(context, allowed);
            }
            std::vector<std::size_t> sorted(allowed.begin(), allowed.end());
            std::sort(sorted.begin(), sorted.end());
            check_arms(sorted);
            return do_select(context, sorted);
        }

        std::size_t select(std::span<const double> context = {})
        {
            if (all_.empty())
            {
                all_.resize(arms_);
                std::iota(all_.begin(), all_.end(), std::size_t{0});
            }
            return select(context, all_);
        }

        void update(std::size_t arm, std::span<const double> context, double reward)
        {
            if (arm >= arms_)
            {
                throw std::out_of_range(std::string(name()) + ": arm index out of range");
            }
            if (!(reward >= 0.0 && reward <= 1.0))
            {
                throw std::domain_error(std::string(name()) + ": reward outside [0,1]");
            }
            check_context(context);
            do_update(arm, context, reward);
        }

    protected:
        virtual std::size_t do_select(std::span<const double> context, std::span<const std::size_t> allowed) = 0;
        virtual void do_update(std::size_t arm, std::span<const double> context, double reward) = 0;

    private:
        void check_context(std::span<const double> context) const
        {
            const std::size_t d = context_dim();
            if (d != 0 && context.size() != d)
            {
                throw std::invalid_argument(std::string(name()) + ": context dimension " +
                                            std::to_string(context.size()) + " != " + std::to_string(d));
            }
        }

        void check_arms(std::span<const std::size_t> allowed) const
        {
            if (allowed.back() >= arms_)
            {
                throw std::out_of_range(std::string(name()) + ": allowed arm out of range");
            }
        }

        std::size_t arms_;
        std::vector<std::size_t> all_;
    };

} // namespace bms
