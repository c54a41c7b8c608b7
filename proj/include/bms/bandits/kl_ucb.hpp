#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace bms
{
    /// Bernoulli KL divergence d(p, q), with the p in {0, 1} closed forms.
    inline double kl_bernoulli(double p, double q)
    {
        constexpr double inf = std::numeric_limits<double>::infinity();
        if (p <= 0.0)
        {
            return q >= 1.0 ? inf : -std::log1p(-q);
        }
        if (p >= 1.0)
        {
            return q <= 0.0 ? inf : -std::log(q);
        }
        if (q <= 0.0 || q >= 1.0)
        {
            return inf;
        }
        return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    }

    /// Exploration budget f(t) = ln t + c ln ln t (c = 0 gives ln t).
    inline double kl_ucb_budget(std::size_t round, double c = 0.0)
    {
        if (round <= 1)
        {
            return 0.0;
        }
        const double lt = std::log(static_cast<double>(round));
        return c != 0.0 && lt > 1.0 ? lt + c * std::log(lt) : lt;
    }

    /// max { q in [mean, 1] : pulls * d(mean, q) <= budget }, by bisection.
    inline double kl_ucb_index(double mean, std::size_t pulls, double budget, double tol = 1e-9)
    {
        mean = std::clamp(mean, 0.0, 1.0);
        if (budget <= 0.0)
        {
            return mean;
        }
        if (mean >= 1.0)
        {
            return 1.0;
        }
        const double n = static_cast<double>(pulls);
        double lo = mean;
        double hi = 1.0;
        while (hi - lo > tol)
        {
            const double mid = 0.5 * (lo + hi);
            if (n * kl_bernoulli(mean, mid) <= budget)
            {
                lo = mid;
            }
            else
            {
                hi = mid;
            }
        }
        return lo;
    }

} // namespace bms
