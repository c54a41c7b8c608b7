#pragma once

// Action spaces for learning channel access: the seven contiguous channel
// allocations over four 20 MHz basic channels, the CW ladder, the 84-arm joint
// space, the factorized per-parameter spaces and the OSUB neighbor graphs.

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace bms
{
    inline constexpr int kBasicChannels = 4;

    /// Subset of the basic channels {1,2,3,4}, stored as a bitmask (bit c-1).
    class ChannelSet
    {
    public:
        constexpr ChannelSet() = default;
        constexpr ChannelSet(std::initializer_list<int> channels)
        {
            for (int c : channels)
            {
                insert(c);
            }
        }

        static constexpr ChannelSet from_mask(std::uint8_t mask)
        {
            ChannelSet s;
            s.mask_ = static_cast<std::uint8_t>(mask & 0x0f);
            return s;
        }

        static constexpr ChannelSet all() { return from_mask(0x0f); }

        constexpr void insert(int c)
        {
            check(c);
            mask_ = static_cast<std::uint8_t>(mask_ | (1u << (c - 1)));
        }

        constexpr void erase(int c)
        {
            check(c);
            mask_ = static_cast<std::uint8_t>(mask_ & ~(1u << (c - 1)));
        }

        [[nodiscard]] constexpr bool contains(int c) const { return c >= 1 && c <= kBasicChannels && (mask_ >> (c - 1)) & 1u; }
        [[nodiscard]] constexpr int size() const { return std::popcount(static_cast<unsigned>(mask_)); }
        [[nodiscard]] constexpr bool empty() const { return mask_ == 0; }
        [[nodiscard]] constexpr std::uint8_t mask() const { return mask_; }

        [[nodiscard]] constexpr bool intersects(ChannelSet o) const { return (mask_ & o.mask_) != 0; }
        [[nodiscard]] constexpr bool subset_of(ChannelSet o) const { return (mask_ & ~o.mask_) == 0; }
        [[nodiscard]] constexpr ChannelSet operator&(ChannelSet o) const { return from_mask(mask_ & o.mask_); }
        [[nodiscard]] constexpr ChannelSet operator|(ChannelSet o) const { return from_mask(mask_ | o.mask_); }
        constexpr bool operator==(const ChannelSet &) const = default;

        [[nodiscard]] std::vector<int> channels() const
        {
            std::vector<int> out;
            for (int c = 1; c <= kBasicChannels; ++c)
            {
                if (contains(c))
                {
                    out.push_back(c);
                }
            }
            return out;
        }

        [[nodiscard]] std::string to_string() const
        {
            std::string s = "{";
            bool first = true;
            for (int c : channels())
            {
                if (!first)
                {
                    s += ",";
                }
                s += std::to_string(c);
                first = false;
            }
            return s + "}";
        }

    private:
        static constexpr void check(int c)
        {
            if (c < 1 || c > kBasicChannels)
            {
                throw std::out_of_range("basic channel out of range: " + std::to_string(c));
            }
        }

        std::uint8_t mask_ = 0;
    };

    /// One of the seven valid contiguous allocations, labelled #1..#7.
    struct ChannelAllocation
    {
        int id = 1;
        ChannelSet channels;

        [[nodiscard]] int width_mhz() const { return 20 * channels.size(); }
        [[nodiscard]] std::string label() const { return "#" + std::to_string(id); }
        bool operator==(const ChannelAllocation &) const = default;
    };

    inline const std::array<ChannelAllocation, 7> &allocations()
    {
        static const std::array<ChannelAllocation, 7> table{{
            {1, {1}},
            {2, {2}},
            {3, {3}},
            {4, {4}},
            {5, {1, 2}},
            {6, {3, 4}},
            {7, {1, 2, 3, 4}},
        }};
        return table;
    }

    inline const ChannelAllocation &allocation(int id)
    {
        if (id < 1 || id > 7)
        {
            throw std::out_of_range("allocation id out of range: " + std::to_string(id));
        }
        return allocations()[static_cast<std::size_t>(id - 1)];
    }

    inline std::optional<ChannelAllocation> allocation_for(ChannelSet channels)
    {
        for (const auto &a : allocations())
        {
            if (a.channels == channels)
            {
                return a;
            }
        }
        return std::nullopt;
    }

    /// The seven CW values 2^(i+4), i = 0..6.
    inline constexpr std::array<int, 7> kCwLadder{16, 32, 64, 128, 256, 512, 1024};

    inline std::optional<std::size_t> cw_index(int cw)
    {
        const auto it = std::find(kCwLadder.begin(), kCwLadder.end(), cw);
        if (it == kCwLadder.end())
        {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - kCwLadder.begin());
    }

    struct ActionTriple
    {
        ChannelAllocation channel;
        int primary = 1;
        int cw = 16;

        [[nodiscard]] bool valid() const { return channel.channels.contains(primary) && cw_index(cw).has_value(); }

        /// "#5" or, with the primary subscript, "#5_1".
        [[nodiscard]] std::string label(bool with_primary) const
        {
            return with_primary ? channel.label() + "_" + std::to_string(primary) : channel.label();
        }

        bool operator==(const ActionTriple &) const = default;
    };

    /// Primaries permitted by an allocation: its own basic channels.
    inline ChannelSet mask_primary(const ChannelAllocation &alloc) { return alloc.channels; }

    enum class SpaceKind : std::uint8_t
    {
        joint,
        channel_agent,
        primary_agent,
        cw_agent,
    };

    /// Ordered arm list for one agent. Arm index order drives UCB initialization.
    struct ActionSpace
    {
        SpaceKind kind = SpaceKind::joint;
        std::vector<ActionTriple> joint_arms;        // joint
        std::vector<ChannelAllocation> channel_arms; // channel_agent
        std::vector<int> primary_arms;               // primary_agent: basic channel numbers
        std::vector<int> cw_arms;                    // cw_agent

        [[nodiscard]] std::size_t size() const
        {
            switch (kind)
            {
            case SpaceKind::joint: return joint_arms.size();
            case SpaceKind::channel_agent: return channel_arms.size();
            case SpaceKind::primary_agent: return primary_arms.size();
            case SpaceKind::cw_agent: return cw_arms.size();
            }
            return 0;
        }
    };

    /// 84 triples in lexicographic (allocation id, primary, cw index) order.
    inline ActionSpace enumerate_joint()
    {
        ActionSpace space;
        space.kind = SpaceKind::joint;
        for (const auto &alloc : allocations())
        {
            for (int p : alloc.channels.channels())
            {
                for (int cw : kCwLadder)
                {
                    space.joint_arms.push_back(ActionTriple{alloc, p, cw});
                }
            }
        }
        return space;
    }

    inline std::size_t joint_index(const ActionTriple &triple)
    {
        static const ActionSpace space = enumerate_joint();
        const auto it = std::find(space.joint_arms.begin(), space.joint_arms.end(), triple);
        if (it == space.joint_arms.end())
        {
            throw std::invalid_argument("triple is not a valid joint action");
        }
        return static_cast<std::size_t>(it - space.joint_arms.begin());
    }

    inline ActionSpace enumerate_channel_agent()
    {
        ActionSpace s;
        s.kind = SpaceKind::channel_agent;
        s.channel_arms.assign(allocations().begin(), allocations().end());
        return s;
    }

    inline ActionSpace enumerate_primary_agent()
    {
        ActionSpace s;
        s.kind = SpaceKind::primary_agent;
        s.primary_arms = {1, 2, 3, 4};
        return s;
    }

    inline ActionSpace enumerate_cw_agent()
    {
        ActionSpace s;
        s.kind = SpaceKind::cw_agent;
        s.cw_arms.assign(kCwLadder.begin(), kCwLadder.end());
        return s;
    }

    /// Undirected graph over arm indices, stored as sorted adjacency lists.
    class NeighborGraph
    {
    public:
        NeighborGraph() = default;
        explicit NeighborGraph(std::size_t vertices) : adjacency_(vertices) {}

        void add_edge(std::size_t u, std::size_t v)
        {
            if (u == v)
            {
                return;
            }
            insert_sorted(adjacency_.at(u), v);
            insert_sorted(adjacency_.at(v), u);
        }

        [[nodiscard]] std::size_t size() const noexcept { return adjacency_.size(); }
        [[nodiscard]] const std::vector<std::size_t> &neighbors(std::size_t v) const { return adjacency_.at(v); }

        [[nodiscard]] bool adjacent(std::size_t u, std::size_t v) const
        {
            const auto &n = adjacency_.at(u);
            return std::binary_search(n.begin(), n.end(), v);
        }

        /// Maximum vertex degree (gamma).
        [[nodiscard]] std::size_t max_degree() const
        {
            std::size_t best = 0;
            for (const auto &n : adjacency_)
            {
                best = std::max(best, n.size());
            }
            return best;
        }

        [[nodiscard]] bool connected() const
        {
            if (adjacency_.empty())
            {
                return true;
            }
            std::vector<bool> seen(adjacency_.size(), false);
            std::queue<std::size_t> frontier;
            frontier.push(0);
            seen[0] = true;
            std::size_t reached = 1;
            while (!frontier.empty())
            {
                const std::size_t u = frontier.front();
                frontier.pop();
                for (std::size_t v : adjacency_[u])
                {
                    if (!seen[v])
                    {
                        seen[v] = true;
                        ++reached;
                        frontier.push(v);
                    }
                }
            }
            return reached == adjacency_.size();
        }

        [[nodiscard]] bool symmetric() const
        {
            for (std::size_t u = 0; u < adjacency_.size(); ++u)
            {
                for (std::size_t v : adjacency_[u])
                {
                    if (!adjacent(v, u))
                    {
                        return false;
                    }
                }
            }
            return true;
        }

    private:
        static void insert_sorted(std::vector<std::size_t> &list, std::size_t v)
        {
            const auto it = std::lower_bound(list.begin(), list.end(), v);
            if (it == list.end() || *it != v)
            {
                list.insert(it, v);
            }
        }

        std::vector<std::vector<std::size_t>> adjacency_;
    };

    /// Allocations sharing at least one basic channel with `a`, excluding `a`.
    inline std::vector<ChannelAllocation> channel_neighbors(const ChannelAllocation &a)
    {
        std::vector<ChannelAllocation> out;
        for (const auto &other : allocations())
        {
            if (other.id != a.id && other.channels.intersects(a.channels))
            {
                out.push_back(other);
            }
        }
        return out;
    }

    /// Spectral-overlap graph over the seven allocations (arm i = allocation #i+1).
    inline NeighborGraph channel_graph()
    {
        NeighborGraph g(allocations().size());
        for (const auto &a : allocations())
        {
            for (const auto &b : channel_neighbors(a))
            {
                g.add_edge(static_cast<std::size_t>(a.id - 1), static_cast<std::size_t>(b.id - 1));
            }
        }
        return g;
    }

    /// Chain graph over an ordered arm list of the given length.
    inline NeighborGraph linear_neighbors(std::size_t length)
    {
        NeighborGraph g(length);
        for (std::size_t i = 1; i < length; ++i)
        {
            g.add_edge(i - 1, i);
        }
        return g;
    }

    inline NeighborGraph linear_neighbors(SpaceKind kind)
    {
        switch (kind)
        {
        case SpaceKind::primary_agent: return linear_neighbors(enumerate_primary_agent().size());
        case SpaceKind::cw_agent: return linear_neighbors(enumerate_cw_agent().size());
        default: throw std::invalid_argument("linear topology is defined for primary and CW agents only");
        }
    }

    /// Joint-space graph: shared basic channel, |primary diff| <= 1, |cw index diff| <= 1.
    inline NeighborGraph joint_neighbors()
    {
        const ActionSpace space = enumerate_joint();
        const auto &arms = space.joint_arms;
        NeighborGraph g(arms.size());
        for (std::size_t u = 0; u < arms.size(); ++u)
        {
            for (std::size_t v = u + 1; v < arms.size(); ++v)
            {
                const auto &a = arms[u];
                const auto &b = arms[v];
                const int dp = std::abs(a.primary - b.primary);
                const int dw = std::abs(static_cast<int>(*cw_index(a.cw)) - static_cast<int>(*cw_index(b.cw)));
                if (a.channel.channels.intersects(b.channel.channels) && dp <= 1 && dw <= 1)
                {
                    g.add_edge(u, v);
                }
            }
        }
        return g;
    }

} // namespace bms
