#pragma once

// Binds bandit agents to learning BSSs. Single-agent (SA) bindings pick one of
// the 84 joint arms; multi-agent (MA) bindings run channel -> primary -> CW
// agents in sequence, each with its own stage context and the shared reward.

#include "bms/actions.hpp"
#include "bms/bandits/agent.hpp"
#include "bms/bandits/erlb.hpp"
#include "bms/bandits/linucb.hpp"
#include "bms/bandits/osub.hpp"
#include "bms/bandits/random_agent.hpp"
#include "bms/bandits/ucb.hpp"
#include "bms/mac.hpp"
#include "bms/medium.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bms
{
    enum class Architecture : std::uint8_t
    {
        sa,
        ma,
    };

    enum class Algorithm : std::uint8_t
    {
        ucb,
        osub,
        linucb,
        erlb,
        random,
    };

    enum class Stage : std::uint8_t
    {
        sa,
        channel,
        primary,
        cw,
    };

    inline std::string_view to_string(Architecture a) { return a == Architecture::sa ? "sa" : "ma"; }

    inline std::string_view to_string(Algorithm a)
    {
        switch (a)
        {
        case Algorithm::ucb: return "ucb";
        case Algorithm::osub: return "osub";
        case Algorithm::linucb: return "linucb";
        case Algorithm::erlb: return "erlb";
        case Algorithm::random: return "random";
        }
        return "?";
    }

    inline std::string_view to_string(Stage s)
    {
        switch (s)
        {
        case Stage::sa: return "sa";
        case Stage::channel: return "channel";
        case Stage::primary: return "primary";
        case Stage::cw: return "cw";
        }
        return "?";
    }

    inline std::optional<Algorithm> parse_algorithm(std::string_view s)
    {
        for (Algorithm a : {Algorithm::ucb, Algorithm::osub, Algorithm::linucb, Algorithm::erlb, Algorithm::random})
        {
            if (to_string(a) == s)
            {
                return a;
            }
        }
        return std::nullopt;
    }

    inline std::optional<Architecture> parse_architecture(std::string_view s)
    {
        if (s == "sa")
        {
            return Architecture::sa;
        }
        if (s == "ma")
        {
            return Architecture::ma;
        }
        return std::nullopt;
    }

    /// Context width per stage: SA 9, channel 9, primary 12, CW 17.
    inline constexpr std::size_t context_dim(Stage s)
    {
        switch (s)
        {
        case Stage::sa:
        case Stage::channel: return 9;
        case Stage::primary: return 12;
        case Stage::cw: return 17;
        }
        return 0;
    }

    /// Hyperparameters resolved for one architecture.
    struct Hyperparameters
    {
        double ucb_alpha = 1.09;
        double linucb_alpha = 0.52;
        ErlbParams erlb{};
        double osub_p = 0.0;
        double kl_c = 0.0;

        static Hyperparameters defaults(Architecture arch)
        {
            Hyperparameters h;
            if (arch == Architecture::ma)
            {
                h.ucb_alpha = 1.14;
                h.linucb_alpha = 0.50;
                h.erlb = ErlbParams{0.038, 0.069, 0.79, 0.25, 1e-8};
                h.osub_p = 0.05;
            }
            return h;
        }
    };

    /// Medium observations taken once at cycle start.
    struct ContextSnapshot
    {
        std::array<double, kBasicChannels> occupancy{};
        std::array<double, kBasicChannels> busy{};
        double queue_util = 0.0;
    };

    inline ContextSnapshot snapshot_context(const Medium &medium, NodeId node, double queue_util)
    {
        ContextSnapshot s;
        const Time now = medium.now();
        for (int c = 1; c <= kBasicChannels; ++c)
        {
            s.occupancy[static_cast<std::size_t>(c - 1)] = medium.occupancy_ratio(c, now, node);
            s.busy[static_cast<std::size_t>(c - 1)] = medium.busy_excluding(c, node) ? 1.0 : 0.0;
        }
        s.queue_util = std::clamp(queue_util, 0.0, 1.0);
        return s;
    }

    /// Multi-hot over the four basic channels, e.g. {1,2} -> 1100.
    inline std::array<double, kBasicChannels> encode_channels(ChannelSet set)
    {
        std::array<double, kBasicChannels> out{};
        for (int c : set.channels())
        {
            out[static_cast<std::size_t>(c - 1)] = 1.0;
        }
        return out;
    }

    /// Stage vector: occupancy, busy flags, [queue util], [allocation], [primary].
    inline std::vector<double> build_context(const ContextSnapshot &snap, Stage stage,
                                             std::optional<ChannelAllocation> alloc = std::nullopt,
                                             std::optional<int> primary = std::nullopt)
    {
        std::vector<double> x;
        x.reserve(context_dim(stage));
        x.insert(x.end(), snap.occupancy.begin(), snap.occupancy.end());
        x.insert(x.end(), snap.busy.begin(), snap.busy.end());
        if (stage != Stage::primary)
        {
            x.push_back(snap.queue_util);
        }
        if (stage == Stage::primary || stage == Stage::cw)
        {
            if (!alloc)
            {
                throw std::invalid_argument("stage context needs the chosen allocation");
            }
            const auto enc = encode_channels(alloc->channels);
            x.insert(x.end(), enc.begin(), enc.end());
        }
        if (stage == Stage::cw)
        {
            if (!primary)
            {
                throw std::invalid_argument("CW stage context needs the chosen primary");
            }
            const auto enc = encode_channels(ChannelSet{*primary});
            x.insert(x.end(), enc.begin(), enc.end());
        }
        return x;
    }

    /// clip((D_max - D) / (D_max - D_min), 0, 1) with D_min = 0.
    inline double compute_reward(double duration_ms, double d_max_ms = 10.0, double d_min_ms = 0.0)
    {
        if (duration_ms < 0.0)
        {
            throw std::invalid_argument("cycle duration must be non-negative");
        }
        return std::clamp((d_max_ms - duration_ms) / (d_max_ms - d_min_ms), 0.0, 1.0);
    }

    inline std::unique_ptr<Agent> make_agent(Algorithm algo, Stage stage, std::size_t arms,
                                             const NeighborGraph &graph, const Hyperparameters &h, RandomStream rng)
    {
        switch (algo)
        {
        case Algorithm::ucb: return std::make_unique<Ucb>(arms, h.ucb_alpha);
        case Algorithm::osub: return std::make_unique<Osub>(graph, h.osub_p, std::move(rng), h.kl_c);
        case Algorithm::linucb: return std::make_unique<LinUcb>(arms, context_dim(stage), h.linucb_alpha);
        case Algorithm::erlb: return std::make_unique<Erlb>(arms, context_dim(stage), h.erlb, std::move(rng));
        case Algorithm::random: return std::make_unique<RandomAgent>(arms, std::move(rng));
        }
        throw std::invalid_argument("unknown algorithm");
    }

    /// The choices made in one cycle, with the per-stage contexts used.
    struct Decision
    {
        ActionTriple triple;
        std::vector<std::size_t> arms;             // one per agent
        std::vector<std::vector<double>> contexts; // one per agent
    };

    class AgentBinding
    {
    public:
        AgentBinding(Architecture arch, Algorithm algo, const Hyperparameters &h, std::uint64_t seed, NodeId node)
            : arch_(arch), algo_(algo), joint_(enumerate_joint())
        {
            const std::string base = "agent:" + std::to_string(node) + ":";
            if (arch == Architecture::sa)
            {
                const NeighborGraph g = algo == Algorithm::osub ? joint_neighbors() : NeighborGraph(joint_.size());
                agents_.push_back(make_agent(algo, Stage::sa, joint_.size(), g, h, RandomStream(seed, base + "sa")));
                stages_ = {Stage::sa};
            }
            else
            {
                agents_.push_back(make_agent(algo, Stage::channel, 7, channel_graph(), h,
                                             RandomStream(seed, base + "channel")));
                agents_.push_back(make_agent(algo, Stage::primary, 4, linear_neighbors(SpaceKind::primary_agent), h,
                                             RandomStream(seed, base + "primary")));
                agents_.push_back(make_agent(algo, Stage::cw, 7, linear_neighbors(SpaceKind::cw_agent), h,
                                             RandomStream(seed, base + "cw")));
                stages_ = {Stage::channel, Stage::primary, Stage::cw};
            }
        }

        [[nodiscard]] Architecture architecture() const noexcept { return arch_; }
        [[nodiscard]] Algorithm algorithm() const noexcept { return algo_; }
        [[nodiscard]] std::size_t agent_count() const noexcept { return agents_.size(); }
        [[nodiscard]] Agent &agent(std::size_t i) { return *agents_.at(i); }
        [[nodiscard]] const Agent &agent(std::size_t i) const { return *agents_.at(i); }
        [[nodiscard]] Stage stage(std::size_t i) const { return stages_.at(i); }

        [[nodiscard]] const ActionTriple &joint_arm(std::size_t i) const { return joint_.joint_arms.at(i); }

        Decision decide(const ContextSnapshot &snap)
        {
            Decision d;
            if (arch_ == Architecture::sa)
            {
                d.contexts.push_back(build_context(snap, Stage::sa));
                const std::size_t arm = agents_[0]->select(d.contexts[0]);
                d.arms.push_back(arm);
                d.triple = joint_.joint_arms[arm];
                return d;
            }
            d.contexts.push_back(build_context(snap, Stage::channel));
            const std::size_t ch = agents_[0]->select(d.contexts[0]);
            const ChannelAllocation &alloc = allocation(static_cast<int>(ch) + 1);

            std::vector<std::size_t> allowed;
            for (int c : mask_primary(alloc).channels())
            {
                allowed.push_back(static_cast<std::size_t>(c - 1));
            }
            d.contexts.push_back(build_context(snap, Stage::primary, alloc));
            const std::size_t p = agents_[1]->select(d.contexts[1], allowed);
            const int primary = static_cast<int>(p) + 1;

            d.contexts.push_back(build_context(snap, Stage::cw, alloc, primary));
            const std::size_t w = agents_[2]->select(d.contexts[2]);

            d.arms = {ch, p, w};
            d.triple = ActionTriple{alloc, primary, kCwLadder[w]};
            return d;
        }

        /// Every agent receives the same scalar reward with its own stage context.
        void learn(const Decision &d, double reward)
        {
            if (!(reward >= 0.0 && reward <= 1.0))
            {
                throw std::domain_error("reward outside [0,1]");
            }
            for (std::size_t i = 0; i < agents_.size(); ++i)
            {
                agents_[i]->update(d.arms.at(i), d.contexts.at(i), reward);
            }
        }

    private:
        Architecture arch_;
        Algorithm algo_;
        ActionSpace joint_;
        std::vector<std::unique_ptr<Agent>> agents_;
        std::vector<Stage> stages_;
    };

    /// One completed learning round, as handed to the metrics layer.
    struct RoundRecord
    {
        NodeId bss = 0;
        TransmissionCycle cycle;
        double duration_ms = 0.0;
        double reward = 0.0;
        Decision decision;
    };

    /// CycleController driving every learner in a trial.
    class Harness final : public CycleController
    {
    public:
        using RoundSink = std::function<void(const RoundRecord &)>;

        Harness(const Medium &medium, const MacParams &mac) : medium_(medium), mac_(mac) {}

        void bind(NodeId node, const TxQueue &queue, std::unique_ptr<AgentBinding> binding)
        {
            learners_.insert_or_assign(node, Learner{&queue, std::move(binding), {}});
        }

        void set_round_sink(RoundSink sink) { sink_ = std::move(sink); }

        [[nodiscard]] AgentBinding &binding(NodeId node) { return *learners_.at(node).binding; }

        ActionTriple begin_cycle(NodeId node, Time) override
        {
            auto &l = learners_.at(node);
            const ContextSnapshot snap = snapshot_context(medium_, node, l.queue->utilization());
            l.decision = l.binding->decide(snap);
            return l.decision.triple;
        }

        void end_cycle(NodeId node, const TransmissionCycle &cycle) override
        {
            auto &l = learners_.at(node);
            const double d_ms = static_cast<double>(cycle.duration(mac_.d_max)) / static_cast<double>(kMillisecond);
            const double r = compute_reward(d_ms, static_cast<double>(mac_.d_max) / static_cast<double>(kMillisecond));
            l.binding->learn(l.decision, r);
            if (sink_)
            {
                sink_(RoundRecord{node, cycle, d_ms, r, l.decision});
            }
        }

    private:
        struct Learner
        {
            const TxQueue *queue = nullptr;
            std::unique_ptr<AgentBinding> binding;
            Decision decision;
        };

        const Medium &medium_;
        const MacParams &mac_;
        std::map<NodeId, Learner> learners_;
        RoundSink sink_;
    };

} // namespace bms
