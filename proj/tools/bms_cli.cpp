// bms_cli: run trial matrices of the channel-bonding simulator or the synthetic bandit testbeds.
//   bms_cli run --scenario sp --algo linucb --arch sa --bonding scb --trials 20 --out runs/sp
//   bms_cli validate --config configs/sp.conf

#include "bms/bandits/erlb.hpp"
#include "bms/bandits/linucb.hpp"
#include "bms/bandits/osub.hpp"
#include "bms/bandits/random_agent.hpp"
#include "bms/bandits/ucb.hpp"
#include "bms/config.hpp"
#include "bms/metrics.hpp"
#include "bms/simulation.hpp"
#include "bms/testbeds.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

using namespace bms;
namespace fs = std::filesystem;

namespace
{
    constexpr int kUsageError = 2;

    struct Flags
    {
        std::string config;
        std::optional<std::string> scenario;
        std::optional<std::string> algo;
        std::optional<std::string> arch;
        std::optional<std::string> bonding;
        std::optional<std::string> trials;
        std::optional<std::string> seed;
        std::optional<std::string> duration;
        std::optional<std::string> jobs;
        std::string out;
        bool plots = false;
        bool contexts = false;
        std::size_t rounds = 20000;
    };

    void print_report(const ValidationReport &r)
    {
        for (const auto &w : r.warnings)
        {
            std::cerr << "warning: " << w << '\n';
        }
        for (const auto &v : r.violations)
        {
            std::cerr << "error: " << v << '\n';
        }
    }

    /// Config file first, then explicit flags on top.
    RunConfig assemble(const Flags &f, ValidationReport &report)
    {
        RunConfig cfg;
        if (!f.config.empty())
        {
            load_config_file(f.config, cfg, report);
        }
        const std::pair<const char *, const std::optional<std::string> *> overrides[] = {
            {"scenario.name", &f.scenario}, {"run.algorithm", &f.algo},    {"run.architecture", &f.arch},
            {"scenario.bonding", &f.bonding}, {"scenario.trials", &f.trials}, {"run.seed", &f.seed},
            {"scenario.duration_s", &f.duration}, {"run.jobs", &f.jobs},
        };
        for (const auto &[key, value] : overrides)
        {
            if (value->has_value())
            {
                if (auto err = apply_key(cfg, key, **value))
                {
                    report.violations.push_back("command line: " + *err);
                }
            }
        }
        cfg.plots = cfg.plots || f.plots;
        cfg.contexts = cfg.contexts || f.contexts;
        if (!f.out.empty())
        {
            cfg.output_dir = f.out;
        }
        check_config(cfg, report);
        return cfg;
    }

    fs::path output_root(const RunConfig &cfg)
    {
        if (!cfg.output_dir.empty())
        {
            return cfg.output_dir;
        }
        if (const char *env = std::getenv("BMS_OUT_DIR"); env && *env)
        {
            return env;
        }
        std::string name = cfg.scenario + "-" + std::string(to_string(cfg.algorithm)) + "-" +
                           std::string(to_string(cfg.architecture)) + "-" + std::string(to_string(cfg.bonding));
        std::replace(name.begin(), name.end(), ':', '-');
        return fs::path("bms_out") / name;
    }

    std::string trial_dir(std::size_t k)
    {
        std::ostringstream os;
        os << "trial_" << std::setw(2) << std::setfill('0') << k;
        return os.str();
    }

    void write_text(const fs::path &p, const std::string &text)
    {
        auto f = open_output(p);
        f << text;
    }

    std::string pm(const nlohmann::ordered_json &ms)
    {
        return fmt6(ms["mean"].get<double>()) + " +- " + fmt6(ms["std"].get<double>());
    }

    int run_network(const RunConfig &cfg, const fs::path &root)
    {
        const auto records = run_trials(cfg, cfg.jobs);
        for (const auto &rec : records)
        {
            export_trial(rec, root / trial_dir(rec.trial), ExportOptions{cfg.plots, cfg.contexts});
        }
        const auto summary = aggregate_summary(records);
        write_text(root / "summary.json", summary.dump(2) + "\n");

        std::cout << cfg.scenario << " " << to_string(cfg.algorithm) << " " << to_string(cfg.architecture) << " "
                  << to_string(cfg.bonding) << ", " << cfg.trials << " trials, seeds " << cfg.trial_seed(0) << ".."
                  << cfg.trial_seed(cfg.trials - 1) << '\n';
        std::cout << std::left << std::setw(6) << "BSS" << std::setw(9) << "role" << std::setw(24) << "goodput (Mbps)"
                  << "delay (ms)" << '\n';
        for (const auto &b : summary["bss"])
        {
            std::cout << std::setw(6) << ("BSS" + std::to_string(b["id"].get<int>() + 1)) << std::setw(9)
                      << b["role"].get<std::string>() << std::setw(24) << pm(b["goodput_mbps"])
                      << pm(b["mean_delay_ms"]) << '\n';
        }
        std::cout << "J " << pm(summary["jain"]) << '\n';
        std::cout << "artifacts: " << root.string() << '\n';
        return 0;
    }

    std::unique_ptr<Agent> synthetic_agent(const RunConfig &cfg, const SyntheticEnv &env, std::uint64_t seed)
    {
        const Hyperparameters h = cfg.hyperparameters();
        RandomStream rng(seed, "agent:0:sa");
        switch (cfg.algorithm)
        {
        case Algorithm::ucb: return std::make_unique<Ucb>(env.arms(), h.ucb_alpha);
        case Algorithm::osub: return std::make_unique<Osub>(linear_neighbors(env.arms()), h.osub_p, rng, h.kl_c);
        case Algorithm::linucb: return std::make_unique<LinUcb>(env.arms(), env.context_dim(), h.linucb_alpha);
        case Algorithm::erlb: return std::make_unique<Erlb>(env.arms(), env.context_dim(), h.erlb, rng);
        case Algorithm::random: return std::make_unique<RandomAgent>(env.arms(), rng);
        }
        throw std::invalid_argument("unknown algorithm");
    }

    int run_synthetic(const RunConfig &cfg, std::size_t rounds, const fs::path &root)
    {
        const auto kind = parse_env_kind(cfg.scenario.substr(std::string("synth:").size()));
        const SyntheticEnv env = SyntheticEnv::from_kind(*kind);
        const bool contextual_algo = cfg.algorithm == Algorithm::linucb || cfg.algorithm == Algorithm::erlb;
        if (contextual_algo && !env.contextual())
        {
            std::cerr << "error: " << to_string(cfg.algorithm) << " needs a contextual environment\n";
            return kUsageError;
        }
        const std::size_t tail = std::max<std::size_t>(1, rounds / 20);
        std::vector<double> regret;
        std::vector<double> rate;
        nlohmann::ordered_json trials = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < cfg.trials; ++k)
        {
            const std::uint64_t seed = cfg.trial_seed(k);
            auto agent = synthetic_agent(cfg, env, seed);
            const PlayResult r = play(env, *agent, rounds, seed);
            const fs::path dir = root / trial_dir(k);
            fs::create_directories(dir);
            auto f = open_output(dir / "regret.csv");
            f << "round,cumulative_regret,optimal_rate\n";
            const std::size_t step = std::max<std::size_t>(1, rounds / 200);
            for (std::size_t t = step; t <= rounds; t += step)
            {
                f << t << ',' << fmt6(r.regret_at(t)) << ',' << fmt6(r.optimal_rate(t - step, t)) << '\n';
            }
            regret.push_back(r.regret_at(rounds));
            rate.push_back(r.optimal_rate(rounds - tail, rounds));
            trials.push_back({{"trial", k}, {"seed", seed}, {"regret", round6(regret.back())},
                              {"final_optimal_rate", round6(rate.back())}});
        }
        const MeanStd mr = mean_std(regret);
        const MeanStd mo = mean_std(rate);
        nlohmann::ordered_json s;
        s["scenario"] = cfg.scenario;
        s["algorithm"] = std::string(to_string(cfg.algorithm));
        s["architecture"] = std::string(to_string(cfg.architecture));
        s["rounds"] = rounds;
        s["trials"] = cfg.trials;
        s["regret"] = {{"mean", round6(mr.mean)}, {"std", round6(mr.std)}};
        s["final_optimal_rate"] = {{"mean", round6(mo.mean)}, {"std", round6(mo.std)}};
        s["per_trial"] = trials;
        write_text(root / "summary.json", s.dump(2) + "\n");
        std::cout << cfg.scenario << " " << to_string(cfg.algorithm) << ", " << cfg.trials << " seeds, " << rounds
                  << " rounds\n";
        std::cout << "regret " << fmt6(mr.mean) << " +- " << fmt6(mr.std) << "\n";
        std::cout << "optimal rate (last " << tail << " rounds) " << fmt6(mo.mean) << " +- " << fmt6(mo.std) << "\n";
        std::cout << "artifacts: " << root.string() << '\n';
        return 0;
    }

    void add_common(CLI::App *cmd, Flags &f)
    {
        cmd->add_option("--config", f.config, "key = value config file");
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Channel-bonding bandit simulator"};
    app.require_subcommand(1);
    Flags f;

    CLI::App *run = app.add_subcommand("run", "run trials and write artifacts");
    add_common(run, f);
    run->add_option("--scenario", f.scenario, "sp | mp | synth:<kind>");
    run->add_option("--algo", f.algo, "ucb | osub | linucb | erlb | random");
    run->add_option("--arch", f.arch, "sa | ma");
    run->add_option("--bonding", f.bonding, "scb | dcb");
    run->add_option("--trials", f.trials, "number of trials");
    run->add_option("--seed", f.seed, "base seed; trial k uses seed + k");
    run->add_option("--duration", f.duration, "trial length in seconds");
    run->add_option("--jobs", f.jobs, "trials run in parallel");
    run->add_option("--rounds", f.rounds, "rounds per synthetic trial")->check(CLI::PositiveNumber);
    run->add_option("--out", f.out, "output directory (default: $BMS_OUT_DIR, then bms_out/<run>)");
    run->add_flag("--plots", f.plots, "write goodput_timeline.svg per trial");
    run->add_flag("--contexts", f.contexts, "write contexts.csv per trial");

    CLI::App *validate = app.add_subcommand("validate", "check a config and print the resolved values");
    add_common(validate, f);

    CLI11_PARSE(app, argc, argv);

    ValidationReport report;
    const RunConfig cfg = assemble(f, report);
    print_report(report);

    if (validate->parsed())
    {
        std::cout << resolved_config(cfg);
        std::cout << "# " << report.violations.size() << " violations, " << report.warnings.size()
                  << " warnings\n";
        return report.ok() ? 0 : kUsageError;
    }
    if (!report.ok())
    {
        return kUsageError;
    }
    try
    {
        const fs::path root = output_root(cfg);
        fs::create_directories(root);
        write_text(root / "resolved.conf", resolved_config(cfg));
        if (cfg.scenario.rfind("synth:", 0) == 0)
        {
            return run_synthetic(cfg, f.rounds, root);
        }
        return run_network(cfg, root);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
