// Command-line front end: solve transmission policies, run closed-loop
// Monte Carlo simulations, and sweep the combining gain across channels.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 artifact mismatch,
// 4 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "aoipomdp/config.hpp"
#include "aoipomdp/policy_io.hpp"
#include "aoipomdp/report.hpp"
#include "aoipomdp/sim.hpp"

namespace fs = std::filesystem;
using namespace aoipomdp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMismatch = 3;
constexpr int kExitNumeric = 4;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;  // empty: use the config's output.dir
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
};

ExperimentConfig load_with_overrides(const CommonOpts& opts) {
    ExperimentConfig cfg = load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.runs) {
        if (*opts.runs < 1) throw ConfigError("--runs must be >= 1");
        cfg.runs = *opts.runs;
    }
    return cfg;
}

fs::path prepare_out_dir(const ExperimentConfig& cfg,
                         const CommonOpts& opts) {
    const fs::path dir = opts.out_dir.empty() ? cfg.out_dir : opts.out_dir;
    fs::create_directories(dir);
    return dir;
}

bool wants_format(const ExperimentConfig& cfg, const std::string& fmt) {
    for (const std::string& f : cfg.formats)
        if (f == fmt) return true;
    return false;
}

int cmd_solve(const CommonOpts& opts) {
    const ExperimentConfig cfg = load_with_overrides(opts);
    const ChannelModel channel = cfg.make_channel();
    const CostModel cost = build_cost_model(cfg.make_lti(), channel,
                                            cfg.energy_table(), cfg.terminal);
    const BeliefGrid grid =
        BeliefGrid::build(channel.n_states(), cfg.resolution);
    auto [values, policy] =
        solve_finite_horizon(channel, cost, grid, cfg.horizon);

    const ArtifactHeader header{channel.n_states(), channel.n_r, cfg.horizon,
                                cfg.resolution, cfg.model_hash()};
    const fs::path dir = prepare_out_dir(cfg, opts);
    save_policy((dir / "policy.txt").string(), header, policy);
    save_values((dir / "values.txt").string(), header, values);

    const Belief uniform = Belief::uniform(channel.n_states());
    std::cout << "solved horizon " << cfg.horizon << " on "
              << grid.size() << " belief points\n";
    for (int aoi = 0; aoi <= channel.n_r; ++aoi)
        std::cout << "V0(uniform, aoi=" << aoi << ") = "
                  << format_double(value_at(values, grid, 0, uniform, aoi))
                  << "\n";
    std::cout << "wrote " << (dir / "policy.txt").string() << " and "
              << (dir / "values.txt").string() << "\n";
    return kExitOk;
}

int cmd_simulate(const CommonOpts& opts, const std::string& policy_path,
                 const std::string& baseline) {
    const ExperimentConfig cfg = load_with_overrides(opts);
    const LtiModel lti = cfg.make_lti();
    const ChannelModel channel = cfg.make_channel();
    const CostModel cost =
        build_cost_model(lti, channel, cfg.energy_table(), cfg.terminal);

    std::unique_ptr<TransmitPolicy> rule;
    if (!policy_path.empty()) {
        ArtifactHeader header;
        Policy policy = load_policy(policy_path, &header);
        if (header.model_hash != cfg.model_hash())
            throw ArtifactMismatch(
                "policy was solved for a different model (hash mismatch)");
        if (header.n_c != channel.n_states() || header.n_r != channel.n_r ||
            header.horizon != cfg.horizon ||
            header.resolution != cfg.resolution)
            throw ArtifactMismatch("policy shape does not match the config");
        rule = std::make_unique<SolvedPolicy>(
            std::move(policy),
            BeliefGrid::build(channel.n_states(), cfg.resolution));
    } else {
        rule = baseline_policy(baseline);
    }

    SimConfig sim{lti,      channel,  cost,        cfg.horizon,
                  cfg.runs, cfg.seed, cfg.burn_in, rule.get(), {}, {}, {}};
    sim.x_hat0 = cfg.x_hat0;
    sim.P0 = cfg.P0;
    const Metrics metrics = monte_carlo(sim);

    Rng run0(episode_seed(cfg.seed, 0));
    const std::vector<TraceRecord> trace = run_episode(sim, run0);

    ReportMeta meta{cfg.model_hash(), cfg.seed, {}};
    meta.extra.emplace_back("runs", std::to_string(cfg.runs));
    meta.extra.emplace_back("horizon", std::to_string(cfg.horizon));
    meta.extra.emplace_back("burn_in", std::to_string(cfg.burn_in));
    meta.extra.emplace_back(
        "policy", policy_path.empty() ? "baseline:" + baseline : policy_path);

    const fs::path dir = prepare_out_dir(cfg, opts);
    write_metrics_csv((dir / "metrics.csv").string(), metrics, meta);
    ReportMeta trace_meta = meta;
    trace_meta.extra.emplace_back("run", "0");
    trace_meta.extra.emplace_back("run_seed",
                                  std::to_string(episode_seed(cfg.seed, 0)));
    write_trace_csv((dir / "trace.csv").string(), trace, trace_meta);

    std::cout << "mse = " << format_double(metrics.mse_mean) << " +- "
              << format_double(metrics.mse_std) << " (runs=" << cfg.runs
              << ", ack_rate=" << format_double(metrics.ack_rate) << ")\n";
    std::cout << "wrote " << (dir / "metrics.csv").string() << " and "
              << (dir / "trace.csv").string() << "\n";
    return kExitOk;
}

int cmd_sweep(const CommonOpts& opts, const std::vector<double>& lambdas,
              std::vector<std::string> channels) {
    if (lambdas.empty())
        throw CLI::ValidationError("--lambdas", "needs at least one value");
    const ExperimentConfig cfg = load_with_overrides(opts);
    if (channels.empty()) channels = {"channel"};

    std::vector<SweepCurve> curves;
    for (const std::string& name : channels) {
        const ChannelModel channel = cfg.make_channel_named(name, cfg.lambda);
        SweepSetup setup{cfg.make_lti(), channel,        cfg.energy_table(),
                         cfg.terminal,   cfg.horizon,    cfg.resolution,
                         cfg.runs,       cfg.seed,       cfg.burn_in,
                         cfg.x_hat0,     cfg.P0};
        curves.push_back({name, sweep_lambda(setup, lambdas)});
    }

    ReportMeta meta{cfg.model_hash(), cfg.seed, {}};
    meta.extra.emplace_back("runs", std::to_string(cfg.runs));
    meta.extra.emplace_back("horizon", std::to_string(cfg.horizon));

    const fs::path dir = prepare_out_dir(cfg, opts);
    write_sweep_csv((dir / "sweep.csv").string(), curves, meta);
    std::cout << "wrote " << (dir / "sweep.csv").string() << "\n";
    if (wants_format(cfg, "svg")) {
        write_sweep_svg((dir / "sweep.svg").string(), curves);
        std::cout << "wrote " << (dir / "sweep.svg").string() << "\n";
    }
    return kExitOk;
}

int cmd_validate(const std::string& config_path) {
    (void)load_config(config_path);
    std::cout << "configuration OK\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transmission-policy synthesis and closed-loop estimation "
                 "experiments over lossy feedback channels"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string policy_path;
    std::string baseline;
    std::string lambdas_csv;
    std::string channels_csv;

    const auto add_common = [&](CLI::App* sub, bool with_overrides = true) {
        sub->add_option("--config", opts.config_path, "experiment config file")
            ->required();
        sub->add_option("--out", opts.out_dir,
                        "output directory (default: config output.dir)");
        if (with_overrides) {
            sub->add_option("--seed", opts.seed, "override simulation seed");
            sub->add_option("--runs", opts.runs, "override simulation runs");
        }
    };

    CLI::App* solve = app.add_subcommand("solve", "solve the policy");
    add_common(solve);

    CLI::App* simulate =
        app.add_subcommand("simulate", "closed-loop Monte Carlo run");
    add_common(simulate);
    auto* popt = simulate->add_option("--policy", policy_path,
                                      "solved policy artifact");
    auto* bopt = simulate->add_option(
        "--baseline", baseline,
        "baseline rule: always-fresh | retransmit-to-cap");
    popt->excludes(bopt);

    CLI::App* sweep =
        app.add_subcommand("sweep", "re-solve and simulate per lambda");
    add_common(sweep);
    sweep->add_option("--lambdas", lambdas_csv,
                      "comma-separated lambda values")
        ->required();
    sweep->add_option("--channels", channels_csv,
                      "comma-separated [channels] names");

    CLI::App* validate =
        app.add_subcommand("validate-config", "parse and check a config");
    validate->add_option("--config", opts.config_path, "experiment config file")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (solve->parsed()) return cmd_solve(opts);
        if (simulate->parsed()) {
            if (policy_path.empty() == baseline.empty())
                throw ConfigError(
                    "simulate needs exactly one of --policy or --baseline");
            return cmd_simulate(opts, policy_path, baseline);
        }
        if (sweep->parsed()) {
            std::vector<double> lambdas;
            std::stringstream ss(lambdas_csv);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (tok.empty()) continue;
                lambdas.push_back(std::stod(tok));
            }
            std::vector<std::string> channels;
            std::stringstream cs(channels_csv);
            while (std::getline(cs, tok, ',')) {
                if (!tok.empty()) channels.push_back(tok);
            }
            return cmd_sweep(opts, lambdas, channels);
        }
        if (validate->parsed()) return cmd_validate(opts.config_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ArtifactMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMismatch;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
