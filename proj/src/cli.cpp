#include "goaltrack/cli.hpp"

#include "goaltrack/config.hpp"
#include "goaltrack/csv.hpp"
#include "goaltrack/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace goaltrack {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string checkpoint;
    std::optional<int> runs;
    std::optional<int> episodes;
};

std::optional<std::uint64_t> seed_from_environment() {
    const char* v = std::getenv("GOALTRACK_SEED");
    if (v == nullptr || *v == '\0') return std::nullopt;
    try {
        std::size_t pos = 0;
        const unsigned long long s = std::stoull(v, &pos);
        if (pos != std::string(v).size()) throw std::invalid_argument("trailing characters");
        return s;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("GOALTRACK_SEED is not an unsigned integer: '") + v + "'");
    }
}

ExperimentConfig resolve_config(const CommonOptions& o) {
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    if (const auto s = o.seed ? o.seed : seed_from_environment()) cfg.master_seed = *s;
    if (o.runs) cfg.n_eval_runs = *o.runs;
    if (o.episodes) cfg.train.n_iterations = *o.episodes;
    if (!o.out.empty()) cfg.output_dir = o.out;
    cfg.validate();
    return cfg;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    return os;
}

QNetParams read_checkpoint_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
    return load_checkpoint(in).params;
}

Policy policy_for(const CommonOptions& o, const ExperimentConfig& cfg, std::string& name) {
    if (o.checkpoint.empty()) {
        name = "pid_k" + std::to_string(cfg.pid.k_max);
        return make_pid_policy(cfg.pid);
    }
    name = "deepp";
    return make_qnet_policy(read_checkpoint_file(o.checkpoint));
}

int cmd_train(const CommonOptions& o, std::ostream& out) {
    const ExperimentConfig cfg = resolve_config(o);
    const fs::path dir = cfg.output_dir;
    const fs::path ckpt = o.checkpoint.empty() ? dir / "checkpoint.qnet" : fs::path(o.checkpoint);
    const TrainResult r = train(cfg.env, cfg.resolved_train());
    {
        auto os = open_output(ckpt);
        save_checkpoint(os, r.params, &r.optimizer);
    }
    {
        auto os = open_output(dir / "train_log.csv");
        write_train_log_csv(os, r.log);
    }
    out << "trained " << r.log.size() << " episodes; checkpoint " << ckpt.string() << '\n';
    return 0;
}

int cmd_eval(const CommonOptions& o, std::ostream& out) {
    const ExperimentConfig cfg = resolve_config(o);
    std::string name;
    const Policy policy = policy_for(o, cfg, name);
    const auto runs = rollouts(policy, cfg.env, cfg.master_seed, cfg.n_eval_runs);
    std::vector<Metrics> rows;
    for (double d_th : cfg.d_th_sweep) rows.push_back(metrics_at(runs, d_th));
    const fs::path dir = cfg.output_dir;
    {
        auto os = open_output(dir / "metrics.csv");
        write_metrics_csv(os, name, rows);
    }
    const Metrics at_ref = metrics_at(runs, cfg.env.value.d_th);
    {
        auto os = open_output(dir / "eval_runs.csv");
        write_runs_csv(os, at_ref);
    }
    out << name << ": p_success " << format_double(at_ref.p_success) << " at d_th "
        << format_double(cfg.env.value.d_th) << " over " << cfg.n_eval_runs << " runs\n";
    return 0;
}

int cmd_sweep(const CommonOptions& o, std::ostream& out) {
    const ExperimentConfig cfg = resolve_config(o);
    const fs::path dir = cfg.output_dir;
    const SweepResult r = sweep_threshold(cfg);
    {
        auto os = open_output(dir / "sweep.csv");
        write_sweep_csv(os, r.rows);
    }
    {
        auto os = open_output(dir / "pid_k_scan.csv");
        os << "k_max,p_success\n";
        for (std::size_t i = 0; i < r.pid_k_scan.size(); ++i)
            os << cfg.env.k_max_choices[i] << ',' << format_double(r.pid_k_scan[i]) << '\n';
    }
    for (const auto& [file, params] : {std::pair{"deepp_k1.qnet", &r.deepp_k1}, {"deepp_kopt.qnet", &r.deepp_kopt}}) {
        auto os = open_output(dir / file);
        save_checkpoint(os, *params);
    }
    for (const auto& [file, log] :
         {std::pair{"train_log_deepp_k1.csv", &r.deepp_k1_log}, {"train_log_deepp_kopt.csv", &r.deepp_kopt_log}}) {
        auto os = open_output(dir / file);
        write_train_log_csv(os, *log);
    }
    out << "PID best k_max: " << r.pid_k_best << '\n';
    for (double d_th : cfg.d_th_sweep) {
        const double pid1 = r.p_success(kVariantPidK1, d_th);
        out << "d_th " << format_double(d_th) << ": pid_k1 " << format_double(pid1) << ", pid_kbest "
            << format_double(r.p_success(kVariantPidKBest, d_th)) << ", deepp_k1 "
            << format_double(r.p_success(kVariantDeepPK1, d_th)) << ", deepp_kopt "
            << format_double(r.p_success(kVariantDeepPKOpt, d_th));
        if (pid1 > 0.0)
            out << " (deepp_k1/pid_k1 " << format_double(r.p_success(kVariantDeepPK1, d_th) / pid1)
                << ", deepp_kopt/pid_k1 " << format_double(r.p_success(kVariantDeepPKOpt, d_th) / pid1) << ')';
        out << '\n';
    }
    out << "wrote " << (dir / "sweep.csv").string() << '\n';
    return 0;
}

int cmd_trace(const CommonOptions& o, std::ostream& out) {
    const ExperimentConfig cfg = resolve_config(o);
    std::string name;
    const Policy policy = policy_for(o, cfg, name);
    TrackingEnv env(cfg.env);
    env.enable_trace(true);
    env.reset(cfg.master_seed);
    while (!env.done()) env.step(policy(env));
    const fs::path path = fs::path(cfg.output_dir) / "trace.csv";
    auto os = open_output(path);
    write_trace_csv(os, env.trace());
    out << "wrote " << path.string() << " (" << name << ", seed " << cfg.master_seed << ")\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Goal-oriented UAV command-and-control tracking simulator", "goaltrack"};
    app.require_subcommand(1);
    CommonOptions opts;

    auto add_common = [&](CLI::App* sub, bool with_runs) {
        sub->add_option("--config", opts.config, "JSON experiment configuration");
        sub->add_option("--seed", opts.seed, "Master seed (overrides GOALTRACK_SEED and the config)");
        sub->add_option("--out", opts.out, "Output directory");
        sub->add_option("--checkpoint", opts.checkpoint, "Q-network checkpoint path");
        sub->add_option("--episodes", opts.episodes, "Override the number of training episodes")
            ->check(CLI::PositiveNumber);
        if (with_runs) sub->add_option("--runs", opts.runs, "Number of evaluation runs")->check(CLI::PositiveNumber);
    };
    CLI::App* train_cmd = app.add_subcommand("train", "Train a DeepP agent and write a checkpoint");
    CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint (or the P controller without one)");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Threshold sweep of all four variants to sweep.csv");
    CLI::App* trace_cmd = app.add_subcommand("trace", "Write a single-episode per-TTI trace");
    add_common(train_cmd, false);
    add_common(eval_cmd, true);
    add_common(sweep_cmd, true);
    add_common(trace_cmd, false);

    std::vector<std::string> argv_store{"goaltrack"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(opts, out);
        if (eval_cmd->parsed()) return cmd_eval(opts, out);
        if (sweep_cmd->parsed()) return cmd_sweep(opts, out);
        if (trace_cmd->parsed()) return cmd_trace(opts, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    err << app.help();
    return 2;
}

} // namespace goaltrack
