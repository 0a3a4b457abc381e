#include "goaltrack/harness.hpp"

#include "goaltrack/csv.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace goaltrack {

Policy make_pid_policy(const PidConfig& pc) {
    pc.validate();
    return [pc](const TrackingEnv& env) {
        return pid_command(env.uav(), env.target().position, pc, env.config().tti_len, env.actions());
    };
}

Policy make_qnet_policy(QNetParams params) {
    return [params = std::move(params)](const TrackingEnv& env) {
        if (static_cast<std::size_t>(params.output_size()) != env.actions().size())
            throw std::invalid_argument("Q-network has " + std::to_string(params.output_size()) +
                                        " outputs but the action space has " +
                                        std::to_string(env.actions().size()) + " actions");
        const auto s = env.state().as_array();
        return env.actions().decode(argmax(forward(params, s)));
    };
}

std::vector<Rollout> rollouts(const Policy& policy, const EnvConfig& env_cfg, std::uint64_t master_seed, int runs) {
    if (runs < 1) throw std::invalid_argument("rollouts: need at least one run");
    TrackingEnv env(env_cfg);
    std::vector<Rollout> out;
    out.reserve(static_cast<std::size_t>(runs));
    for (int i = 0; i < runs; ++i) {
        Rollout r;
        r.seed = master_seed + static_cast<std::uint64_t>(i);
        env.reset(r.seed);
        r.d_n.reserve(static_cast<std::size_t>(env_cfg.n_ttis));
        while (!env.done()) r.d_n.push_back(env.step(policy(env)).info.d_n);
        out.push_back(std::move(r));
    }
    return out;
}

Metrics metrics_at(const std::vector<Rollout>& runs, double d_th) {
    Metrics m;
    m.d_th = d_th;
    const ValueParams vp{d_th};
    std::size_t successes = 0;
    std::size_t samples = 0;
    double dist_sum = 0.0;
    double return_sum = 0.0;
    for (const auto& r : runs) {
        RunMetrics rm;
        rm.seed = r.seed;
        std::size_t ok = 0;
        double dsum = 0.0;
        for (double d : r.d_n) {
            ok += d <= d_th ? 1 : 0;
            dsum += d;
            rm.episode_return += value(d, vp);
        }
        const auto n = static_cast<double>(r.d_n.size());
        rm.p_success = static_cast<double>(ok) / n;
        rm.mean_distance = dsum / n;
        successes += ok;
        samples += r.d_n.size();
        dist_sum += dsum;
        return_sum += rm.episode_return;
        m.runs.push_back(rm);
    }
    m.p_success = static_cast<double>(successes) / static_cast<double>(samples);
    m.mean_distance = dist_sum / static_cast<double>(samples);
    m.mean_episode_return = return_sum / static_cast<double>(runs.size());
    return m;
}

Metrics evaluate(const Policy& policy, const ExperimentConfig& cfg) {
    return metrics_at(rollouts(policy, cfg.env, cfg.master_seed, cfg.n_eval_runs), cfg.env.value.d_th);
}

void write_metrics_csv(std::ostream& os, const std::string& policy_name, const std::vector<Metrics>& rows) {
    os << "policy,d_th,p_success,mean_distance,mean_episode_return\n";
    for (const auto& m : rows)
        os << policy_name << ',' << format_double(m.d_th) << ',' << format_double(m.p_success) << ','
           << format_double(m.mean_distance) << ',' << format_double(m.mean_episode_return) << '\n';
}

void write_runs_csv(std::ostream& os, const Metrics& m) {
    os << "run,seed,d_th,p_success,mean_distance,episode_return\n";
    for (std::size_t i = 0; i < m.runs.size(); ++i) {
        const auto& r = m.runs[i];
        os << i << ',' << r.seed << ',' << format_double(m.d_th) << ',' << format_double(r.p_success) << ','
           << format_double(r.mean_distance) << ',' << format_double(r.episode_return) << '\n';
    }
}

double SweepResult::p_success(const std::string& variant, double d_th) const {
    for (const auto& r : rows)
        if (r.variant == variant && r.d_th == d_th) return r.p_success;
    throw std::out_of_range("sweep: no row for " + variant);
}

EnvConfig with_fixed_k(EnvConfig env, int k) {
    env.k_max_choices = {k};
    return env;
}

SweepResult sweep_threshold(const ExperimentConfig& cfg) {
    cfg.validate();
    SweepResult result;
    const auto& ks = cfg.env.k_max_choices;
    const int k_one = *std::min_element(ks.begin(), ks.end());

    // PID: the repetition count giving the best tracking at the reference threshold.
    std::vector<std::vector<Rollout>> pid_runs;
    double best = -1.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        PidConfig pc = cfg.pid;
        pc.k_max = ks[i];
        pid_runs.push_back(rollouts(make_pid_policy(pc), cfg.env, cfg.master_seed, cfg.n_eval_runs));
        const double p = metrics_at(pid_runs.back(), cfg.env.value.d_th).p_success;
        result.pid_k_scan.push_back(p);
        if (p > best) {
            best = p;
            result.pid_k_best = ks[i];
        }
    }
    const auto k_index = [&](int k) {
        return static_cast<std::size_t>(std::find(ks.begin(), ks.end(), k) - ks.begin());
    };

    const TrainConfig tc = cfg.resolved_train();
    const EnvConfig env_k1 = with_fixed_k(cfg.env, k_one);
    TrainResult k1 = train(env_k1, tc);
    TrainResult kopt = train(cfg.env, tc);

    const auto deepp_k1_runs = rollouts(make_qnet_policy(k1.params), env_k1, cfg.master_seed, cfg.n_eval_runs);
    const auto deepp_kopt_runs = rollouts(make_qnet_policy(kopt.params), cfg.env, cfg.master_seed, cfg.n_eval_runs);

    const std::vector<std::pair<const char*, const std::vector<Rollout>*>> variants{
        {kVariantPidK1, &pid_runs[k_index(k_one)]},
        {kVariantPidKBest, &pid_runs[k_index(result.pid_k_best)]},
        {kVariantDeepPK1, &deepp_k1_runs},
        {kVariantDeepPKOpt, &deepp_kopt_runs},
    };
    for (const auto& [name, runs] : variants) {
        for (double d_th : cfg.d_th_sweep) {
            const Metrics m = metrics_at(*runs, d_th);
            result.rows.push_back({name, d_th, m.p_success, m.mean_distance});
        }
    }
    result.deepp_k1 = std::move(k1.params);
    result.deepp_kopt = std::move(kopt.params);
    result.deepp_k1_log = std::move(k1.log);
    result.deepp_kopt_log = std::move(kopt.log);
    return result;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "variant,d_th,p_success,mean_distance\n";
    for (const auto& r : rows)
        os << r.variant << ',' << format_double(r.d_th) << ',' << format_double(r.p_success) << ','
           << format_double(r.mean_distance) << '\n';
}

} // namespace goaltrack
