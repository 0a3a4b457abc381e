#include "goaltrack/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

namespace goaltrack {

namespace {

using nlohmann::json;

// Field reader for one JSON object: every key must be claimed by a read call.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw std::invalid_argument("config: '" + display() + "' must be an object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        claimed_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument("config: bad value for '" + qualified(key) + "': " + e.what());
        }
    }

    void read(const char* key, Position3& out) {
        std::vector<double> v{out.x, out.y, out.z};
        read(key, v);
        if (v.size() != 3) throw std::invalid_argument("config: '" + qualified(key) + "' must have 3 coordinates");
        out = {v[0], v[1], v[2]};
    }

    template <typename F>
    void nested(const char* key, F&& f) {
        claimed_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        ObjectReader sub(*it, qualified(key));
        f(sub);
        sub.finish();
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& raw(const char* key) {
        claimed_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!claimed_.contains(k)) throw std::invalid_argument("config: unknown key '" + qualified(k) + "'");
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string display() const { return path_.empty() ? "<root>" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> claimed_;
};

void read_channel(ObjectReader& r, ChannelParams& c) {
    r.read("f_dl", c.f_dl);
    r.read("tx_power_dbm", c.tx_power_dbm);
    r.read("noise_dbm", c.noise_dbm);
    r.read("snr_th_db", c.snr_th_db);
    r.read("alpha", c.alpha);
    r.read("eta_los_db", c.eta_los_db);
    r.read("eta_nlos_db", c.eta_nlos_db);
    r.read("c1", c.c1);
    r.read("c2", c.c2);
    r.read("n_cc_bits", c.n_cc_bits);
    r.read("bandwidth_hz", c.bandwidth_hz);
    r.read("c_light", c.c_light);
}

void read_env(ObjectReader& r, EnvConfig& e) {
    r.read("tti_len", e.tti_len);
    r.read("n_ttis", e.n_ttis);
    r.read("sub_steps", e.sub_steps);
    r.read("uav_init", e.uav_init);
    r.read("target_init", e.target_init);
    r.read("bs", e.bs);
    r.read("disk_radius", e.disk_radius);
    r.read("height", e.height);
    r.read("d_th", e.value.d_th);
    r.nested("channel", [&](ObjectReader& c) { read_channel(c, e.channel); });
    bool rep_tti_given = false;
    r.nested("repetition", [&](ObjectReader& c) {
        c.read("t_rep", e.repetition.t_rep);
        c.read("k_cap", e.repetition.k_cap);
        rep_tti_given = c.has("tti_len");
        c.read("tti_len", e.repetition.tti_len);
    });
    if (!rep_tti_given) e.repetition.tti_len = e.tti_len;
    r.nested("target", [&](ObjectReader& c) {
        c.read("speed", e.mobility.speed);
        c.read("max_turn", e.mobility.max_turn);
        if (c.has("initial_heading")) {
            const json& h = c.raw("initial_heading");
            if (h.is_null()) {
                e.target_initial_heading.reset();
            } else if (h.is_number()) {
                e.target_initial_heading = h.get<double>();
            } else {
                throw std::invalid_argument("config: 'env.target.initial_heading' must be a number or null");
            }
        }
    });
    r.read("vx_grid", e.vx_grid);
    r.read("vy_grid", e.vy_grid);
    r.read("vz_grid", e.vz_grid);
    r.read("k_max_choices", e.k_max_choices);
}

void read_train(ObjectReader& r, TrainConfig& t, std::optional<std::uint64_t>& seed) {
    r.read("n_iterations", t.n_iterations);
    r.read("target_sync_episodes", t.target_sync_episodes);
    r.read("batch_size", t.batch_size);
    r.read("gamma", t.gamma);
    r.read("epsilon_start", t.epsilon_start);
    r.read("epsilon_end", t.epsilon_end);
    r.read("epsilon_decay_fraction", t.epsilon_decay_fraction);
    r.read("learning_rate", t.learning_rate);
    r.read("rms_decay", t.rms_decay);
    r.read("rms_eps", t.rms_eps);
    r.read("replay_capacity", t.replay_capacity);
    r.read("hidden", t.hidden);
    if (r.has("seed")) {
        std::uint64_t s = 0;
        r.read("seed", s);
        seed = s;
    } else {
        r.read("seed", t.seed); // claims the key only
    }
}

json position_json(const Position3& p) { return json::array({p.x, p.y, p.z}); }

} // namespace

void ExperimentConfig::validate() const {
    env.validate();
    resolved_train().validate();
    pid.validate();
    if (n_eval_runs < 1) throw std::invalid_argument("config: n_eval_runs must be >= 1");
    if (d_th_sweep.empty()) throw std::invalid_argument("config: d_th_sweep must be non-empty");
    for (double d : d_th_sweep)
        if (!(d > 0.0)) throw std::invalid_argument("config: d_th_sweep values must be positive");
}

TrainConfig ExperimentConfig::resolved_train() const {
    TrainConfig t = train;
    t.seed = train_seed.value_or(master_seed);
    return t;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    ObjectReader root(j, "");
    root.nested("env", [&](ObjectReader& r) { read_env(r, cfg.env); });
    root.nested("train", [&](ObjectReader& r) { read_train(r, cfg.train, cfg.train_seed); });
    root.nested("pid", [&](ObjectReader& r) {
        r.read("kp", cfg.pid.kp);
        r.read("k_max", cfg.pid.k_max);
    });
    root.read("n_eval_runs", cfg.n_eval_runs);
    root.read("d_th_sweep", cfg.d_th_sweep);
    root.read("output_dir", cfg.output_dir);
    root.read("master_seed", cfg.master_seed);
    root.finish();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const ExperimentConfig& cfg) {
    const EnvConfig& e = cfg.env;
    const ChannelParams& c = e.channel;
    json env = {
        {"tti_len", e.tti_len},
        {"n_ttis", e.n_ttis},
        {"sub_steps", e.sub_steps},
        {"uav_init", position_json(e.uav_init)},
        {"target_init", position_json(e.target_init)},
        {"bs", position_json(e.bs)},
        {"disk_radius", e.disk_radius},
        {"height", e.height},
        {"d_th", e.value.d_th},
        {"channel",
         {{"f_dl", c.f_dl},
          {"tx_power_dbm", c.tx_power_dbm},
          {"noise_dbm", c.noise_dbm},
          {"snr_th_db", c.snr_th_db},
          {"alpha", c.alpha},
          {"eta_los_db", c.eta_los_db},
          {"eta_nlos_db", c.eta_nlos_db},
          {"c1", c.c1},
          {"c2", c.c2},
          {"n_cc_bits", c.n_cc_bits},
          {"bandwidth_hz", c.bandwidth_hz},
          {"c_light", c.c_light}}},
        {"repetition", {{"t_rep", e.repetition.t_rep}, {"k_cap", e.repetition.k_cap}, {"tti_len", e.repetition.tti_len}}},
        {"target",
         {{"speed", e.mobility.speed},
          {"max_turn", e.mobility.max_turn},
          {"initial_heading", e.target_initial_heading ? json(*e.target_initial_heading) : json(nullptr)}}},
        {"vx_grid", e.vx_grid},
        {"vy_grid", e.vy_grid},
        {"vz_grid", e.vz_grid},
        {"k_max_choices", e.k_max_choices},
    };
    const TrainConfig& t = cfg.train;
    json train = {
        {"n_iterations", t.n_iterations},
        {"target_sync_episodes", t.target_sync_episodes},
        {"batch_size", t.batch_size},
        {"gamma", t.gamma},
        {"epsilon_start", t.epsilon_start},
        {"epsilon_end", t.epsilon_end},
        {"epsilon_decay_fraction", t.epsilon_decay_fraction},
        {"learning_rate", t.learning_rate},
        {"rms_decay", t.rms_decay},
        {"rms_eps", t.rms_eps},
        {"replay_capacity", t.replay_capacity},
        {"hidden", t.hidden},
    };
    if (cfg.train_seed) train["seed"] = *cfg.train_seed;
    return {
        {"env", env},
        {"train", train},
        {"pid", {{"kp", cfg.pid.kp}, {"k_max", cfg.pid.k_max}}},
        {"n_eval_runs", cfg.n_eval_runs},
        {"d_th_sweep", cfg.d_th_sweep},
        {"output_dir", cfg.output_dir},
        {"master_seed", cfg.master_seed},
    };
}

} // namespace goaltrack
