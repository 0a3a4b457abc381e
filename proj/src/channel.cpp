#include "goaltrack/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace goaltrack {

void ChannelParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string("channel: ") + name + " must be positive and finite");
    };
    positive(f_dl, "f_dl");
    positive(alpha, "alpha");
    positive(c1, "c1");
    positive(c2, "c2");
    positive(n_cc_bits, "n_cc_bits");
    positive(bandwidth_hz, "bandwidth_hz");
    positive(c_light, "c_light");
    for (double v : {tx_power_dbm, noise_dbm, snr_th_db, eta_los_db, eta_nlos_db})
        if (!std::isfinite(v)) throw std::invalid_argument("channel: dB quantities must be finite");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
double dbm_to_watts(double dbm) { return db_to_linear(dbm - 30.0); }

double elevation_angle_deg(const Position3& uav, const Position3& bs) {
    const double d_ub = distance(uav, bs);
    if (!(d_ub > 0.0)) throw std::domain_error("undefined elevation: UAV and base station coincide");
    const double ratio = std::clamp((uav.z - bs.z) / d_ub, -1.0, 1.0);
    return 180.0 / std::numbers::pi * std::asin(ratio);
}

double p_los(double theta_deg, const ChannelParams& params) {
    // C1 appears as both the coefficient and the slope.
    const double p = 1.0 / (1.0 + params.c1 * std::exp(-params.c1 * (theta_deg - params.c2)));
    return std::clamp(p, 0.0, 1.0);
}

double mean_path_loss_linear(double d_ub, double p_los_value, const ChannelParams& params) {
    const double excess = p_los_value * db_to_linear(params.eta_los_db) +
                          (1.0 - p_los_value) * db_to_linear(params.eta_nlos_db);
    const double fspl = std::pow(4.0 * std::numbers::pi * d_ub * params.f_dl / params.c_light, params.alpha);
    return excess * fspl;
}

double mean_path_loss_linear(const Position3& uav, const Position3& bs, const ChannelParams& params) {
    const double theta = elevation_angle_deg(uav, bs);
    return mean_path_loss_linear(distance(uav, bs), p_los(theta, params), params);
}

double snr_from_fading(double fading_power, double attenuation, const ChannelParams& params) {
    return dbm_to_watts(params.tx_power_dbm) * fading_power / (dbm_to_watts(params.noise_dbm) * attenuation);
}

double mean_snr_linear(const Position3& uav, const Position3& bs, const ChannelParams& params) {
    return snr_from_fading(1.0, mean_path_loss_linear(uav, bs, params), params);
}

LinkSample sample_snr(const Position3& uav, const Position3& bs, const ChannelParams& params, Rng& rng) {
    const double theta = elevation_angle_deg(uav, bs);
    LinkSample s;
    s.p_los = p_los(theta, params);
    s.fading_power = rng.exponential();
    const double attenuation = mean_path_loss_linear(distance(uav, bs), s.p_los, params);
    s.snr_linear = snr_from_fading(s.fading_power, attenuation, params);
    s.delay_s = tx_delay(s.snr_linear, params);
    return s;
}

double tx_delay(double snr_linear, const ChannelParams& params) {
    if (snr_linear < 0.0 || std::isnan(snr_linear)) throw std::invalid_argument("tx_delay: negative SNR");
    if (snr_linear == 0.0) return std::numeric_limits<double>::infinity();
    return params.n_cc_bits / (params.bandwidth_hz * std::log2(1.0 + snr_linear));
}

int decode(double snr_linear, const ChannelParams& params) {
    return snr_linear > db_to_linear(params.snr_th_db) ? 1 : 0;
}

} // namespace goaltrack
