#pragma once

#include "goaltrack/rng.hpp"
#include "goaltrack/world.hpp"

#include <limits>

namespace goaltrack {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Downlink radio constants. Powers in dBm, thresholds and excess losses in dB.
struct ChannelParams {
    double f_dl = 5e9;
    double tx_power_dbm = 18.0;
    double noise_dbm = -104.0;
    double snr_th_db = 5.5;
    double alpha = 2.0;
    double eta_los_db = 1.0;
    double eta_nlos_db = 20.0;
    double c1 = 9.61;
    double c2 = 0.16;
    double n_cc_bits = 800.0;
    double bandwidth_hz = 1e6;
    double c_light = kSpeedOfLight;

    void validate() const;
};

struct LinkSample {
    double snr_linear = 0.0;
    double fading_power = 1.0;
    double p_los = 0.0;
    double delay_s = std::numeric_limits<double>::infinity(); // +inf when capacity is zero
};

double db_to_linear(double db);
double linear_to_db(double linear);
double dbm_to_watts(double dbm);

/// Elevation of the UAV seen from the base station, in degrees.
/// Throws std::domain_error when the geometry is degenerate.
double elevation_angle_deg(const Position3& uav, const Position3& bs);

double p_los(double theta_deg, const ChannelParams& params);

/// Mean attenuation (linear, >= 1 for realistic inputs) for a known LoS probability.
double mean_path_loss_linear(double d_ub, double p_los_value, const ChannelParams& params);

/// Mean attenuation with the LoS probability taken from the geometry.
double mean_path_loss_linear(const Position3& uav, const Position3& bs, const ChannelParams& params);

/// Average SNR (fading power 1) at the given geometry.
double mean_snr_linear(const Position3& uav, const Position3& bs, const ChannelParams& params);

/// SNR for a given fading power |beta|^2 and attenuation.
double snr_from_fading(double fading_power, double attenuation, const ChannelParams& params);

/// One independent downlink attempt: draws |beta|^2 ~ Exp(1).
LinkSample sample_snr(const Position3& uav, const Position3& bs, const ChannelParams& params, Rng& rng);

/// Shannon-rate transmission delay of the C&C packet. +inf for zero SNR.
/// Throws std::invalid_argument for negative SNR.
double tx_delay(double snr_linear, const ChannelParams& params);

/// 1 iff the SNR strictly exceeds the decoding threshold.
int decode(double snr_linear, const ChannelParams& params);

} // namespace goaltrack
