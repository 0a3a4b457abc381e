#include "goaltrack/repetition.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace goaltrack {

void RepetitionConfig::validate() const {
    if (!(t_rep > 0.0)) throw std::invalid_argument("repetition: t_rep must be positive");
    if (!(tti_len > 0.0)) throw std::invalid_argument("repetition: tti_len must be positive");
    if (k_cap < 1) throw std::invalid_argument("repetition: k_cap must be >= 1");
    if (!(t_rep * (k_cap - 1) < tti_len))
        throw std::invalid_argument("repetition: k_cap repetitions do not fit in one TTI");
}

double attempt_offset(int j, const RepetitionConfig& cfg) { return (j - 1) * cfg.t_rep; }

TtiOutcome run_tti_transmission(int k_max, const AttemptSampler& sampler, const ChannelParams& ch,
                                const RepetitionConfig& cfg, Rng& rng) {
    if (k_max < 1 || k_max > cfg.k_cap)
        throw std::out_of_range("run_tti_transmission: k_max " + std::to_string(k_max) + " outside [1, " +
                                std::to_string(cfg.k_cap) + "]");
    TtiOutcome out;
    out.attempt_log.reserve(static_cast<std::size_t>(k_max));
    for (int j = 1; j <= k_max; ++j) {
        const LinkSample link = sampler(rng);
        const double finish = attempt_offset(j, cfg) + link.delay_s;
        const int ack = (decode(link.snr_linear, ch) == 1 && finish <= cfg.tti_len) ? 1 : 0;
        out.attempt_log.push_back({link.snr_linear, link.delay_s, ack});
        out.attempts_used = j;
        if (ack == 1) {
            out.decoded = true;
            out.decode_offset_s = finish;
            break;
        }
    }
    return out;
}

TtiOutcome run_tti_transmission(int k_max, const Position3& uav, const Position3& bs, const ChannelParams& ch,
                                const RepetitionConfig& cfg, Rng& rng) {
    // Geometry is frozen for the TTI, so the mean attenuation is computed once.
    const double theta = elevation_angle_deg(uav, bs);
    const double los = p_los(theta, ch);
    const double attenuation = mean_path_loss_linear(distance(uav, bs), los, ch);
    const AttemptSampler sampler = [&](Rng& r) {
        LinkSample s;
        s.p_los = los;
        s.fading_power = r.exponential();
        s.snr_linear = snr_from_fading(s.fading_power, attenuation, ch);
        s.delay_s = tx_delay(s.snr_linear, ch);
        return s;
    };
    return run_tti_transmission(k_max, sampler, ch, cfg, rng);
}

double analytic_success_prob(double p_attempt, int k) { return 1.0 - std::pow(1.0 - p_attempt, k); }

} // namespace goaltrack
