#pragma once

#include "goaltrack/channel.hpp"
#include "goaltrack/rng.hpp"
#include "goaltrack/world.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace goaltrack {

struct RepetitionConfig {
    double t_rep = 1e-4;   // spacing between repetition starts, seconds
    int k_cap = 10;        // absolute maximum K^max
    double tti_len = 1e-3; // T, seconds

    void validate() const;
};

struct AttemptRecord {
    double snr_linear = 0.0;
    double delay_s = 0.0;
    int ack = 0;
};

struct TtiOutcome {
    bool decoded = false;
    int attempts_used = 0;
    std::optional<double> decode_offset_s; // set iff decoded
    std::vector<AttemptRecord> attempt_log;
};

/// Draws the link state of one repetition attempt.
using AttemptSampler = std::function<LinkSample(Rng&)>;

/// Start offset of the j-th repetition (1-based) from the TTI start.
double attempt_offset(int j, const RepetitionConfig& cfg);

/// Proactive K-repetition of one packet inside a TTI. Attempts are decoded
/// independently; the first ACK stops the remaining repetitions. An attempt
/// only counts if its decode completes inside the TTI.
TtiOutcome run_tti_transmission(int k_max, const AttemptSampler& sampler, const ChannelParams& ch,
                                const RepetitionConfig& cfg, Rng& rng);

/// Same, with every attempt drawn from the air-to-ground channel at fixed geometry.
TtiOutcome run_tti_transmission(int k_max, const Position3& uav, const Position3& bs, const ChannelParams& ch,
                                const RepetitionConfig& cfg, Rng& rng);

/// 1 - (1 - p)^k.
double analytic_success_prob(double p_attempt, int k);

} // namespace goaltrack
