#include "goaltrack/repetition.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace goaltrack;

namespace {

AttemptSampler fixed_link(double snr, double delay) {
    return [=](Rng&) { return LinkSample{snr, 1.0, 1.0, delay}; };
}

// Decodes with probability p and zero delay.
AttemptSampler coin_link(double p) {
    return [=](Rng& rng) {
        const bool ok = rng.uniform() < p;
        return LinkSample{ok ? 100.0 : 0.0, 1.0, 1.0, ok ? 0.0 : INFINITY};
    };
}

double empirical_success(int k, const AttemptSampler& s, const ChannelParams& ch, const RepetitionConfig& cfg,
                         std::uint64_t seed, int trials) {
    Rng rng(seed);
    int ok = 0;
    for (int i = 0; i < trials; ++i) ok += run_tti_transmission(k, s, ch, cfg, rng).decoded ? 1 : 0;
    return static_cast<double>(ok) / trials;
}

} // namespace

TEST_CASE("config validation") {
    RepetitionConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.t_rep = 2e-4; // ten repetitions no longer fit in 1 ms
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("early termination on the first ACK") {
    const ChannelParams ch;
    const RepetitionConfig cfg;
    Rng rng(1);
    for (int k = 1; k <= cfg.k_cap; ++k) {
        const TtiOutcome out = run_tti_transmission(k, fixed_link(1e6, 1e-9), ch, cfg, rng);
        CHECK(out.decoded);
        CHECK(out.attempts_used == 1);
        REQUIRE(out.decode_offset_s.has_value());
        CHECK(*out.decode_offset_s == 1e-9);
        CHECK(out.attempt_log.size() == 1);
    }
}

TEST_CASE("no decode uses every repetition") {
    const ChannelParams ch;
    const RepetitionConfig cfg;
    Rng rng(1);
    for (int k = 1; k <= cfg.k_cap; ++k) {
        const TtiOutcome out = run_tti_transmission(k, fixed_link(0.0, INFINITY), ch, cfg, rng);
        CHECK_FALSE(out.decoded);
        CHECK(out.attempts_used == k);
        CHECK_FALSE(out.decode_offset_s.has_value());
        for (const auto& a : out.attempt_log) CHECK(a.ack == 0);
    }
}

TEST_CASE("k_max outside [1, k_cap] is rejected") {
    const ChannelParams ch;
    const RepetitionConfig cfg;
    Rng rng(1);
    CHECK_THROWS_AS(run_tti_transmission(0, fixed_link(1, 0), ch, cfg, rng), std::out_of_range);
    CHECK_THROWS_AS(run_tti_transmission(11, fixed_link(1, 0), ch, cfg, rng), std::out_of_range);
}

TEST_CASE("a decode that finishes after the TTI does not count") {
    const ChannelParams ch;
    const RepetitionConfig cfg;
    Rng rng(1);
    // Attempt 10 starts at 0.9 ms; a 0.2 ms decode would end at 1.1 ms.
    auto late = [](Rng&) { return LinkSample{1e3, 1.0, 1.0, 2e-4}; };
    const TtiOutcome ok = run_tti_transmission(1, late, ch, cfg, rng);
    CHECK(ok.decoded);
    CHECK(*ok.decode_offset_s == doctest::Approx(2e-4));

    int calls = 0;
    auto fail_then_late = [&](Rng&) {
        return ++calls < 10 ? LinkSample{0.0, 0.0, 1.0, INFINITY} : LinkSample{1e3, 1.0, 1.0, 2e-4};
    };
    const TtiOutcome missed = run_tti_transmission(10, fail_then_late, ch, cfg, rng);
    CHECK_FALSE(missed.decoded);
    CHECK(missed.attempts_used == 10);
}

TEST_CASE("attempt offsets are exact multiples of the spacing") {
    const RepetitionConfig cfg;
    for (int j = 1; j <= cfg.k_cap; ++j) CHECK(attempt_offset(j, cfg) == (j - 1) * cfg.t_rep);

    const ChannelParams ch;
    Rng rng(3);
    for (int trial = 0; trial < 2000; ++trial) {
        const TtiOutcome out = run_tti_transmission(10, coin_link(0.3), ch, cfg, rng);
        if (out.decoded) {
            CHECK(*out.decode_offset_s == (out.attempts_used - 1) * cfg.t_rep);
            CHECK(*out.decode_offset_s <= cfg.tti_len);
        }
    }
}

TEST_CASE("ACK log: exactly one ACK and it is last") {
    ChannelParams ch;
    ch.tx_power_dbm = -10.0;
    const RepetitionConfig cfg;
    Rng rng(17);
    for (int trial = 0; trial < 5000; ++trial) {
        const int k = 1 + trial % cfg.k_cap;
        const TtiOutcome out = run_tti_transmission(k, {69, 70, 50}, {0, 0, 0}, ch, cfg, rng);
        CHECK(out.attempts_used <= k);
        CHECK(static_cast<int>(out.attempt_log.size()) == out.attempts_used);
        int acks = 0;
        for (const auto& a : out.attempt_log) acks += a.ack;
        CHECK(acks == (out.decoded ? 1 : 0));
        if (out.decoded) CHECK(out.attempt_log.back().ack == 1);
    }
}

TEST_CASE("repetition gain matches 1 - (1 - p)^k") {
    const ChannelParams ch;
    const RepetitionConfig cfg;
    CHECK(std::abs(empirical_success(2, coin_link(0.5), ch, cfg, 5, 100000) - 0.75) < 0.01);
}

TEST_CASE("analytic success probability") {
    for (int k : {1, 3, 10}) {
        CHECK(analytic_success_prob(1.0, k) == 1.0);
        CHECK(analytic_success_prob(0.0, k) == 0.0);
    }
    CHECK(analytic_success_prob(0.3, 3) == doctest::Approx(0.657).epsilon(1e-14));
}

TEST_CASE("delay-gated success over the real channel") {
    // Attempt j succeeds iff SNR exceeds both the threshold and the SNR whose
    // Shannon delay fits in the rest of the TTI; with Exp(1) fading each bound
    // is an exponential tail.
    ChannelParams ch;
    ch.tx_power_dbm = -5.0;
    ch.bandwidth_hz = 2e5; // slow enough that late repetitions get cut off
    const RepetitionConfig cfg;
    const Position3 uav{69, 70, 50}, bs{0, 0, 0};
    const double mean = mean_snr_linear(uav, bs, ch);
    const double th = db_to_linear(ch.snr_th_db);
    double miss = 1.0;
    for (int j = 1; j <= cfg.k_cap; ++j) {
        const double remaining = cfg.tti_len - (j - 1) * cfg.t_rep;
        const double snr_for_delay = std::exp2(ch.n_cc_bits / (ch.bandwidth_hz * remaining)) - 1.0;
        const double pj = std::exp(-std::max(th, snr_for_delay) / mean);
        miss *= 1.0 - pj;

        Rng rng(1000 + j);
        int ok = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) ok += run_tti_transmission(j, uav, bs, ch, cfg, rng).decoded ? 1 : 0;
        CHECK(std::abs(static_cast<double>(ok) / n - (1.0 - miss)) < 0.01);
    }
}
