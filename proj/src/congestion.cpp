#include "spacecc/congestion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "spacecc/errors.hpp"

namespace spacecc {

namespace {

constexpr std::array kAlgorithms{Algorithm::Aggressive, Algorithm::Tahoe, Algorithm::Reno, Algorithm::Vegas,
                                 Algorithm::WestwoodLite};

CcState initial_state(const CcParams& p, Phase phase) {
    CcState s;
    s.cwnd = std::max(1.0, p.initial_cwnd);
    s.ssthresh = std::max(kMinSsthresh, p.initial_ssthresh);
    s.phase = phase;
    return s;
}

CcState halve_from_cwnd(CcState s) {
    s.ssthresh = std::max(kMinSsthresh, std::floor(s.cwnd / 2.0));
    return s;
}

CcState reno_growth(CcState s) {
    return s.phase == Phase::SlowStart ? slow_start_on_ack(s) : congestion_avoidance_on_ack(s);
}

}  // namespace

std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Aggressive: return "aggressive";
        case Algorithm::Tahoe: return "tahoe";
        case Algorithm::Reno: return "reno";
        case Algorithm::Vegas: return "vegas";
        case Algorithm::WestwoodLite: return "westwood_lite";
    }
    return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
    for (Algorithm a : kAlgorithms) {
        if (to_string(a) == name) return a;
    }
    throw UnknownAlgorithm("unknown congestion control algorithm '" + std::string(name) +
                           "' (expected aggressive, tahoe, reno, vegas or westwood_lite)");
}

std::span<const Algorithm> all_algorithms() { return kAlgorithms; }

CcState baseline_cc(Algorithm algorithm, CcEvent event, CcState state, const BaselineInputs& in) {
    switch (algorithm) {
        case Algorithm::Tahoe:
            if (event == CcEvent::Ack) return reno_growth(state);
            state = halve_from_cwnd(state);
            state.cwnd = 1.0;
            state.phase = Phase::SlowStart;
            return state;

        case Algorithm::Reno:
            if (event == CcEvent::Ack) return reno_growth(state);
            state = halve_from_cwnd(state);
            if (event == CcEvent::TripleDup) {
                state.cwnd = state.ssthresh + 3.0;
                state.phase = Phase::CongestionAvoidance;
            } else {
                state.cwnd = 1.0;
                state.phase = Phase::SlowStart;
            }
            return state;

        case Algorithm::Vegas:
            if (event != CcEvent::Ack) return baseline_cc(Algorithm::Reno, event, state, in);
            if (state.phase == Phase::SlowStart) return slow_start_on_ack(state);
            {
                const double diff = (in.expected - in.actual) * state.base_rtt;
                if (diff < kVegasAlpha) {
                    state.cwnd += 1.0;
                } else if (diff > kVegasBeta) {
                    state.cwnd = std::max(kMinSsthresh, state.cwnd - 1.0);
                }
            }
            return state;

        case Algorithm::WestwoodLite: {
            if (event == CcEvent::Ack) return reno_growth(state);
            if (in.bandwidth_estimate > 0.0 && state.base_rtt > 0.0) {
                const double bdp_segments =
                    in.bandwidth_estimate * state.base_rtt / (8.0 * static_cast<double>(in.segment_bytes));
                state.ssthresh = std::max(kMinSsthresh, std::floor(bdp_segments));
            } else {
                state = halve_from_cwnd(state);
            }
            if (event == CcEvent::TripleDup) {
                state.cwnd = std::min(state.cwnd, state.ssthresh) + 3.0;
                state.phase = Phase::CongestionAvoidance;
            } else {
                state.cwnd = 1.0;
                state.phase = Phase::SlowStart;
            }
            return state;
        }

        case Algorithm::Aggressive:
            break;
    }
    throw UnknownAlgorithm("'" + std::string(to_string(algorithm)) + "' is not a baseline algorithm");
}

std::unique_ptr<CongestionController> make_controller(Algorithm algorithm, const CcParams& params) {
    switch (algorithm) {
        case Algorithm::Aggressive: return std::make_unique<AggressiveCc>(params);
        case Algorithm::Tahoe: return std::make_unique<TahoeCc>(params);
        case Algorithm::Reno: return std::make_unique<RenoCc>(params);
        case Algorithm::Vegas: return std::make_unique<VegasCc>(params);
        case Algorithm::WestwoodLite: return std::make_unique<WestwoodLiteCc>(params);
    }
    throw UnknownAlgorithm("unknown algorithm");
}

// --- aggressive -----------------------------------------------------------

AggressiveCc::AggressiveCc(const CcParams& p)
    : CongestionController(initial_state(p, Phase::FastStart)), params_(p) {}

bool AggressiveCc::wants_empty_segment() const noexcept {
    return state_.phase == Phase::FastStart ||
           (params_.empty_segments_in_ca && state_.phase == Phase::CongestionAvoidance);
}

void AggressiveCc::on_ack(const AckContext& ctx) {
    if (state_.phase == Phase::FastStart) {
        state_ = fast_start_on_ack(state_);
    } else if (state_.phase == Phase::CongestionAvoidance && ctx.acked_bytes > 0) {
        state_ = congestion_avoidance_on_ack(state_);
    }
}

LossDecision AggressiveCc::on_triple_dup(const LossContext& ctx) {
    CongestionSignal sig;
    sig.beta = params_.beta;
    if (ctx.history && !ctx.history->empty() && state_.base_rtt > 0.0) {
        sig = compute_sigma(state_, *ctx.history, ctx.now, params_.decay_tau, params_.beta);
    }
    state_ = on_triple_dup_ack(state_, sig);
    return {classify_loss(sig), sig};
}

void AggressiveCc::on_timeout() { state_ = spacecc::on_timeout(state_); }

// --- tahoe ----------------------------------------------------------------

TahoeCc::TahoeCc(const CcParams& p) : CongestionController(initial_state(p, Phase::SlowStart)) {}

void TahoeCc::on_ack(const AckContext& ctx) {
    if (ctx.acked_bytes > 0) state_ = baseline_cc(Algorithm::Tahoe, CcEvent::Ack, state_);
}

LossDecision TahoeCc::on_triple_dup(const LossContext&) {
    state_ = baseline_cc(Algorithm::Tahoe, CcEvent::TripleDup, state_);
    return {};
}

void TahoeCc::on_timeout() { state_ = baseline_cc(Algorithm::Tahoe, CcEvent::Timeout, state_); }

// --- reno -----------------------------------------------------------------

RenoCc::RenoCc(const CcParams& p) : CongestionController(initial_state(p, Phase::SlowStart)) {}

void RenoCc::on_ack(const AckContext& ctx) {
    if (ctx.acked_bytes > 0) state_ = baseline_cc(Algorithm::Reno, CcEvent::Ack, state_);
}

LossDecision RenoCc::on_triple_dup(const LossContext&) {
    state_ = baseline_cc(Algorithm::Reno, CcEvent::TripleDup, state_);
    return {};
}

void RenoCc::on_timeout() { state_ = baseline_cc(Algorithm::Reno, CcEvent::Timeout, state_); }

// --- vegas ----------------------------------------------------------------

VegasCc::VegasCc(const CcParams& p) : CongestionController(initial_state(p, Phase::SlowStart)) {}

void VegasCc::on_ack(const AckContext& ctx) {
    if (ctx.rtt) round_min_rtt_ = std::min(round_min_rtt_.value_or(*ctx.rtt), *ctx.rtt);
    if (ctx.acked_bytes == 0) return;

    if (state_.phase == Phase::SlowStart) {
        state_ = baseline_cc(Algorithm::Vegas, CcEvent::Ack, state_);
    }
    if (ctx.cum_ack < round_end_) return;

    // One adjustment per round trip, using the smallest RTT seen in it.
    if (round_min_rtt_ && state_.base_rtt > 0.0) {
        BaselineInputs in;
        in.expected = state_.cwnd / state_.base_rtt;
        in.actual = state_.cwnd / *round_min_rtt_;
        const double diff = (in.expected - in.actual) * state_.base_rtt;
        if (state_.phase == Phase::SlowStart) {
            if (diff > kVegasGamma) {
                state_.ssthresh = std::max(kMinSsthresh, state_.cwnd);
                state_.phase = Phase::CongestionAvoidance;
            }
        } else {
            state_ = baseline_cc(Algorithm::Vegas, CcEvent::Ack, state_, in);
        }
    }
    round_end_ = ctx.snd_nxt;
    round_min_rtt_.reset();
}

LossDecision VegasCc::on_triple_dup(const LossContext&) {
    state_ = baseline_cc(Algorithm::Vegas, CcEvent::TripleDup, state_);
    return {};
}

void VegasCc::on_timeout() { state_ = baseline_cc(Algorithm::Vegas, CcEvent::Timeout, state_); }

// --- westwood -------------------------------------------------------------

WestwoodLiteCc::WestwoodLiteCc(const CcParams& p)
    : CongestionController(initial_state(p, Phase::SlowStart)), segment_bytes_(p.segment_bytes) {}

void WestwoodLiteCc::on_ack(const AckContext& ctx) {
    if (ctx.acked_bytes == 0) return;
    // ACK-rate samples are taken over at least one base RTT so that ACK
    // compression does not produce spikes; the filter is an EWMA.
    if (!sample_start_) sample_start_ = ctx.now;
    pending_bytes_ += ctx.acked_bytes;
    const double elapsed = to_seconds(ctx.now - *sample_start_);
    if (state_.base_rtt > 0.0 && elapsed >= state_.base_rtt) {
        const double sample = 8.0 * static_cast<double>(pending_bytes_) / elapsed;
        bwe_ = bwe_ == 0.0 ? sample : (1.0 - kWestwoodGain) * bwe_ + kWestwoodGain * sample;
        pending_bytes_ = 0;
        sample_start_ = ctx.now;
    }
    state_ = baseline_cc(Algorithm::WestwoodLite, CcEvent::Ack, state_);
}

LossDecision WestwoodLiteCc::on_triple_dup(const LossContext&) {
    const double before = state_.cwnd;
    BaselineInputs in;
    in.bandwidth_estimate = bwe_;
    in.segment_bytes = segment_bytes_;
    state_ = baseline_cc(Algorithm::WestwoodLite, CcEvent::TripleDup, state_, in);
    deflate_to_ = std::min(before, state_.ssthresh);
    return {};
}

void WestwoodLiteCc::on_recovery_exit() { state_.cwnd = std::max(1.0, deflate_to_); }

void WestwoodLiteCc::on_timeout() {
    BaselineInputs in;
    in.bandwidth_estimate = bwe_;
    in.segment_bytes = segment_bytes_;
    state_ = baseline_cc(Algorithm::WestwoodLite, CcEvent::Timeout, state_, in);
}

}  // namespace spacecc
