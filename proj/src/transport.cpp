#include "spacecc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spacecc/errors.hpp"

namespace spacecc {

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::FastStart: return "fast_start";
        case Phase::SlowStart: return "slow_start";
        case Phase::CongestionAvoidance: return "congestion_avoidance";
        case Phase::MaintenanceFrozen: return "maintenance_frozen";
    }
    return "unknown";
}

std::string_view to_string(LossCause c) {
    return c == LossCause::RandomError ? "random_error" : "congestion";
}

RttHistory::RttHistory(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

void RttHistory::record(SimTime at, double rtt) {
    if (!samples_.empty()) {
        if (at < samples_.back().at) throw std::invalid_argument("RTT samples must be recorded in time order");
        if (at == samples_.back().at) {
            samples_.back().rtt = rtt;
            return;
        }
    }
    samples_.push_back({at, rtt});
    while (samples_.size() > capacity_) samples_.pop_front();
}

double smoothed_rtt(const RttHistory& hist, SimTime now, double decay_tau) {
    if (hist.empty()) throw EmptyHistory("smoothed RTT needs at least one sample");
    if (!(decay_tau > 0.0)) throw std::invalid_argument("decay time constant must be positive");
    // Weights are taken relative to the newest sample so that exp() cannot
    // underflow for long histories; the common factor cancels. Averaging the
    // excess over the smallest sample keeps a flat history exact.
    const double newest = to_seconds(hist.back().at);
    double lo = hist.back().rtt;
    double hi = lo;
    for (const auto& s : hist) {
        lo = std::min(lo, s.rtt);
        hi = std::max(hi, s.rtt);
    }
    double num = 0.0;
    double den = 0.0;
    for (const auto& s : hist) {
        const double w = std::exp(-(newest - to_seconds(s.at)) / decay_tau);
        num += w * (s.rtt - lo);
        den += w;
    }
    (void)now;
    return std::clamp(lo + num / den, lo, hi);
}

CongestionSignal compute_sigma(const CcState& state, const RttHistory& hist, SimTime now, double decay_tau,
                               double beta) {
    if (!(state.base_rtt > 0.0)) throw std::invalid_argument("base_rtt must be positive");
    CongestionSignal sig;
    sig.beta = beta;
    sig.base_rtt = state.base_rtt;
    sig.smoothed_rtt = smoothed_rtt(hist, now, decay_tau);
    sig.expected = state.cwnd / state.base_rtt;
    sig.actual = state.cwnd / sig.smoothed_rtt;
    sig.sigma = (sig.expected - sig.actual) * state.base_rtt;
    if (sig.sigma > beta) {
        sig.k = std::min(1.0, (beta / sig.sigma) * (state.base_rtt / sig.smoothed_rtt));
    }
    return sig;
}

CcState on_triple_dup_ack(CcState state, const CongestionSignal& sig) {
    if (classify_loss(sig) == LossCause::RandomError) {
        state.ssthresh = std::max(kMinSsthresh, state.cwnd);
    } else {
        const double k = std::clamp(sig.k, 0.0, 1.0);
        state.ssthresh = std::max(kMinSsthresh, std::round(state.cwnd * k));
    }
    state.cwnd = state.ssthresh + 3.0;
    state.phase = Phase::CongestionAvoidance;
    return state;
}

CcState on_timeout(CcState state) {
    state.ssthresh = std::max(kMinSsthresh, state.ssthresh / 2.0);
    state.cwnd = 1.0;
    state.phase = Phase::FastStart;
    return state;
}

CcState fast_start_on_ack(CcState state) {
    state.cwnd = std::min(state.cwnd + 1.0, std::max(state.ssthresh, state.cwnd));
    if (state.cwnd >= state.ssthresh) state.phase = Phase::CongestionAvoidance;
    return state;
}

CcState slow_start_on_ack(CcState state) {
    const Phase keep = state.phase;
    state = fast_start_on_ack(state);
    if (state.phase != Phase::CongestionAvoidance) state.phase = keep;
    return state;
}

CcState congestion_avoidance_on_ack(CcState state) {
    state.cwnd += 1.0 / std::max(1.0, state.cwnd);
    return state;
}

bool maintenance_check(double rtt_est, std::optional<double> latest_rtt, double silence) {
    const double threshold = 10.0 * rtt_est;
    return (latest_rtt && *latest_rtt > threshold) || silence > threshold;
}

CcState enter_maintenance(CcState state) {
    state.phase = Phase::MaintenanceFrozen;
    return state;
}

CcState exit_maintenance(CcState frozen) {
    frozen.phase = Phase::CongestionAvoidance;
    return frozen;
}

RtoEstimator::RtoEstimator(Params p) : params_(p), base_(p.initial) {}

void RtoEstimator::on_sample(double rtt) {
    if (!srtt_) {
        srtt_ = rtt;
        rttvar_ = rtt / 2.0;
    } else {
        rttvar_ = 0.75 * rttvar_ + 0.25 * std::abs(*srtt_ - rtt);
        srtt_ = 0.875 * *srtt_ + 0.125 * rtt;
    }
    base_ = std::clamp(*srtt_ + 4.0 * rttvar_, params_.min, params_.max);
}

void RtoEstimator::back_off() {
    if (base_ * backoff_ < params_.max) backoff_ *= 2;
}

double RtoEstimator::current() const { return std::min(params_.max, base_ * backoff_); }

}  // namespace spacecc
