#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>
#include <vector>

#include "spacecc/sim_core.hpp"

namespace spacecc {

/// Data or header-only segment. Header-only ("empty") segments carry no
/// payload and exist to elicit an ACK; probes are empty segments sent while
/// the window is frozen.
struct Segment {
    std::uint64_t seq = 0;  // byte offset
    std::uint32_t len = 0;  // payload bytes
    bool is_empty = false;
    bool is_probe = false;
    bool is_retransmit = false;
    SimTime sent_at;
    std::vector<std::uint8_t> payload;  // len bytes
};

struct Ack {
    std::uint64_t cum_ack = 0;  // next byte expected
    SimTime echo_sent_at;       // sent_at of the segment that triggered this ACK
    SimTime recv_at;
    bool for_empty = false;
    bool for_probe = false;
    std::uint64_t echo_seq = 0;  // seq of the triggering segment
};

enum class Phase { FastStart, SlowStart, CongestionAvoidance, MaintenanceFrozen };
std::string_view to_string(Phase p);

/// Window state in segments. cwnd is fractional; transmission is gated on
/// floor(cwnd).
struct CcState {
    double cwnd = 1.0;
    double ssthresh = 1000.0;
    double base_rtt = 0.0;  // s; minimum RTT observed, 0 until the first sample
    Phase phase = Phase::FastStart;

    bool operator==(const CcState&) const = default;
};

inline constexpr double kMinSsthresh = 2.0;
inline constexpr double kLossThresholdBeta = 3.0;  // segments per base RTT

struct RttSample {
    SimTime at;
    double rtt = 0.0;  // s
};

/// Bounded, time-ordered record of RTT observations. Oldest samples are
/// evicted first once capacity is reached.
class RttHistory {
public:
    explicit RttHistory(std::size_t capacity = 64);

    /// Timestamps must be non-decreasing; a sample with the same timestamp as
    /// the newest one replaces it so T_i stays strictly increasing.
    void record(SimTime at, double rtt);
    void clear() noexcept { samples_.clear(); }

    bool empty() const noexcept { return samples_.empty(); }
    std::size_t size() const noexcept { return samples_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    auto begin() const noexcept { return samples_.begin(); }
    auto end() const noexcept { return samples_.end(); }
    const RttSample& back() const { return samples_.back(); }

private:
    std::size_t capacity_;
    std::deque<RttSample> samples_;
};

/// Time-decayed mean of the history:
///   sum_i exp(-(now - T_i)/tau) * rtt_i / sum_i exp(-(now - T_i)/tau)
/// `decay_tau` is the decay time constant in seconds. Throws EmptyHistory.
double smoothed_rtt(const RttHistory& hist, SimTime now, double decay_tau = 1.0);

struct CongestionSignal {
    double sigma = 0.0;     // segments
    double beta = kLossThresholdBeta;
    double expected = 0.0;  // segments/s
    double actual = 0.0;    // segments/s
    double k = 1.0;         // ssthresh reduction factor, (0, 1]; 1 when sigma <= beta
    double smoothed_rtt = 0.0;
    double base_rtt = 0.0;
};

/// Throws EmptyHistory, or std::invalid_argument when base_rtt is not positive.
CongestionSignal compute_sigma(const CcState& state, const RttHistory& hist, SimTime now,
                               double decay_tau = 1.0, double beta = kLossThresholdBeta);

enum class LossCause { RandomError, Congestion };
std::string_view to_string(LossCause c);
inline LossCause classify_loss(const CongestionSignal& sig) {
    return sig.sigma <= sig.beta ? LossCause::RandomError : LossCause::Congestion;
}

/// Triple duplicate ACK reaction of the aggressive mechanism.
///   random error:  ssthresh = cwnd;                       cwnd = ssthresh + 3
///   congestion:    ssthresh = max(2, round(cwnd * k));    cwnd = ssthresh + 3
CcState on_triple_dup_ack(CcState state, const CongestionSignal& sig);
/// ssthresh halves (floor 2), cwnd restarts at 1 in fast start.
CcState on_timeout(CcState state);
/// +1 per ACK, capped at ssthresh; reaching ssthresh switches to congestion avoidance.
CcState fast_start_on_ack(CcState state);
/// Same growth law as fast_start_on_ack, for the classical slow start.
CcState slow_start_on_ack(CcState state);
/// +1/cwnd per ACK.
CcState congestion_avoidance_on_ack(CcState state);

/// True when the latest RTT sample, or the time since the last ACK while
/// data is outstanding, strictly exceeds 10 * rtt_est.
bool maintenance_check(double rtt_est, std::optional<double> latest_rtt, double silence = 0.0);
CcState enter_maintenance(CcState state);
CcState exit_maintenance(CcState frozen);

/// Retransmission timeout with Jacobson/Karels smoothing and binary backoff.
class RtoEstimator {
public:
    struct Params {
        double initial = 1.0;  // s
        double min = 0.2;
        double max = 64.0;
    };

    explicit RtoEstimator(Params p);

    void on_sample(double rtt);
    void back_off();
    void reset_backoff() noexcept { backoff_ = 1; }
    double current() const;
    unsigned backoff() const noexcept { return backoff_; }

private:
    Params params_;
    std::optional<double> srtt_;
    double rttvar_ = 0.0;
    double base_ = 1.0;
    unsigned backoff_ = 1;
};

}  // namespace spacecc
