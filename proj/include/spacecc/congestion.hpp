#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include "spacecc/transport.hpp"

namespace spacecc {

enum class Algorithm { Aggressive, Tahoe, Reno, Vegas, WestwoodLite };

std::string_view to_string(Algorithm a);
/// Accepts `aggressive`, `tahoe`, `reno`, `vegas`, `westwood_lite`. Throws UnknownAlgorithm.
Algorithm parse_algorithm(std::string_view name);
std::span<const Algorithm> all_algorithms();

enum class CcEvent { Ack, TripleDup, Timeout };

struct BaselineInputs {
    double expected = 0.0;            // Vegas: cwnd / base_rtt, segments/s
    double actual = 0.0;              // Vegas: cwnd / round RTT, segments/s
    double bandwidth_estimate = 0.0;  // Westwood: bit/s
    std::size_t segment_bytes = 1000;
};

inline constexpr double kVegasAlpha = 1.0;
inline constexpr double kVegasBeta = 3.0;
inline constexpr double kVegasGamma = 1.0;
inline constexpr double kWestwoodGain = 0.1;

/// Textbook window transitions of the comparison algorithms.
///
///  - Tahoe: any loss halves ssthresh from cwnd and restarts at cwnd = 1.
///  - Reno: triple-dup halves and adds 3 for fast recovery; timeout restarts at 1.
///  - Vegas: an Ack event in congestion avoidance is the once-per-RTT
///    adjustment: diff = (expected - actual) * base_rtt, +1 below alpha,
///    -1 above beta. Losses follow Reno.
///  - WestwoodLite: losses set ssthresh = bandwidth_estimate * base_rtt / segment size.
///
/// Ack events in slow start grow the window by one segment. Throws
/// UnknownAlgorithm for Algorithm::Aggressive, which is not a baseline.
CcState baseline_cc(Algorithm algorithm, CcEvent event, CcState state, const BaselineInputs& in = {});

enum class RecoveryStyle {
    GoBackN,  // no fast recovery; resend from the first unacknowledged segment
    Reno,     // inflate on dup ACKs, leave recovery on the first new ACK
    NewReno,  // stay in recovery until everything outstanding at loss time is ACKed
};

struct AckContext {
    SimTime now;
    bool for_empty = false;           // elicited by a header-only segment
    std::uint64_t acked_bytes = 0;    // newly acknowledged payload
    std::uint64_t cum_ack = 0;
    std::uint64_t snd_nxt = 0;
    std::optional<double> rtt;        // sample carried by this ACK, if it was kept
    const RttHistory* history = nullptr;
};

struct LossContext {
    SimTime now;
    const RttHistory* history = nullptr;
};

struct LossDecision {
    std::optional<LossCause> cause;          // set by loss-discriminating controllers
    std::optional<CongestionSignal> signal;
};

struct CcParams {
    double initial_cwnd = 1.0;
    double initial_ssthresh = 1000.0;
    double decay_tau = 1.0;  // s
    double beta = kLossThresholdBeta;
    std::size_t segment_bytes = 1000;
    bool empty_segments_in_ca = false;
};

/// Window policy plugged into a Sender. The sender owns loss detection,
/// timers and retransmission; the controller owns cwnd and ssthresh.
class CongestionController {
public:
    explicit CongestionController(CcState initial) : state_(initial) {}
    virtual ~CongestionController() = default;

    virtual Algorithm algorithm() const noexcept = 0;
    virtual RecoveryStyle recovery_style() const noexcept = 0;
    /// Whether a header-only segment should accompany the next data segment.
    virtual bool wants_empty_segment() const noexcept { return false; }
    /// Whether the sender should freeze the window on link interruption.
    virtual bool maintains_window() const noexcept { return false; }

    /// New ACK outside loss recovery (advances snd_una, or answers an empty segment).
    virtual void on_ack(const AckContext& ctx) = 0;
    virtual LossDecision on_triple_dup(const LossContext& ctx) = 0;
    virtual void on_recovery_dup_ack() { state_.cwnd += 1.0; }
    virtual void on_recovery_exit() { state_.cwnd = state_.ssthresh; }
    virtual void on_timeout() = 0;

    const CcState& state() const noexcept { return state_; }
    void restore(const CcState& s) noexcept { state_ = s; }
    void set_base_rtt(double base_rtt) noexcept { state_.base_rtt = base_rtt; }

protected:
    CcState state_;
};

std::unique_ptr<CongestionController> make_controller(Algorithm algorithm, const CcParams& params = {});

/// Fast start, sigma-based loss discrimination and window maintenance.
class AggressiveCc final : public CongestionController {
public:
    explicit AggressiveCc(const CcParams& p);
    Algorithm algorithm() const noexcept override { return Algorithm::Aggressive; }
    RecoveryStyle recovery_style() const noexcept override { return RecoveryStyle::NewReno; }
    bool wants_empty_segment() const noexcept override;
    bool maintains_window() const noexcept override { return true; }
    void on_ack(const AckContext& ctx) override;
    LossDecision on_triple_dup(const LossContext& ctx) override;
    void on_timeout() override;

private:
    CcParams params_;
};

class TahoeCc final : public CongestionController {
public:
    explicit TahoeCc(const CcParams& p);
    Algorithm algorithm() const noexcept override { return Algorithm::Tahoe; }
    RecoveryStyle recovery_style() const noexcept override { return RecoveryStyle::GoBackN; }
    void on_ack(const AckContext& ctx) override;
    LossDecision on_triple_dup(const LossContext& ctx) override;
    void on_timeout() override;
};

class RenoCc final : public CongestionController {
public:
    explicit RenoCc(const CcParams& p);
    Algorithm algorithm() const noexcept override { return Algorithm::Reno; }
    RecoveryStyle recovery_style() const noexcept override { return RecoveryStyle::Reno; }
    void on_ack(const AckContext& ctx) override;
    LossDecision on_triple_dup(const LossContext& ctx) override;
    void on_timeout() override;
};

class VegasCc final : public CongestionController {
public:
    explicit VegasCc(const CcParams& p);
    Algorithm algorithm() const noexcept override { return Algorithm::Vegas; }
    RecoveryStyle recovery_style() const noexcept override { return RecoveryStyle::Reno; }
    void on_ack(const AckContext& ctx) override;
    LossDecision on_triple_dup(const LossContext& ctx) override;
    void on_timeout() override;

private:
    std::uint64_t round_end_ = 0;
    std::optional<double> round_min_rtt_;
};

class WestwoodLiteCc final : public CongestionController {
public:
    explicit WestwoodLiteCc(const CcParams& p);
    Algorithm algorithm() const noexcept override { return Algorithm::WestwoodLite; }
    RecoveryStyle recovery_style() const noexcept override { return RecoveryStyle::Reno; }
    void on_ack(const AckContext& ctx) override;
    LossDecision on_triple_dup(const LossContext& ctx) override;
    void on_recovery_exit() override;
    void on_timeout() override;

    double bandwidth_estimate() const noexcept { return bwe_; }

private:
    std::size_t segment_bytes_;
    double bwe_ = 0.0;  // bit/s
    std::uint64_t pending_bytes_ = 0;
    std::optional<SimTime> sample_start_;
    double deflate_to_ = 0.0;
};

}  // namespace spacecc
