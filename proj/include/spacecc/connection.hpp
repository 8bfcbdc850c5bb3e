#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "spacecc/channel.hpp"
#include "spacecc/congestion.hpp"
#include "spacecc/sim_core.hpp"
#include "spacecc/transport.hpp"

namespace spacecc {

/// When a NewReno partial ACK restarts the retransmission timer.
enum class PartialAckTimer {
    Impatient,      // first partial ACK only
    SlowButSteady,  // every partial ACK
    ByLossCause,    // every one after a loss classified as random, else first only
};
std::string_view to_string(PartialAckTimer p);
/// Throws InvalidConfig.
PartialAckTimer parse_partial_ack_timer(std::string_view name);

struct TransportParams {
    std::size_t mss = 1000;          // payload bytes per data segment
    std::size_t header_bytes = 40;   // wire overhead of every segment and ACK
    double rtt_est = 0.0;            // s; geometric estimate, 0 if unknown
    double min_rto = 1.0;            // s
    double max_rto = 64.0;           // s
    std::size_t history_capacity = 64;
    double decay_tau = 1.0;          // s
    double probe_interval_factor = 2.0;  // probes every factor * rtt_est
    unsigned dupack_threshold = 3;
    PartialAckTimer partial_ack_timer = PartialAckTimer::ByLossCause;

    bool operator==(const TransportParams&) const = default;
};

/// FNV-1a over a byte stream, fed incrementally.
class StreamChecksum {
public:
    void update(std::span<const std::uint8_t> bytes) noexcept;
    std::uint64_t value() const noexcept { return h_; }
    bool operator==(const StreamChecksum&) const = default;

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

struct WindowPoint {
    SimTime at;
    double cwnd = 0.0;
    double ssthresh = 0.0;
    Phase phase = Phase::FastStart;
};

enum class LossKind { TripleDup, Timeout };

struct LossRecord {
    LossKind kind = LossKind::TripleDup;
    SimTime at;
    std::optional<LossCause> cause;  // aggressive only
    double sigma = 0.0;
    double k = 1.0;
    CcState before;
    CcState after;
};

enum class MaintenanceTrigger { Silence, RttSample };

struct MaintenanceRecord {
    SimTime entered;
    MaintenanceTrigger trigger = MaintenanceTrigger::Silence;
    CcState at_entry;                 // frozen state
    std::optional<SimTime> exited;
    std::optional<CcState> at_exit;
};

/// Optional per-connection record of everything observable about the sender.
struct SenderTrace {
    std::vector<WindowPoint> window;
    std::vector<LossRecord> losses;
    std::vector<MaintenanceRecord> maintenance;
    std::vector<SimTime> probes;
    std::vector<std::pair<SimTime, std::uint64_t>> acked;  // (time, newly acked bytes)
    std::uint64_t data_segments = 0;
    std::uint64_t retransmissions = 0;
    std::uint64_t empty_segments = 0;
    std::uint64_t gating_violations = 0;  // new data sent with flight > floor(cwnd)
    std::uint64_t timeouts_while_frozen = 0;
};

class Receiver;

/// Reliable byte-stream sender. Owns segmentation, ACK clocking, duplicate
/// ACK detection, loss recovery, the retransmission timer and the window
/// maintenance (freeze/probe/resume) procedure; delegates window sizing to
/// a CongestionController.
class Sender {
public:
    Sender(Simulator& sim, Path& path, TransportParams params, std::unique_ptr<CongestionController> cc,
           std::uint64_t payload_seed, SenderTrace* trace = nullptr);
    Sender(const Sender&) = delete;
    Sender& operator=(const Sender&) = delete;
    ~Sender();

    void connect(Receiver& receiver) noexcept { receiver_ = &receiver; }

    /// Appends `bytes` of application data and transmits what the window allows.
    void send(std::size_t bytes);
    /// No more data will follow; the completion handler fires once all of it is ACKed.
    void finish_input();
    void close();

    void on_complete(std::function<void(SimTime)> h) { on_complete_ = std::move(h); }
    void on_first_ack(std::function<void(SimTime)> h) { on_first_ack_ = std::move(h); }

    void on_ack(const Ack& ack);

    const CcState& cc_state() const noexcept { return cc_->state(); }
    const CongestionController& controller() const noexcept { return *cc_; }
    const RttHistory& history() const noexcept { return history_; }
    double rto() const { return rto_.current(); }
    bool frozen() const noexcept { return frozen_; }
    bool closed() const noexcept { return closed_; }
    bool completed() const noexcept { return completed_; }
    std::uint64_t snd_una() const noexcept { return snd_una_; }
    std::uint64_t snd_max() const noexcept { return snd_max_; }
    std::uint64_t app_bytes() const noexcept { return app_end_; }
    std::uint64_t input_checksum() const noexcept { return input_sum_.value(); }
    std::size_t segments_in_flight() const noexcept { return next_idx_; }
    const TransportParams& params() const noexcept { return params_; }

private:
    struct SegMeta {
        std::uint64_t seq;
        std::uint32_t len;
    };

    std::uint64_t snd_nxt() const noexcept;
    void try_send();
    void transmit_data(std::size_t idx);
    void transmit_header_only(std::uint64_t seq, bool probe);
    void go_back();
    std::uint64_t advance_una(std::uint64_t cum_ack);
    void on_triple_dup();
    void on_rto();
    void arm_rto(std::optional<SimDuration> after = std::nullopt);
    void cancel_rto();
    void arm_silence_check();
    void on_silence_check();
    void enter_maintenance(MaintenanceTrigger trigger);
    void exit_maintenance();
    void send_probe();
    void trace_window();
    void sync_base_rtt();
    void check_complete();

    Simulator& sim_;
    Path& path_;
    Receiver* receiver_ = nullptr;
    TransportParams params_;
    std::unique_ptr<CongestionController> cc_;
    std::uint64_t payload_seed_;
    SenderTrace* trace_;

    std::vector<std::uint8_t> buf_;  // unacknowledged application bytes
    std::uint64_t buf_base_ = 0;     // sequence number of buf_[0]
    std::uint64_t app_end_ = 0;
    StreamChecksum input_sum_;
    bool input_finished_ = false;

    std::deque<SegMeta> segs_;  // formed segments from snd_una on
    std::size_t next_idx_ = 0;  // index of snd_nxt in segs_
    std::uint64_t snd_una_ = 0;
    std::uint64_t snd_max_ = 0;

    unsigned dupacks_ = 0;
    bool in_recovery_ = false;
    bool partial_seen_ = false;
    bool steady_recovery_ = false;
    std::optional<std::uint64_t> recover_;

    RttHistory history_;
    double base_rtt_ = 0.0;
    RtoEstimator rto_;
    std::optional<Ticket> rto_ticket_;
    SimTime rto_deadline_{};

    // Window maintenance.
    bool frozen_ = false;
    SimTime last_progress_{};
    std::optional<Ticket> silence_ticket_;
    std::optional<Ticket> probe_ticket_;
    std::optional<SimDuration> suspended_rto_;
    CcState last_good_state_;
    RtoEstimator last_good_rto_;

    bool got_first_ack_ = false;
    bool completed_ = false;
    bool closed_ = false;
    std::function<void(SimTime)> on_complete_;
    std::function<void(SimTime)> on_first_ack_;
};

/// Cumulative-ACK receiver with an unbounded reassembly buffer. ACKs every
/// arriving segment, header-only ones included.
class Receiver {
public:
    Receiver(Simulator& sim, Path& path, std::size_t header_bytes, bool keep_stream = false);
    Receiver(const Receiver&) = delete;
    Receiver& operator=(const Receiver&) = delete;

    void connect(Sender& sender) noexcept { sender_ = &sender; }
    void on_segment(const Segment& seg);

    std::uint64_t cum_ack() const noexcept { return rcv_nxt_; }
    std::uint64_t checksum() const noexcept { return sum_.value(); }
    std::uint64_t duplicate_segments() const noexcept { return duplicates_; }
    const std::vector<std::uint8_t>& stream() const noexcept { return stream_; }

private:
    void deliver(std::span<const std::uint8_t> bytes);

    Simulator& sim_;
    Path& path_;
    Sender* sender_ = nullptr;
    std::size_t header_bytes_;
    bool keep_stream_;
    std::uint64_t rcv_nxt_ = 0;
    std::map<std::uint64_t, std::vector<std::uint8_t>> out_of_order_;
    StreamChecksum sum_;
    std::uint64_t duplicates_ = 0;
    std::vector<std::uint8_t> stream_;
};

/// Sender/receiver pair sharing one path.
class Connection {
public:
    Connection(Simulator& sim, Path& path, const TransportParams& params, std::unique_ptr<CongestionController> cc,
               std::uint64_t payload_seed, SenderTrace* trace = nullptr, bool keep_stream = false);

    Sender& sender() noexcept { return sender_; }
    Receiver& receiver() noexcept { return receiver_; }
    const Sender& sender() const noexcept { return sender_; }
    const Receiver& receiver() const noexcept { return receiver_; }

private:
    Sender sender_;
    Receiver receiver_;
};

/// Deterministic application payload: byte `offset` of stream `seed`.
std::uint8_t payload_byte(std::uint64_t seed, std::uint64_t offset) noexcept;

}  // namespace spacecc
