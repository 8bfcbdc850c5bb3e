#include "spacecc/connection.hpp"

#include <algorithm>
#include <cmath>

#include "spacecc/errors.hpp"

namespace spacecc {

namespace {

RtoEstimator::Params rto_params(const TransportParams& p) {
    RtoEstimator::Params r;
    r.initial = p.rtt_est > 0.0 ? 2.0 * p.rtt_est : 1.0;
    r.min = p.min_rto;
    r.max = p.max_rto;
    return r;
}

constexpr std::uint64_t kBufferTrimBytes = 1u << 16;

}  // namespace

std::string_view to_string(PartialAckTimer p) {
    switch (p) {
        case PartialAckTimer::Impatient: return "impatient";
        case PartialAckTimer::SlowButSteady: return "slow_but_steady";
        case PartialAckTimer::ByLossCause: return "by_loss_cause";
    }
    return "?";
}

PartialAckTimer parse_partial_ack_timer(std::string_view name) {
    for (auto p : {PartialAckTimer::Impatient, PartialAckTimer::SlowButSteady, PartialAckTimer::ByLossCause}) {
        if (name == to_string(p)) return p;
    }
    throw InvalidConfig("unknown partial_ack_timer '" + std::string(name) +
                        "' (expected impatient, slow_but_steady or by_loss_cause)");
}

void StreamChecksum::update(std::span<const std::uint8_t> bytes) noexcept {
    for (auto b : bytes) {
        h_ ^= b;
        h_ *= 0x100000001b3ULL;
    }
}

std::uint8_t payload_byte(std::uint64_t seed, std::uint64_t offset) noexcept {
    const std::uint64_t word = mix64(seed + (offset >> 3) * 0x9e3779b97f4a7c15ULL);
    return static_cast<std::uint8_t>(word >> ((offset & 7) * 8));
}

// --- sender ---------------------------------------------------------------

Sender::Sender(Simulator& sim, Path& path, TransportParams params, std::unique_ptr<CongestionController> cc,
               std::uint64_t payload_seed, SenderTrace* trace)
    : sim_(sim),
      path_(path),
      params_(params),
      cc_(std::move(cc)),
      payload_seed_(payload_seed),
      trace_(trace),
      history_(params.history_capacity),
      rto_(rto_params(params)),
      last_good_state_(cc_->state()),
      last_good_rto_(rto_) {
    trace_window();
}

Sender::~Sender() { close(); }

std::uint64_t Sender::snd_nxt() const noexcept {
    return next_idx_ < segs_.size() ? segs_[next_idx_].seq : snd_max_;
}

void Sender::send(std::size_t bytes) {
    if (closed_ || input_finished_ || bytes == 0) return;
    const std::size_t old = buf_.size();
    buf_.reserve(old + bytes);
    for (std::size_t i = 0; i < bytes; ++i) buf_.push_back(payload_byte(payload_seed_, app_end_ + i));
    input_sum_.update(std::span(buf_).subspan(old));
    app_end_ += bytes;
    try_send();
}

void Sender::finish_input() {
    input_finished_ = true;
    check_complete();
}

void Sender::close() {
    closed_ = true;
    cancel_rto();
    if (silence_ticket_) sim_.cancel(*silence_ticket_);
    if (probe_ticket_) sim_.cancel(*probe_ticket_);
    silence_ticket_.reset();
    probe_ticket_.reset();
}

void Sender::try_send() {
    if (closed_ || frozen_ || receiver_ == nullptr) return;
    for (;;) {
        const double allowed = std::floor(cc_->state().cwnd);
        if (static_cast<double>(next_idx_) >= allowed) break;
        if (next_idx_ == segs_.size()) {
            if (snd_max_ >= app_end_) break;
            const auto len = static_cast<std::uint32_t>(std::min<std::uint64_t>(params_.mss, app_end_ - snd_max_));
            segs_.push_back({snd_max_, len});
        }
        const bool with_empty = cc_->wants_empty_segment();
        const std::size_t idx = next_idx_++;
        transmit_data(idx);
        if (trace_) {
            const double flight = static_cast<double>(snd_nxt() - snd_una_);
            if (flight > allowed * static_cast<double>(params_.mss)) ++trace_->gating_violations;
        }
        if (with_empty) transmit_header_only(segs_[idx].seq + segs_[idx].len, false);
    }
    if (next_idx_ > 0 && !rto_ticket_) arm_rto();
    arm_silence_check();
}

void Sender::transmit_data(std::size_t idx) {
    const SegMeta m = segs_[idx];
    const SimTime now = sim_.now();
    if (snd_una_ == snd_max_) last_progress_ = now;

    Segment seg;
    seg.seq = m.seq;
    seg.len = m.len;
    seg.sent_at = now;
    seg.is_retransmit = m.seq < snd_max_;
    const auto off = static_cast<std::size_t>(m.seq - buf_base_);
    seg.payload.assign(buf_.begin() + static_cast<std::ptrdiff_t>(off),
                       buf_.begin() + static_cast<std::ptrdiff_t>(off + m.len));
    snd_max_ = std::max<std::uint64_t>(snd_max_, m.seq + m.len);

    if (trace_) {
        ++trace_->data_segments;
        if (seg.is_retransmit) ++trace_->retransmissions;
    }
    path_.transmit(m.len + params_.header_bytes, Direction::Forward,
                   [r = receiver_, s = std::move(seg)](const DeliveryOutcome& o) {
                       if (o.kind == Outcome::Delivered) r->on_segment(s);
                   });
}

void Sender::transmit_header_only(std::uint64_t seq, bool probe) {
    Segment seg;
    seg.seq = seq;
    seg.is_empty = true;
    seg.is_probe = probe;
    seg.sent_at = sim_.now();
    if (trace_) {
        ++trace_->empty_segments;
        if (probe) trace_->probes.push_back(seg.sent_at);
    }
    path_.transmit(params_.header_bytes, Direction::Forward,
                   [r = receiver_, s = std::move(seg)](const DeliveryOutcome& o) {
                       if (o.kind == Outcome::Delivered) r->on_segment(s);
                   });
}

void Sender::go_back() { next_idx_ = 0; }

std::uint64_t Sender::advance_una(std::uint64_t cum_ack) {
    const std::uint64_t acked = cum_ack - snd_una_;
    while (!segs_.empty() && segs_.front().seq + segs_.front().len <= cum_ack) {
        segs_.pop_front();
        if (next_idx_ > 0) --next_idx_;
    }
    snd_una_ = cum_ack;
    const std::uint64_t consumed = snd_una_ - buf_base_;
    if (consumed >= kBufferTrimBytes && consumed * 2 >= buf_.size()) {
        buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(consumed));
        buf_base_ = snd_una_;
    }
    if (trace_) trace_->acked.emplace_back(sim_.now(), acked);
    return acked;
}

void Sender::on_ack(const Ack& ack) {
    if (closed_) return;
    const SimTime now = sim_.now();
    if (!got_first_ack_) {
        got_first_ack_ = true;
        if (on_first_ack_) on_first_ack_(now);
        if (closed_) return;
    }
    last_progress_ = now;
    const double rtt = to_seconds(now - ack.echo_sent_at);

    if (frozen_) {
        // Window and RTT history stay untouched until a probe comes back.
        if (ack.cum_ack > snd_una_) advance_una(ack.cum_ack);
        if (ack.for_probe) exit_maintenance();
        check_complete();
        return;
    }

    if (cc_->maintains_window() && params_.rtt_est > 0.0 && maintenance_check(params_.rtt_est, rtt)) {
        if (ack.cum_ack > snd_una_) advance_una(ack.cum_ack);
        enter_maintenance(MaintenanceTrigger::RttSample);
        check_complete();
        return;
    }

    history_.record(now, rtt);
    base_rtt_ = base_rtt_ == 0.0 ? rtt : std::min(base_rtt_, rtt);
    rto_.on_sample(rtt);
    sync_base_rtt();

    AckContext ctx;
    ctx.now = now;
    ctx.for_empty = ack.for_empty;
    ctx.cum_ack = ack.cum_ack;
    ctx.rtt = rtt;
    ctx.history = &history_;
    const auto style = cc_->recovery_style();

    if (ack.cum_ack > snd_una_) {
        ctx.acked_bytes = advance_una(ack.cum_ack);
        dupacks_ = 0;
        rto_.reset_backoff();
        bool restart_timer = true;
        if (in_recovery_) {
            if (style == RecoveryStyle::Reno || snd_una_ >= recover_.value_or(0)) {
                in_recovery_ = false;
                cc_->on_recovery_exit();
            } else {
                // Partial ACK: the next hole is lost too.
                if (next_idx_ > 0) transmit_data(0);
                restart_timer = steady_recovery_ || !partial_seen_;
                partial_seen_ = true;
            }
        } else {
            ctx.snd_nxt = snd_nxt();
            cc_->on_ack(ctx);
        }
        trace_window();
        if (snd_una_ >= snd_max_) {
            cancel_rto();
        } else if (restart_timer) {
            arm_rto();
        }
    } else if (ack.for_empty && !ack.for_probe && ack.cum_ack == snd_una_ && ack.cum_ack < ack.echo_seq &&
               !in_recovery_ && (!recover_ || snd_una_ >= *recover_)) {
        // The empty segment trailed the data ending at echo_seq on a FIFO
        // path, so a cumulative ACK short of it means that data was lost.
        on_triple_dup();
    } else if (ack.for_empty || ack.for_probe) {
        if (!in_recovery_) {
            ctx.snd_nxt = snd_nxt();
            cc_->on_ack(ctx);
            trace_window();
        }
    } else if (ack.cum_ack == snd_una_ && snd_una_ < snd_max_) {
        ++dupacks_;
        if (dupacks_ == params_.dupack_threshold && !in_recovery_ && (!recover_ || snd_una_ >= *recover_)) {
            on_triple_dup();
        } else if (in_recovery_ && dupacks_ > params_.dupack_threshold && style != RecoveryStyle::GoBackN) {
            cc_->on_recovery_dup_ack();
            trace_window();
        }
    }

    last_good_state_ = cc_->state();
    last_good_rto_ = rto_;
    check_complete();
    try_send();
}

void Sender::on_triple_dup() {
    const SimTime now = sim_.now();
    LossRecord rec;
    rec.kind = LossKind::TripleDup;
    rec.at = now;
    rec.before = cc_->state();

    LossContext ctx{now, &history_};
    const LossDecision d = cc_->on_triple_dup(ctx);
    recover_ = snd_max_;
    switch (params_.partial_ack_timer) {
        case PartialAckTimer::Impatient: steady_recovery_ = false; break;
        case PartialAckTimer::SlowButSteady: steady_recovery_ = true; break;
        case PartialAckTimer::ByLossCause: steady_recovery_ = d.cause == LossCause::RandomError; break;
    }
    if (cc_->recovery_style() == RecoveryStyle::GoBackN) {
        go_back();
    } else {
        in_recovery_ = true;
        partial_seen_ = false;
        transmit_data(0);
    }
    arm_rto();

    rec.after = cc_->state();
    rec.cause = d.cause;
    if (d.signal) {
        rec.sigma = d.signal->sigma;
        rec.k = d.signal->k;
    }
    if (trace_) trace_->losses.push_back(rec);
    trace_window();
}

void Sender::on_rto() {
    rto_ticket_.reset();
    if (closed_ || snd_una_ >= snd_max_) return;
    if (frozen_) {
        if (trace_) ++trace_->timeouts_while_frozen;
        return;
    }
    LossRecord rec;
    rec.kind = LossKind::Timeout;
    rec.at = sim_.now();
    rec.before = cc_->state();

    cc_->on_timeout();
    rto_.back_off();
    in_recovery_ = false;
    dupacks_ = 0;
    recover_ = snd_max_;
    go_back();

    rec.after = cc_->state();
    if (trace_) trace_->losses.push_back(rec);
    trace_window();
    try_send();
}

void Sender::arm_rto(std::optional<SimDuration> after) {
    cancel_rto();
    const SimDuration d = after.value_or(from_seconds(rto_.current()));
    rto_deadline_ = sim_.now() + d;
    rto_ticket_ = sim_.schedule(rto_deadline_, [this] { on_rto(); });
}

void Sender::cancel_rto() {
    if (rto_ticket_) sim_.cancel(*rto_ticket_);
    rto_ticket_.reset();
}

void Sender::arm_silence_check() {
    if (!cc_->maintains_window() || params_.rtt_est <= 0.0 || frozen_ || closed_ || silence_ticket_ ||
        snd_una_ >= snd_max_) {
        return;
    }
    const SimTime due = last_progress_ + from_seconds(10.0 * params_.rtt_est) + SimDuration{1};
    silence_ticket_ = sim_.schedule(std::max(due, sim_.now()), [this] { on_silence_check(); });
}

void Sender::on_silence_check() {
    silence_ticket_.reset();
    if (frozen_ || closed_ || snd_una_ >= snd_max_) return;
    const double silence = to_seconds(sim_.now() - last_progress_);
    if (maintenance_check(params_.rtt_est, std::nullopt, silence)) {
        enter_maintenance(MaintenanceTrigger::Silence);
    } else {
        arm_silence_check();
    }
}

void Sender::enter_maintenance(MaintenanceTrigger trigger) {
    const SimTime now = sim_.now();
    // The frozen window is the one in force at the last ACK: timeouts that
    // fired while the link was silent are attributed to the interruption.
    suspended_rto_.reset();
    if (rto_ticket_) suspended_rto_ = rto_deadline_ - now;
    cancel_rto();
    if (silence_ticket_) sim_.cancel(*silence_ticket_);
    silence_ticket_.reset();
    rto_ = last_good_rto_;

    CcState frozen = spacecc::enter_maintenance(last_good_state_);
    frozen.base_rtt = base_rtt_;
    cc_->restore(frozen);
    frozen_ = true;
    in_recovery_ = false;
    dupacks_ = 0;
    go_back();

    if (trace_) trace_->maintenance.push_back({now, trigger, frozen, std::nullopt, std::nullopt});
    trace_window();
    send_probe();
}

void Sender::send_probe() {
    probe_ticket_.reset();
    if (!frozen_ || closed_) return;
    transmit_header_only(snd_una_, true);
    probe_ticket_ = sim_.schedule_in(from_seconds(params_.probe_interval_factor * params_.rtt_est),
                                     [this] { send_probe(); });
}

void Sender::exit_maintenance() {
    const SimTime now = sim_.now();
    if (probe_ticket_) sim_.cancel(*probe_ticket_);
    probe_ticket_.reset();

    CcState resumed = spacecc::exit_maintenance(cc_->state());
    resumed.base_rtt = base_rtt_;
    cc_->restore(resumed);
    frozen_ = false;
    last_progress_ = now;
    if (trace_ && !trace_->maintenance.empty()) {
        trace_->maintenance.back().exited = now;
        trace_->maintenance.back().at_exit = resumed;
    }
    if (suspended_rto_ && snd_una_ < snd_max_) arm_rto(*suspended_rto_);
    suspended_rto_.reset();
    last_good_state_ = resumed;
    last_good_rto_ = rto_;
    trace_window();
    try_send();
}

void Sender::trace_window() {
    if (!trace_) return;
    const auto& s = cc_->state();
    if (!trace_->window.empty()) {
        const auto& last = trace_->window.back();
        if (last.cwnd == s.cwnd && last.ssthresh == s.ssthresh && last.phase == s.phase) return;
    }
    trace_->window.push_back({sim_.now(), s.cwnd, s.ssthresh, s.phase});
}

void Sender::sync_base_rtt() { cc_->set_base_rtt(base_rtt_); }

void Sender::check_complete() {
    if (completed_ || !input_finished_ || snd_una_ < app_end_) return;
    completed_ = true;
    auto handler = on_complete_;
    close();
    if (handler) handler(sim_.now());
}

// --- receiver -------------------------------------------------------------

Receiver::Receiver(Simulator& sim, Path& path, std::size_t header_bytes, bool keep_stream)
    : sim_(sim), path_(path), header_bytes_(header_bytes), keep_stream_(keep_stream) {}

void Receiver::deliver(std::span<const std::uint8_t> bytes) {
    sum_.update(bytes);
    rcv_nxt_ += bytes.size();
    if (keep_stream_) stream_.insert(stream_.end(), bytes.begin(), bytes.end());
}

void Receiver::on_segment(const Segment& seg) {
    if (seg.len > 0) {
        const std::uint64_t end = seg.seq + seg.len;
        if (end <= rcv_nxt_) {
            ++duplicates_;
        } else if (seg.seq <= rcv_nxt_) {
            deliver(std::span(seg.payload).subspan(static_cast<std::size_t>(rcv_nxt_ - seg.seq)));
            for (auto it = out_of_order_.begin(); it != out_of_order_.end() && it->first <= rcv_nxt_;
                 it = out_of_order_.erase(it)) {
                const std::uint64_t e = it->first + it->second.size();
                if (e > rcv_nxt_) deliver(std::span(it->second).subspan(static_cast<std::size_t>(rcv_nxt_ - it->first)));
            }
        } else if (!out_of_order_.try_emplace(seg.seq, seg.payload).second) {
            ++duplicates_;
        }
    }

    Ack ack;
    ack.cum_ack = rcv_nxt_;
    ack.echo_sent_at = seg.sent_at;
    ack.recv_at = sim_.now();
    ack.for_empty = seg.is_empty;
    ack.for_probe = seg.is_probe;
    ack.echo_seq = seg.seq;
    path_.transmit(header_bytes_, Direction::Reverse, [s = sender_, ack](const DeliveryOutcome& o) {
        if (o.kind == Outcome::Delivered && s != nullptr) s->on_ack(ack);
    });
}

Connection::Connection(Simulator& sim, Path& path, const TransportParams& params,
                       std::unique_ptr<CongestionController> cc, std::uint64_t payload_seed, SenderTrace* trace,
                       bool keep_stream)
    : sender_(sim, path, params, std::move(cc), payload_seed, trace),
      receiver_(sim, path, params.header_bytes, keep_stream) {
    sender_.connect(receiver_);
    receiver_.connect(sender_);
}

}  // namespace spacecc
