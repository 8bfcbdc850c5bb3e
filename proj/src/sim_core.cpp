#include "spacecc/sim_core.hpp"

#include <cmath>

#include "spacecc/errors.hpp"

namespace spacecc {

SimDuration from_seconds(double seconds) {
    if (!std::isfinite(seconds)) {
        throw std::invalid_argument("time value is not finite");
    }
    return SimDuration{static_cast<SimClock::rep>(std::llround(seconds * 1e9))};
}

Ticket Simulator::schedule(SimTime at, std::function<void()> action) {
    if (at < now_) {
        throw SchedulingInPast("event at t=" + std::to_string(to_seconds(at)) +
                               " s is before the clock (t=" + std::to_string(to_seconds(now_)) + " s)");
    }
    const auto seq = next_seq_++;
    queue_.push(Entry{at, seq});
    actions_.emplace(seq, std::move(action));
    return seq;
}

Ticket Simulator::schedule_in(SimDuration delay, std::function<void()> action) {
    return schedule(now_ + delay, std::move(action));
}

bool Simulator::cancel(Ticket ticket) { return actions_.erase(ticket) > 0; }

void Simulator::drop_cancelled_head() {
    while (!queue_.empty() && !actions_.contains(queue_.top().seq)) {
        queue_.pop();
    }
}

std::optional<SimTime> Simulator::next_event_time() {
    drop_cancelled_head();
    if (queue_.empty()) return std::nullopt;
    return queue_.top().fire_at;
}

void Simulator::deliver(const Entry& e) {
    auto node = actions_.extract(e.seq);
    now_ = e.fire_at;
    ++processed_;
    auto fold = [this](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            digest_ ^= (v >> (8 * i)) & 0xffU;
            digest_ *= 0x100000001b3ULL;
        }
    };
    fold(static_cast<std::uint64_t>(e.fire_at.time_since_epoch().count()));
    fold(e.seq);
    node.mapped()();
}

std::uint64_t Simulator::run_until(SimTime end) {
    std::uint64_t count = 0;
    for (;;) {
        drop_cancelled_head();
        if (queue_.empty() || queue_.top().fire_at > end) break;
        const Entry e = queue_.top();
        queue_.pop();
        deliver(e);
        ++count;
    }
    if (end > now_) now_ = end;
    return count;
}

std::uint64_t Simulator::run() {
    std::uint64_t count = 0;
    for (;;) {
        drop_cancelled_head();
        if (queue_.empty()) break;
        const Entry e = queue_.top();
        queue_.pop();
        deliver(e);
        ++count;
    }
    return count;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

RngStream::RngStream(std::uint64_t seed, std::string_view label)
    : seed_(seed), label_(label), key_(mix64(seed ^ 0x6a09e667f3bcc909ULL) ^ fnv1a64(label)) {}

std::uint64_t RngStream::at(std::uint64_t counter) const noexcept {
    return mix64(key_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
}

double RngStream::uniform_at(std::uint64_t counter) const noexcept {
    return static_cast<double>((at(counter) >> 11) + 1) * 0x1.0p-53;
}

}  // namespace spacecc
