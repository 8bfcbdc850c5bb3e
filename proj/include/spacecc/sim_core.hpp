#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace spacecc {

// Simulated time is integer nanoseconds. Event ordering never depends on
// floating-point rounding.
struct SimClock {
    using rep = std::int64_t;
    using period = std::nano;
    using duration = std::chrono::duration<rep, period>;
    using time_point = std::chrono::time_point<SimClock>;
    static constexpr bool is_steady = true;
};

using SimDuration = SimClock::duration;
using SimTime = SimClock::time_point;

// Rounds to the nearest nanosecond.
SimDuration from_seconds(double seconds);
inline SimTime at_seconds(double seconds) { return SimTime{from_seconds(seconds)}; }

inline double to_seconds(SimDuration d) { return std::chrono::duration<double>(d).count(); }
inline double to_seconds(SimTime t) { return to_seconds(t.time_since_epoch()); }

using Ticket = std::uint64_t;

struct Event {
    SimTime fire_at;
    std::uint64_t sequence_no = 0;
    std::function<void()> action;
};

/// Single-threaded discrete-event engine.
///
/// Events fire in (fire_at, sequence_no) order, so ties are FIFO in
/// scheduling order. Handlers may schedule and cancel freely; anything they
/// schedule at or before the horizon of the current run_until() call is
/// delivered within the same call.
class Simulator {
public:
    Simulator() = default;
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    SimTime now() const noexcept { return now_; }

    /// Throws SchedulingInPast if at < now().
    Ticket schedule(SimTime at, std::function<void()> action);
    Ticket schedule_in(SimDuration delay, std::function<void()> action);

    bool cancel(Ticket ticket);
    bool pending(Ticket ticket) const { return actions_.contains(ticket); }
    std::size_t pending_count() const noexcept { return actions_.size(); }
    std::optional<SimTime> next_event_time();

    /// Delivers every event with fire_at <= end, then advances the clock to end.
    std::uint64_t run_until(SimTime end);
    /// Runs until the queue drains.
    std::uint64_t run();

    std::uint64_t events_processed() const noexcept { return processed_; }
    /// FNV-1a digest over (fire time, sequence number) of every delivered event.
    std::uint64_t run_log_digest() const noexcept { return digest_; }

private:
    struct Entry {
        SimTime fire_at;
        std::uint64_t seq;
        bool operator>(const Entry& o) const noexcept {
            return fire_at != o.fire_at ? fire_at > o.fire_at : seq > o.seq;
        }
    };

    void drop_cancelled_head();
    void deliver(const Entry& e);

    SimTime now_{};
    std::uint64_t next_seq_ = 1;
    std::uint64_t processed_ = 0;
    std::uint64_t digest_ = 0xcbf29ce484222325ULL;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue_;
    std::unordered_map<Ticket, std::function<void()>> actions_;
};

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based random stream. Output k is a pure function of
/// (seed, label, k), so every named stream is reproducible on its own and
/// independent of how many draws other streams made.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::string_view label);

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept { return next_u64(); }

    std::uint64_t next_u64() noexcept { return at(counter_++); }
    /// Uniform on (0, 1].
    double next_uniform() noexcept { return uniform_at(counter_++); }

    std::uint64_t at(std::uint64_t counter) const noexcept;
    double uniform_at(std::uint64_t counter) const noexcept;

    std::uint64_t counter() const noexcept { return counter_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::string& label() const noexcept { return label_; }

private:
    std::uint64_t seed_;
    std::string label_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace spacecc
