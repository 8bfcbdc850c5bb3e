#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "spacecc/sim_core.hpp"

namespace spacecc {

enum class Direction { Forward, Reverse };

struct LinkSpec {
    double prop_delay = 0.0;        // s
    double forward_rate = 10e6;     // bit/s
    double reverse_rate = 1e6;      // bit/s
    double loss_prob = 0.0;         // per packet, i.i.d.
    std::size_t queue_capacity = 100;  // packets waiting behind the one in service

    void validate() const;
    bool operator==(const LinkSpec&) const = default;
};

struct OutageWindow {
    SimTime start;
    SimTime end;
    bool operator==(const OutageWindow&) const = default;
};

/// End-to-end chain of point-to-point hops. Forward traffic crosses links
/// 0..n-1 in order; reverse traffic crosses them backwards.
struct PathSpec {
    std::vector<LinkSpec> links;
    std::vector<std::vector<OutageWindow>> outages;  // empty, or one list per link

    void validate() const;
    double propagation_delay() const;  // one way, s
    std::size_t bottleneck_link() const;  // lowest forward rate; first on ties
    /// 1 - prod(1 - p_i) over all links.
    double end_to_end_loss() const;
    /// Sets every link to the same p so the end-to-end loss equals `loss`.
    void set_end_to_end_loss(double loss);

    bool operator==(const PathSpec&) const = default;
};

enum class Outcome { Delivered, LostRandom, DroppedQueueFull, BlackholedOutage };
std::string_view to_string(Outcome o);

struct DeliveryOutcome {
    Outcome kind = Outcome::Delivered;
    SimTime at;              // delivery time, or the time the packet was discarded
    std::size_t link = 0;    // link where the packet ended its journey
};

/// Packet-level model of a PathSpec inside one simulation.
///
/// Each link direction is a FIFO transmitter with a drop-tail queue. A packet
/// entering a hop is queued behind earlier packets, serialized at the lane
/// rate, then propagates. Outages blackhole any packet whose time on the hop
/// overlaps a window; otherwise a Bernoulli draw keyed by the lane's packet
/// index decides random loss. Keying by index means two runs with the same
/// seed see identical loss decisions for the i-th packet of each lane.
class Path {
public:
    using Handler = std::function<void(const DeliveryOutcome&)>;

    struct Counters {
        std::uint64_t offered = 0;
        std::uint64_t delivered = 0;
        std::uint64_t lost_random = 0;
        std::uint64_t dropped_queue = 0;
        std::uint64_t blackholed = 0;
    };

    Path(Simulator& sim, PathSpec spec, std::uint64_t seed);
    Path(const Path&) = delete;
    Path& operator=(const Path&) = delete;

    /// Hands a packet of `wire_bytes` to the path at the current clock. The
    /// handler is called exactly once, when the packet is delivered or as
    /// soon as it is discarded.
    void transmit(std::size_t wire_bytes, Direction dir, Handler on_outcome);

    /// Fraction of [from, to] during which the bottleneck forward transmitter
    /// was serializing. Throws WindowNotElapsed if `to` is in the future.
    double utilization_sample(SimTime from, SimTime to) const;

    const PathSpec& spec() const noexcept { return spec_; }
    std::size_t bottleneck_index() const noexcept { return bottleneck_; }
    const Counters& counters(Direction dir) const noexcept { return counters_[index(dir)]; }
    /// Packets offered so far to one link direction (the loss-draw index).
    std::uint64_t lane_packets(std::size_t link, Direction dir) const;

private:
    struct Lane {
        double rate = 1.0;
        std::size_t capacity = 1;
        double loss_prob = 0.0;
        SimTime busy_until{};
        std::deque<SimTime> in_system;  // finish times of accepted packets
        std::uint64_t offered = 0;
        RngStream loss;
    };

    static constexpr std::size_t index(Direction d) noexcept { return d == Direction::Forward ? 0 : 1; }
    Lane& lane(std::size_t link, Direction dir) { return lanes_[link * 2 + index(dir)]; }
    const Lane& lane(std::size_t link, Direction dir) const { return lanes_[link * 2 + index(dir)]; }
    bool overlaps_outage(std::size_t link, SimTime from, SimTime to) const;
    void enter_hop(std::size_t hop, Direction dir, std::size_t wire_bytes, Handler on_outcome);
    void finish(Direction dir, const DeliveryOutcome& outcome, const Handler& on_outcome);

    Simulator& sim_;
    PathSpec spec_;
    std::size_t bottleneck_;
    std::vector<Lane> lanes_;
    std::array<Counters, 2> counters_{};
    std::vector<std::pair<SimTime, SimTime>> bottleneck_busy_;  // merged busy intervals
};

}  // namespace spacecc
