#include "spacecc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spacecc/errors.hpp"

namespace spacecc {

void LinkSpec::validate() const {
    if (!(prop_delay >= 0.0) || !std::isfinite(prop_delay)) {
        throw InvalidConfig("prop_delay must be a finite value >= 0");
    }
    if (!(forward_rate > 0.0) || !(reverse_rate > 0.0)) {
        throw InvalidConfig("link rates must be positive");
    }
    if (!(loss_prob >= 0.0 && loss_prob <= 1.0)) {
        throw InvalidConfig("loss_prob must be in [0, 1]");
    }
    if (queue_capacity < 1) {
        throw InvalidConfig("queue_capacity must be at least 1");
    }
}

void PathSpec::validate() const {
    if (links.empty()) throw InvalidConfig("path needs at least one link");
    for (const auto& l : links) l.validate();
    if (!outages.empty() && outages.size() != links.size()) {
        throw InvalidConfig("outages must be empty or list one entry per link");
    }
    for (const auto& windows : outages) {
        for (std::size_t i = 0; i < windows.size(); ++i) {
            if (!(windows[i].start < windows[i].end)) {
                throw InvalidConfig("outage window must have start < end");
            }
            if (i > 0 && windows[i].start < windows[i - 1].end) {
                throw InvalidConfig("outage windows must be sorted and non-overlapping");
            }
        }
    }
}

double PathSpec::propagation_delay() const {
    double d = 0.0;
    for (const auto& l : links) d += l.prop_delay;
    return d;
}

std::size_t PathSpec::bottleneck_link() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < links.size(); ++i) {
        if (links[i].forward_rate < links[best].forward_rate) best = i;
    }
    return best;
}

double PathSpec::end_to_end_loss() const {
    double survive = 1.0;
    for (const auto& l : links) survive *= 1.0 - l.loss_prob;
    return 1.0 - survive;
}

void PathSpec::set_end_to_end_loss(double loss) {
    if (!(loss >= 0.0 && loss <= 1.0)) throw InvalidConfig("loss rate must be in [0, 1]");
    if (links.empty()) return;
    const double p = loss >= 1.0 ? 1.0 : 1.0 - std::pow(1.0 - loss, 1.0 / static_cast<double>(links.size()));
    for (auto& l : links) l.loss_prob = p;
}

std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::Delivered: return "delivered";
        case Outcome::LostRandom: return "lost_random";
        case Outcome::DroppedQueueFull: return "dropped_queue_full";
        case Outcome::BlackholedOutage: return "blackholed_outage";
    }
    return "unknown";
}

Path::Path(Simulator& sim, PathSpec spec, std::uint64_t seed)
    : sim_(sim), spec_(std::move(spec)) {
    spec_.validate();
    bottleneck_ = spec_.bottleneck_link();
    lanes_.reserve(spec_.links.size() * 2);
    for (std::size_t i = 0; i < spec_.links.size(); ++i) {
        const auto& l = spec_.links[i];
        for (Direction d : {Direction::Forward, Direction::Reverse}) {
            const bool fwd = d == Direction::Forward;
            const std::string label = "loss/" + std::to_string(i) + (fwd ? "/fwd" : "/rev");
            lanes_.push_back(Lane{fwd ? l.forward_rate : l.reverse_rate, l.queue_capacity, l.loss_prob,
                                  SimTime{}, {}, 0, RngStream(seed, label)});
        }
    }
}

std::uint64_t Path::lane_packets(std::size_t link, Direction dir) const { return lane(link, dir).offered; }

bool Path::overlaps_outage(std::size_t link, SimTime from, SimTime to) const {
    if (spec_.outages.empty()) return false;
    const auto& windows = spec_.outages[link];
    auto it = std::upper_bound(windows.begin(), windows.end(), from,
                               [](SimTime t, const OutageWindow& w) { return t < w.end; });
    return it != windows.end() && it->start <= to;
}

void Path::transmit(std::size_t wire_bytes, Direction dir, Handler on_outcome) {
    ++counters_[index(dir)].offered;
    enter_hop(0, dir, wire_bytes, std::move(on_outcome));
}

void Path::finish(Direction dir, const DeliveryOutcome& outcome, const Handler& on_outcome) {
    auto& c = counters_[index(dir)];
    switch (outcome.kind) {
        case Outcome::Delivered: ++c.delivered; break;
        case Outcome::LostRandom: ++c.lost_random; break;
        case Outcome::DroppedQueueFull: ++c.dropped_queue; break;
        case Outcome::BlackholedOutage: ++c.blackholed; break;
    }
    if (on_outcome) on_outcome(outcome);
}

void Path::enter_hop(std::size_t hop, Direction dir, std::size_t wire_bytes, Handler on_outcome) {
    const std::size_t n = spec_.links.size();
    const std::size_t link = dir == Direction::Forward ? hop : n - 1 - hop;
    Lane& ln = lane(link, dir);
    const SimTime now = sim_.now();
    const std::uint64_t packet_index = ln.offered++;

    while (!ln.in_system.empty() && ln.in_system.front() <= now) ln.in_system.pop_front();
    if (ln.in_system.size() >= ln.capacity + 1) {
        finish(dir, {Outcome::DroppedQueueFull, now, link}, on_outcome);
        return;
    }

    const SimTime start = std::max(now, ln.busy_until);
    const SimTime done = start + from_seconds(static_cast<double>(wire_bytes) * 8.0 / ln.rate);
    ln.busy_until = done;
    ln.in_system.push_back(done);
    if (dir == Direction::Forward && link == bottleneck_ && done > start) {
        if (!bottleneck_busy_.empty() && bottleneck_busy_.back().second >= start) {
            bottleneck_busy_.back().second = std::max(bottleneck_busy_.back().second, done);
        } else {
            bottleneck_busy_.emplace_back(start, done);
        }
    }
    const SimTime arrive = done + from_seconds(spec_.links[link].prop_delay);

    if (overlaps_outage(link, start, arrive)) {
        finish(dir, {Outcome::BlackholedOutage, now, link}, on_outcome);
        return;
    }
    if (ln.loss_prob > 0.0 && ln.loss.uniform_at(packet_index) <= ln.loss_prob) {
        finish(dir, {Outcome::LostRandom, now, link}, on_outcome);
        return;
    }

    if (hop + 1 == n) {
        sim_.schedule(arrive, [this, dir, link, arrive, h = std::move(on_outcome)]() {
            finish(dir, {Outcome::Delivered, arrive, link}, h);
        });
    } else {
        sim_.schedule(arrive, [this, hop, dir, wire_bytes, h = std::move(on_outcome)]() mutable {
            enter_hop(hop + 1, dir, wire_bytes, std::move(h));
        });
    }
}

double Path::utilization_sample(SimTime from, SimTime to) const {
    if (to > sim_.now()) {
        throw WindowNotElapsed("utilization window ends at t=" + std::to_string(to_seconds(to)) +
                               " s but the clock is at t=" + std::to_string(to_seconds(sim_.now())) + " s");
    }
    if (!(from < to)) return 0.0;
    auto it = std::upper_bound(bottleneck_busy_.begin(), bottleneck_busy_.end(), from,
                               [](SimTime t, const auto& iv) { return t < iv.second; });
    SimDuration busy{0};
    for (; it != bottleneck_busy_.end() && it->first < to; ++it) {
        busy += std::min(it->second, to) - std::max(it->first, from);
    }
    return std::clamp(to_seconds(busy) / to_seconds(to - from), 0.0, 1.0);
}

}  // namespace spacecc
