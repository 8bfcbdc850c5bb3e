#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "spacecc/channel.hpp"
#include "spacecc/errors.hpp"

using namespace spacecc;

namespace {

PathSpec single(double prop, double rate, double loss = 0.0, std::size_t queue = 100) {
    PathSpec p;
    p.links = {LinkSpec{prop, rate, rate, loss, queue}};
    return p;
}

}  // namespace

TEST(PathSpec, ValidatesLinksAndOutages) {
    PathSpec p;
    EXPECT_THROW(p.validate(), InvalidConfig);
    p = single(0.1, 1e6);
    p.links[0].loss_prob = 1.5;
    EXPECT_THROW(p.validate(), InvalidConfig);
    p = single(0.1, 1e6);
    p.outages = {{OutageWindow{at_seconds(5), at_seconds(4)}}};
    EXPECT_THROW(p.validate(), InvalidConfig);
    p.outages = {{OutageWindow{at_seconds(1), at_seconds(4)}, OutageWindow{at_seconds(3), at_seconds(6)}}};
    EXPECT_THROW(p.validate(), InvalidConfig);
}

TEST(PathSpec, EndToEndLossSplitsEvenly) {
    PathSpec p;
    p.links.assign(3, LinkSpec{});
    p.set_end_to_end_loss(0.01);
    EXPECT_NEAR(p.end_to_end_loss(), 0.01, 1e-15);
    EXPECT_DOUBLE_EQ(p.links[0].loss_prob, p.links[2].loss_prob);
    EXPECT_THROW(p.set_end_to_end_loss(-0.1), InvalidConfig);
}

TEST(PathSpec, BottleneckIsSlowestForwardLink) {
    PathSpec p;
    p.links = {LinkSpec{0.0, 100e6, 1e6}, LinkSpec{0.0, 10e6, 1e6}, LinkSpec{0.0, 10e6, 1e6}};
    EXPECT_EQ(p.bottleneck_link(), 1u);
}

TEST(Path, LosslessDeliveryTime) {
    Simulator sim;
    Path path(sim, single(0.25, 10e6), 1);
    std::optional<DeliveryOutcome> out;
    path.transmit(1000, Direction::Forward, [&](const DeliveryOutcome& o) { out = o; });
    sim.run();
    ASSERT_TRUE(out);
    EXPECT_EQ(out->kind, Outcome::Delivered);
    EXPECT_EQ(out->at, at_seconds(0.2508));
}

TEST(Path, CertainLossAlwaysLoses) {
    Simulator sim;
    Path path(sim, single(0.01, 10e6, 1.0), 1);
    int lost = 0;
    for (int i = 0; i < 100; ++i) {
        path.transmit(100, Direction::Forward, [&](const DeliveryOutcome& o) { lost += o.kind == Outcome::LostRandom; });
    }
    sim.run();
    EXPECT_EQ(lost, 100);
}

TEST(Path, OutageBlackholes) {
    Simulator sim;
    PathSpec spec = single(0.1, 10e6);
    spec.outages = {{OutageWindow{at_seconds(1.0), at_seconds(2.0)}}};
    Path path(sim, spec, 1);
    std::vector<Outcome> outcomes;
    for (double t : {0.5, 0.95, 1.5, 2.5}) {
        sim.schedule(at_seconds(t), [&] {
            path.transmit(1000, Direction::Forward, [&](const DeliveryOutcome& o) { outcomes.push_back(o.kind); });
        });
    }
    sim.run();
    ASSERT_EQ(outcomes.size(), 4u);
    EXPECT_EQ(outcomes[0], Outcome::Delivered);
    EXPECT_EQ(outcomes[1], Outcome::BlackholedOutage);  // still propagating when the outage starts
    EXPECT_EQ(outcomes[2], Outcome::BlackholedOutage);
    EXPECT_EQ(outcomes[3], Outcome::Delivered);
}

TEST(Path, DropTailWhenQueueIsFull) {
    Simulator sim;
    Path path(sim, single(0.0, 8000.0, 0.0, 2), 1);  // 1 s per 1000-byte packet
    std::vector<Outcome> outcomes;
    for (int i = 0; i < 5; ++i) {
        path.transmit(1000, Direction::Forward, [&](const DeliveryOutcome& o) { outcomes.push_back(o.kind); });
    }
    sim.run();
    int delivered = 0, dropped = 0;
    for (auto o : outcomes) {
        delivered += o == Outcome::Delivered;
        dropped += o == Outcome::DroppedQueueFull;
    }
    EXPECT_EQ(delivered, 3);  // one in service plus two waiting
    EXPECT_EQ(dropped, 2);
    EXPECT_EQ(path.counters(Direction::Forward).dropped_queue, 2u);
}

TEST(Path, ReverseUsesReverseRate) {
    Simulator sim;
    PathSpec spec;
    spec.links = {LinkSpec{0.1, 10e6, 1e6, 0.0, 10}};
    Path path(sim, spec, 1);
    SimTime at;
    path.transmit(1000, Direction::Reverse, [&](const DeliveryOutcome& o) { at = o.at; });
    sim.run();
    EXPECT_EQ(at, at_seconds(0.1 + 0.008));
}

TEST(Path, UtilizationSamples) {
    Simulator sim;
    Path path(sim, single(0.0, 10e6, 0.0, 5000), 1);
    EXPECT_THROW(path.utilization_sample(at_seconds(0), at_seconds(1)), WindowNotElapsed);
    sim.run_until(at_seconds(1.0));
    EXPECT_DOUBLE_EQ(path.utilization_sample(at_seconds(0), at_seconds(1)), 0.0);
    path.transmit(1000, Direction::Forward, {});
    sim.run_until(at_seconds(2.0));
    EXPECT_NEAR(path.utilization_sample(at_seconds(1), at_seconds(2)), 0.0008, 1e-12);

    for (int i = 0; i < 1250; ++i) path.transmit(1000, Direction::Forward, {});
    sim.run_until(at_seconds(3.0));
    EXPECT_NEAR(path.utilization_sample(at_seconds(2), at_seconds(3)), 1.0, 1e-9);
}

TEST(Path, LossDecisionsArePairedByPacketIndex) {
    auto pattern = [](std::size_t bytes) {
        Simulator sim;
        Path path(sim, single(0.05, 1e9, 0.2, 100000), 99);
        std::vector<bool> lost;
        for (int i = 0; i < 500; ++i) {
            path.transmit(bytes, Direction::Forward, [&, i](const DeliveryOutcome& o) {
                if (lost.size() <= static_cast<std::size_t>(i)) lost.resize(static_cast<std::size_t>(i) + 1);
                lost[static_cast<std::size_t>(i)] = o.kind == Outcome::LostRandom;
            });
        }
        sim.run();
        return lost;
    };
    EXPECT_EQ(pattern(40), pattern(1040));
}

TEST(PropertyChannel, EveryPacketHasExactlyOneOutcome) {
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        RngStream r(seed, "channel-prop");
        PathSpec spec;
        const int n = 1 + static_cast<int>(r.next_uniform() * 3);
        for (int k = 0; k < n; ++k) {
            spec.links.push_back(LinkSpec{r.next_uniform() * 0.2, 1e5 + r.next_uniform() * 1e7, 1e5 + r.next_uniform() * 1e6,
                                          r.next_uniform() * 0.1, 1 + static_cast<std::size_t>(r.next_uniform() * 20)});
        }
        if (r.next_uniform() < 0.3) {
            spec.outages.assign(spec.links.size(), {});
            spec.outages[0] = {OutageWindow{at_seconds(0.2), at_seconds(0.4)}};
        }
        Simulator sim;
        Path path(sim, spec, seed);
        constexpr int packets = 60;
        std::vector<int> outcomes(packets, 0);
        SimTime last_delivery{};
        for (int i = 0; i < packets; ++i) {
            const double at = r.next_uniform() * 1.0;
            const auto bytes = static_cast<std::size_t>(40 + r.next_uniform() * 1000);
            sim.schedule(at_seconds(at), [&, i, bytes] {
                path.transmit(bytes, Direction::Forward, [&, i](const DeliveryOutcome& o) {
                    ++outcomes[static_cast<std::size_t>(i)];
                    if (o.kind == Outcome::Delivered) {
                        ASSERT_GE(o.at, last_delivery);
                        last_delivery = o.at;
                    }
                });
            });
        }
        sim.run();
        for (int c : outcomes) ASSERT_EQ(c, 1) << "seed " << seed;
        const auto& ct = path.counters(Direction::Forward);
        ASSERT_EQ(ct.offered, ct.delivered + ct.lost_random + ct.dropped_queue + ct.blackholed);
        ASSERT_EQ(ct.offered, static_cast<std::uint64_t>(packets));
    }
}

TEST(PropertyChannel, FifoPerLaneWithVariableSizes) {
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        RngStream r(seed, "fifo");
        PathSpec spec;
        spec.links = {LinkSpec{0.01, 1e6, 1e6, 0.05, 1000}, LinkSpec{0.02, 5e5, 1e6, 0.05, 1000}};
        Simulator sim;
        Path path(sim, spec, seed);
        std::vector<int> order;
        for (int i = 0; i < 40; ++i) {
            // Sends happen in index order at non-decreasing times.
            sim.schedule(at_seconds(0.001 * i), [&, i] {
                path.transmit(static_cast<std::size_t>(40 + r.next_uniform() * 1500), Direction::Forward,
                              [&, i](const DeliveryOutcome& o) {
                                  if (o.kind == Outcome::Delivered) order.push_back(i);
                              });
            });
        }
        sim.run();
        ASSERT_TRUE(std::is_sorted(order.begin(), order.end())) << "seed " << seed;
    }
}

TEST(PropertyChannel, OutageWindowSeesNoDeliveries) {
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        RngStream r(seed, "outage");
        const double start = 0.5 + r.next_uniform();
        const double end = start + 0.1 + r.next_uniform();
        const double prop = 0.05 + r.next_uniform() * 0.2;
        PathSpec spec = single(prop, 1e6, 0.0, 1000);
        spec.outages = {{OutageWindow{at_seconds(start), at_seconds(end)}}};
        Simulator sim;
        Path path(sim, spec, seed);
        for (int i = 0; i < 100; ++i) {
            sim.schedule(at_seconds(r.next_uniform() * 3.0), [&] {
                path.transmit(500, Direction::Forward, [&](const DeliveryOutcome& o) {
                    if (o.kind != Outcome::Delivered) return;
                    // Serialization began no later than arrival minus the
                    // propagation and transmission times.
                    const double arrived = to_seconds(o.at);
                    const double left = arrived - prop - 500 * 8 / 1e6;
                    ASSERT_TRUE(arrived < start || left > end - 1e-9) << "seed " << seed;
                });
            });
        }
        sim.run();
    }
}

TEST(PropertyChannel, LossFractionWithinThreeSigma) {
    for (double p : {0.005, 0.01, 0.05, 0.3}) {
        Simulator sim;
        Path path(sim, single(0.0, 1e12, p, 1'000'000), 2024);
        constexpr int n = 200'000;
        int lost = 0;
        for (int i = 0; i < n; ++i) {
            path.transmit(1, Direction::Forward, [&](const DeliveryOutcome& o) { lost += o.kind == Outcome::LostRandom; });
        }
        sim.run();
        EXPECT_NEAR(static_cast<double>(lost) / n, p, 3.0 * std::sqrt(p * (1 - p) / n)) << "p=" << p;
    }
}
