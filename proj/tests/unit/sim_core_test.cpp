#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "spacecc/errors.hpp"
#include "spacecc/sim_core.hpp"

using namespace spacecc;

TEST(SimClock, SecondsRoundTripAtNanosecondGrain) {
    EXPECT_EQ(from_seconds(0.5).count(), 500'000'000);
    EXPECT_EQ(from_seconds(1e-9).count(), 1);
    EXPECT_DOUBLE_EQ(to_seconds(at_seconds(1200.0)), 1200.0);
}

TEST(Simulator, ScheduleReturnsTicketAndFiresAtTime) {
    Simulator sim;
    double fired = -1.0;
    const Ticket t = sim.schedule(at_seconds(0.5), [&] { fired = to_seconds(sim.now()); });
    EXPECT_EQ(t, 1u);
    EXPECT_TRUE(sim.pending(t));
    sim.run();
    EXPECT_DOUBLE_EQ(fired, 0.5);
}

TEST(Simulator, SameTimeEventsAreFifo) {
    Simulator sim;
    std::vector<int> order;
    for (int i = 0; i < 5; ++i) sim.schedule(at_seconds(1.0), [&order, i] { order.push_back(i); });
    sim.run();
    EXPECT_EQ(order, (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(Simulator, SchedulingInThePastThrows) {
    Simulator sim;
    sim.run_until(at_seconds(0.2));
    EXPECT_THROW(sim.schedule(at_seconds(0.1), [] {}), SchedulingInPast);
    EXPECT_NO_THROW(sim.schedule(at_seconds(0.2), [] {}));
}

TEST(Simulator, RunUntilOnEmptyQueueAdvancesClock) {
    Simulator sim;
    EXPECT_EQ(sim.run_until(at_seconds(10.0)), 0u);
    EXPECT_DOUBLE_EQ(to_seconds(sim.now()), 10.0);
}

TEST(Simulator, RunUntilStopsAtBoundary) {
    Simulator sim;
    for (double t : {1.0, 2.0, 3.0}) sim.schedule(at_seconds(t), [] {});
    EXPECT_EQ(sim.run_until(at_seconds(2.5)), 2u);
    EXPECT_EQ(sim.pending_count(), 1u);
    EXPECT_EQ(sim.run_until(at_seconds(3.0)), 1u);
}

TEST(Simulator, HandlerScheduledEventsWithinHorizonRun) {
    Simulator sim;
    int nested = 0;
    sim.schedule(at_seconds(1.0), [&] { sim.schedule_in(from_seconds(0.5), [&] { ++nested; }); });
    EXPECT_EQ(sim.run_until(at_seconds(2.0)), 2u);
    EXPECT_EQ(nested, 1);
}

TEST(Simulator, CancelSemantics) {
    Simulator sim;
    int fired = 0;
    const Ticket a = sim.schedule(at_seconds(1.0), [&] { ++fired; });
    const Ticket b = sim.schedule(at_seconds(2.0), [&] { ++fired; });
    EXPECT_TRUE(sim.cancel(a));
    EXPECT_FALSE(sim.cancel(a));
    sim.run();
    EXPECT_EQ(fired, 1);
    EXPECT_FALSE(sim.cancel(b));
}

TEST(Simulator, NextEventTimeSkipsCancelled) {
    Simulator sim;
    const Ticket a = sim.schedule(at_seconds(1.0), [] {});
    sim.schedule(at_seconds(3.0), [] {});
    sim.cancel(a);
    ASSERT_TRUE(sim.next_event_time());
    EXPECT_DOUBLE_EQ(to_seconds(*sim.next_event_time()), 3.0);
}

TEST(RngStream, OutputDependsOnlyOnSeedLabelCounter) {
    RngStream a(42, "loss/0/fwd");
    RngStream b(42, "loss/0/fwd");
    RngStream c(42, "loss/0/rev");
    RngStream d(43, "loss/0/fwd");
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        EXPECT_EQ(x, a.at(static_cast<std::uint64_t>(i)));
        EXPECT_NE(x, c.at(static_cast<std::uint64_t>(i)));
        EXPECT_NE(x, d.at(static_cast<std::uint64_t>(i)));
    }
}

TEST(RngStream, UniformIsInHalfOpenUnitInterval) {
    RngStream r(7, "u");
    double sum = 0.0;
    constexpr int n = 200'000;
    for (int i = 0; i < n; ++i) {
        const double u = r.next_uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LE(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(RngStream, WorksWithStdDistributions) {
    RngStream r(3, "std");
    std::uniform_int_distribution<int> die(1, 6);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 60'000; ++i) ++counts[static_cast<std::size_t>(die(r))];
    for (int k = 1; k <= 6; ++k) EXPECT_NEAR(counts[static_cast<std::size_t>(k)], 10'000, 400);
}

namespace {

std::uint64_t random_workload_digest(std::uint64_t seed, std::vector<double>* fire_times = nullptr) {
    Simulator sim;
    RngStream r(seed, "sched");
    std::vector<Ticket> tickets;
    for (int i = 0; i < 200; ++i) {
        const double t = r.next_uniform() * 10.0;
        tickets.push_back(sim.schedule(at_seconds(t), [&sim, &r, fire_times] {
            if (fire_times) fire_times->push_back(to_seconds(sim.now()));
            if (r.next_uniform() < 0.3) sim.schedule_in(from_seconds(r.next_uniform()), [&sim, fire_times] {
                if (fire_times) fire_times->push_back(to_seconds(sim.now()));
            });
        }));
    }
    for (std::size_t i = 0; i < tickets.size(); i += 7) sim.cancel(tickets[i]);
    sim.run();
    return sim.run_log_digest();
}

}  // namespace

TEST(PropertySimCore, DeterministicRunLogAndMonotoneClock) {
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        std::vector<double> times;
        const auto d1 = random_workload_digest(seed, &times);
        const auto d2 = random_workload_digest(seed);
        ASSERT_EQ(d1, d2) << "seed " << seed;
        ASSERT_TRUE(std::is_sorted(times.begin(), times.end())) << "seed " << seed;
    }
}

TEST(PropertySimCore, CancelledEventsNeverFire) {
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        Simulator sim;
        RngStream r(seed, "cancel");
        std::vector<int> fired(50, 0);
        std::vector<Ticket> tickets;
        for (int i = 0; i < 50; ++i) {
            tickets.push_back(sim.schedule(at_seconds(r.next_uniform()), [&fired, i] { ++fired[static_cast<std::size_t>(i)]; }));
        }
        std::vector<bool> cancelled(50, false);
        for (int i = 0; i < 50; ++i) {
            if (r.next_uniform() < 0.5) cancelled[static_cast<std::size_t>(i)] = sim.cancel(tickets[static_cast<std::size_t>(i)]);
        }
        sim.run_until(at_seconds(2.0));
        for (std::size_t i = 0; i < 50; ++i) ASSERT_EQ(fired[i], cancelled[i] ? 0 : 1) << "seed " << seed;
    }
}
