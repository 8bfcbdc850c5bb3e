// Whole-run invariants over randomized small scenarios.
#include <gtest/gtest.h>

#include <algorithm>

#include "spacecc/scenario.hpp"

using namespace spacecc;

namespace {

ScenarioConfig random_ftp(std::uint64_t seed) {
    RngStream r(seed, "run-prop");
    ScenarioConfig c;
    c.name = "prop";
    c.algorithm = all_algorithms()[static_cast<std::size_t>(r.next_uniform() * 5) % 5];
    c.duration = 120.0;
    c.sample_interval = 0.05 + r.next_uniform() * 0.5;
    const int n = 1 + static_cast<int>(r.next_uniform() * 3);
    for (int k = 0; k < n; ++k) {
        c.path.links.push_back(LinkSpec{0.001 + r.next_uniform() * 0.03, 5e5 + r.next_uniform() * 2e7,
                                        2e5 + r.next_uniform() * 2e6, 0.0,
                                        2 + static_cast<std::size_t>(r.next_uniform() * 80)});
    }
    c.end_to_end_loss = r.next_uniform() * 0.06;
    c.transport.min_rto = 0.2;
    c.initial_ssthresh = 2 + r.next_uniform() * 300;
    c.workload = FtpWorkload{1 + static_cast<std::uint64_t>(r.next_uniform() * 80'000), 0.0};
    return c;
}

}  // namespace

TEST(PropertyMetrics, UtilizationAndThroughputBounded) {
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        const ScenarioConfig cfg = random_ftp(seed);
        const RunResult res = run_single(cfg, seed, RunOptions{false, false});
        const RunReport& rep = res.report;
        const double bottleneck = cfg.path.links[cfg.path.bottleneck_link()].forward_rate;
        const double warmup = 2.0 * cfg.path.propagation_delay();

        ASSERT_TRUE(rep.summary.completion_time_s) << "seed " << seed;
        ASSERT_EQ(rep.summary.bytes_acked, std::get<FtpWorkload>(cfg.workload).total_bytes) << "seed " << seed;
        ASSERT_EQ(rep.summary.payload_intact, true) << "seed " << seed;
        ASSERT_GE(rep.summary.mean_utilization, 0.0);
        ASSERT_LE(rep.summary.mean_utilization, 1.0);
        for (const auto& s : rep.series) {
            for (const auto& p : s.points()) {
                if (s.name() == "utilization") {
                    ASSERT_GE(p.value, 0.0) << "seed " << seed;
                    ASSERT_LE(p.value, 1.0) << "seed " << seed;
                }
                if (s.name() == "throughput" && to_seconds(p.at) > warmup) {
                    ASSERT_LE(p.value, bottleneck * (1 + 1e-9)) << "seed " << seed << " t=" << to_seconds(p.at);
                }
            }
        }
        ASSERT_LE(rep.summary.mean_throughput_bps, bottleneck * (1 + 1e-9)) << "seed " << seed;
    }
}

TEST(PropertyMetrics, CallBytesMatchCompletedCalls) {
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        RngStream r(seed, "calls-prop");
        ScenarioConfig c;
        c.name = "calls";
        c.algorithm = all_algorithms()[seed % 5];
        c.duration = 6.0;
        c.path.links = {LinkSpec{0.01 + r.next_uniform() * 0.1, 1e6, 5e5, 0.0, 50}};
        c.end_to_end_loss = r.next_uniform() * 0.1;
        PoissonCallConfig w;
        w.lambda = 1 + r.next_uniform() * 5;
        w.horizon_end = 3.0;
        w.block_timeout = 0.5 + r.next_uniform();
        c.workload = w;
        const RunResult res = run_single(c, seed, RunOptions{false, false});
        const RunSummary& s = res.report.summary;
        ASSERT_TRUE(s.calls_attempted);
        ASSERT_EQ(s.bytes_acked, 500u * *s.calls_completed) << "seed " << seed;
        ASSERT_LE(*s.calls_completed + *s.calls_blocked, *s.calls_attempted);
        if (*s.calls_attempted > 0) {
            ASSERT_GE(*s.blocking_rate, 0.0);
            ASSERT_LE(*s.blocking_rate, 1.0);
        }
    }
}
