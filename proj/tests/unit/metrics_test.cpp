#include <gtest/gtest.h>

#include <sstream>
#include <stdexcept>

#include "spacecc/errors.hpp"
#include "spacecc/metrics.hpp"

using namespace spacecc;

TEST(MetricSeries, RejectsDecreasingTime) {
    MetricSeries s("x");
    s.add(at_seconds(1), 1.0);
    s.add(at_seconds(1), 2.0);
    EXPECT_THROW(s.add(at_seconds(0.5), 3.0), std::invalid_argument);
}

TEST(MetricSeries, CsvHeaderAndRows) {
    MetricSeries s("cwnd");
    s.add(at_seconds(0.5), 3.0);
    s.add(at_seconds(1.25), 9.5);
    std::ostringstream os;
    s.write_csv(os);
    EXPECT_EQ(os.str(), "time_s,value\n0.500000000,3\n1.250000000,9.5\n");
}

TEST(Throughput, ExampleValues) {
    EXPECT_DOUBLE_EQ(time_avg_throughput({}, at_seconds(10)), 0.0);
    const std::vector<Delivery> d{{at_seconds(60), 10'485'760}};
    EXPECT_NEAR(time_avg_throughput(d, at_seconds(60)), 1.398e6, 1e3);
    EXPECT_DOUBLE_EQ(time_avg_throughput(d, at_seconds(59)), 0.0);
    EXPECT_DOUBLE_EQ(time_avg_throughput(d, SimTime{}), 0.0);
}

TEST(CallStats, BlockingRate) {
    CallStats c;
    EXPECT_THROW(blocking_rate(c), NoCalls);
    c.completed = 50'000;
    EXPECT_DOUBLE_EQ(blocking_rate(c), 0.0);
    c.completed = 49'995;
    c.blocked = 5;
    EXPECT_DOUBLE_EQ(blocking_rate(c), 0.0001);
    c.completed = 0;
    EXPECT_DOUBLE_EQ(blocking_rate(c), 1.0);
}

TEST(CallStats, HoldOnStatistics) {
    CallStats c;
    c.hold_on_times = {0.5, 0.6, 0.7, 0.8, 2.0};
    c.completed = 5;
    EXPECT_DOUBLE_EQ(c.mean_hold_on(), 0.92);
    EXPECT_DOUBLE_EQ(c.percentile_hold_on(0.5), 0.7);
    EXPECT_DOUBLE_EQ(c.percentile_hold_on(1.0), 2.0);
    EXPECT_NEAR(c.percentile_hold_on(0.95), 1.76, 1e-12);
}

namespace {

RunRecord ftp_record() {
    RunRecord r;
    r.scenario = "s";
    r.algorithm = "aggressive";
    r.workload = "ftp";
    r.seed = 7;
    r.loss_rate = 0.01;
    r.bottleneck_rate = 10e6;
    r.end = at_seconds(1200);
    r.completion = at_seconds(3.5);
    r.deliveries = {{at_seconds(1.0), 1000}, {at_seconds(2.0), 2000}, {at_seconds(3.5), 500}};
    r.window = {{at_seconds(0), 1}, {at_seconds(0.5), 3}};
    r.utilization = {{at_seconds(1), 0.25}, {at_seconds(2), 0.5}};
    r.mean_utilization = 0.375;
    r.payload_intact = true;
    return r;
}

}  // namespace

TEST(Summarize, FtpSeriesAndScalars) {
    const RunReport rep = summarize(ftp_record());
    ASSERT_EQ(rep.series.size(), 3u);
    EXPECT_EQ(rep.series[0].name(), "throughput");
    EXPECT_EQ(rep.series[1].name(), "cwnd");
    EXPECT_EQ(rep.series[2].name(), "utilization");
    EXPECT_EQ(rep.summary.completion_time_s, 3.5);
    EXPECT_EQ(rep.summary.bytes_acked, 3500u);
    EXPECT_DOUBLE_EQ(rep.summary.mean_throughput_bps, 8.0 * 3500 / 3.5);
    EXPECT_FALSE(rep.summary.blocking_rate);
    // Grid points at 1, 2, 3 s plus the completion instant.
    const auto& tp = rep.series[0].points();
    ASSERT_EQ(tp.size(), 4u);
    EXPECT_DOUBLE_EQ(tp[1].value, 8.0 * 3000 / 2.0);
    EXPECT_EQ(tp.back().at, at_seconds(3.5));
}

TEST(Summarize, VbrHasThroughputOnly) {
    RunRecord r = ftp_record();
    r.workload = "vbr";
    r.completion.reset();
    r.end = at_seconds(4.0);
    const RunReport rep = summarize(r);
    ASSERT_EQ(rep.series.size(), 1u);
    EXPECT_FALSE(rep.summary.completion_time_s);
}

TEST(Summarize, CallsCarryStatsWithoutSeries) {
    RunRecord r;
    r.workload = "calls";
    r.end = at_seconds(100);
    CallStats c;
    c.completed = 3;
    c.blocked = 1;
    c.hold_on_times = {0.5, 0.6, 0.7};
    r.calls = c;
    r.deliveries = {{at_seconds(1), 500}, {at_seconds(2), 500}, {at_seconds(3), 500}};
    const RunReport rep = summarize(r);
    EXPECT_TRUE(rep.series.empty());
    EXPECT_DOUBLE_EQ(*rep.summary.blocking_rate, 0.25);
    EXPECT_NEAR(*rep.summary.mean_hold_on_s, 0.6, 1e-12);
    EXPECT_EQ(rep.summary.bytes_acked, 500u * *rep.summary.calls_completed);
}

TEST(Summary, JsonHasFixedFieldsAndNulls) {
    const auto j = to_json(summarize(ftp_record()).summary);
    for (const char* k : {"algorithm", "loss_rate", "completion_time_s", "mean_throughput_bps", "mean_utilization",
                          "mean_hold_on_s", "blocking_rate"}) {
        EXPECT_TRUE(j.contains(k)) << k;
    }
    EXPECT_TRUE(j["mean_hold_on_s"].is_null());
    EXPECT_TRUE(j["blocking_rate"].is_null());
    EXPECT_EQ(j["algorithm"], "aggressive");
    EXPECT_EQ(j.begin().key(), "scenario");
}

TEST(PropertyMetrics, ThroughputMonotoneInDeliveries) {
    RngStream r(31, "tput");
    for (int i = 0; i < 1000; ++i) {
        std::vector<Delivery> d;
        double t = 0.0;
        for (int k = 0; k < 20; ++k) {
            t += r.next_uniform();
            d.push_back({at_seconds(t), static_cast<std::uint64_t>(r.next_uniform() * 5000)});
        }
        const SimTime at = at_seconds(r.next_uniform() * 25.0 + 0.001);
        const double before = time_avg_throughput(d, at);
        d.push_back({at_seconds(r.next_uniform() * to_seconds(at)), 1 + static_cast<std::uint64_t>(r.next_uniform() * 100)});
        ASSERT_GE(time_avg_throughput(d, at), before);
    }
}
