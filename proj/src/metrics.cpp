#include "spacecc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "spacecc/errors.hpp"

namespace spacecc {

void MetricSeries::add(SimTime at, double value) {
    if (!points_.empty() && at < points_.back().at) {
        throw std::invalid_argument("series '" + name_ + "': timestamps must be non-decreasing");
    }
    points_.push_back({at, value});
}

void MetricSeries::write_csv(std::ostream& os) const {
    os << "time_s,value\n";
    char line[96];
    for (const auto& p : points_) {
        std::snprintf(line, sizeof line, "%.9f,%.12g\n", to_seconds(p.at), p.value);
        os << line;
    }
}

double time_avg_throughput(std::span<const Delivery> delivered, SimTime at) {
    const double t = to_seconds(at);
    if (!(t > 0.0)) return 0.0;
    std::uint64_t bytes = 0;
    for (const auto& d : delivered) {
        if (d.at <= at) bytes += d.bytes;
    }
    return 8.0 * static_cast<double>(bytes) / t;
}

double CallStats::mean_hold_on() const {
    if (hold_on_times.empty()) return 0.0;
    return std::accumulate(hold_on_times.begin(), hold_on_times.end(), 0.0) /
           static_cast<double>(hold_on_times.size());
}

double CallStats::percentile_hold_on(double q) const {
    if (hold_on_times.empty()) return 0.0;
    std::vector<double> v = hold_on_times;
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

double blocking_rate(const CallStats& stats) {
    if (stats.attempted() == 0) throw NoCalls("blocking rate is undefined without any call attempts");
    return static_cast<double>(stats.blocked) / static_cast<double>(stats.attempted());
}

RunReport summarize(const RunRecord& run) {
    RunReport report;
    RunSummary& s = report.summary;
    s.scenario = run.scenario;
    s.algorithm = run.algorithm;
    s.workload = run.workload;
    s.seed = run.seed;
    s.loss_rate = run.loss_rate;
    s.mean_utilization = run.mean_utilization;
    s.payload_intact = run.payload_intact;
    s.timeouts = run.timeouts;
    s.triple_dups = run.triple_dups;
    s.maintenance_entries = run.maintenance_entries;
    for (const auto& d : run.deliveries) s.bytes_acked += d.bytes;

    const SimTime horizon = run.completion.value_or(run.end);
    if (run.completion) s.completion_time_s = to_seconds(*run.completion);
    s.mean_throughput_bps = time_avg_throughput(run.deliveries, horizon);

    if (run.calls) {
        const CallStats& c = *run.calls;
        s.calls_attempted = c.attempted();
        s.calls_completed = c.completed;
        s.calls_blocked = c.blocked;
        if (c.attempted() > 0) s.blocking_rate = blocking_rate(c);
        if (!c.hold_on_times.empty()) {
            s.mean_hold_on_s = c.mean_hold_on();
            s.p95_hold_on_s = c.percentile_hold_on(0.95);
        }
        return report;
    }

    // Running average sampled on a fixed grid, plus the final instant.
    MetricSeries throughput("throughput");
    {
        const SimDuration step = from_seconds(run.sample_interval);
        std::size_t i = 0;
        std::uint64_t cum = 0;
        auto emit = [&](SimTime t) {
            while (i < run.deliveries.size() && run.deliveries[i].at <= t) cum += run.deliveries[i++].bytes;
            throughput.add(t, 8.0 * static_cast<double>(cum) / to_seconds(t));
        };
        SimTime t = SimTime{} + step;
        for (; t < horizon; t += step) emit(t);
        if (horizon > SimTime{}) emit(horizon);
    }
    report.series.push_back(std::move(throughput));

    if (run.workload == "ftp") {
        MetricSeries cwnd("cwnd");
        for (const auto& w : run.window) cwnd.add(w.at, w.cwnd);
        MetricSeries util("utilization");
        for (const auto& u : run.utilization) util.add(u.at, u.value);
        report.series.push_back(std::move(cwnd));
        report.series.push_back(std::move(util));
    }
    return report;
}

nlohmann::ordered_json to_json(const RunSummary& s) {
    auto opt = [](const auto& v) -> nlohmann::ordered_json {
        if (v) return *v;
        return nullptr;
    };
    nlohmann::ordered_json j;
    j["scenario"] = s.scenario;
    j["algorithm"] = s.algorithm;
    j["workload"] = s.workload;
    j["seed"] = s.seed;
    j["loss_rate"] = s.loss_rate;
    j["completion_time_s"] = opt(s.completion_time_s);
    j["mean_throughput_bps"] = s.mean_throughput_bps;
    j["mean_utilization"] = s.mean_utilization;
    j["mean_hold_on_s"] = opt(s.mean_hold_on_s);
    j["p95_hold_on_s"] = opt(s.p95_hold_on_s);
    j["blocking_rate"] = opt(s.blocking_rate);
    j["bytes_acked"] = s.bytes_acked;
    j["calls_attempted"] = opt(s.calls_attempted);
    j["calls_completed"] = opt(s.calls_completed);
    j["calls_blocked"] = opt(s.calls_blocked);
    j["payload_intact"] = opt(s.payload_intact);
    j["timeouts"] = s.timeouts;
    j["triple_dups"] = s.triple_dups;
    j["maintenance_entries"] = s.maintenance_entries;
    return j;
}

}  // namespace spacecc
