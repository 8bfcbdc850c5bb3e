#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "spacecc/sim_core.hpp"

namespace spacecc {

struct MetricPoint {
    SimTime at;
    double value = 0.0;
};

/// Named time series with non-decreasing timestamps.
class MetricSeries {
public:
    explicit MetricSeries(std::string name) : name_(std::move(name)) {}

    /// Throws std::invalid_argument if `at` precedes the last point.
    void add(SimTime at, double value);

    const std::string& name() const noexcept { return name_; }
    const std::vector<MetricPoint>& points() const noexcept { return points_; }
    bool empty() const noexcept { return points_.empty(); }

    /// `time_s,value` header, one row per point.
    void write_csv(std::ostream& os) const;

private:
    std::string name_;
    std::vector<MetricPoint> points_;
};

struct Delivery {
    SimTime at;
    std::uint64_t bytes = 0;
};

/// 8 * (payload bytes acknowledged by `at`) / at, in bit/s. Zero at t = 0.
double time_avg_throughput(std::span<const Delivery> delivered, SimTime at);

struct CallStats {
    std::uint64_t completed = 0;
    std::uint64_t blocked = 0;
    std::uint64_t unfinished = 0;  // opened but not fully ACKed when the run ended
    std::vector<double> hold_on_times;  // s, one per completed call

    std::uint64_t attempted() const noexcept { return completed + blocked + unfinished; }
    double mean_hold_on() const;
    double percentile_hold_on(double q) const;
};

/// blocked / attempted. Throws NoCalls when nothing was attempted.
double blocking_rate(const CallStats& stats);

struct WindowSample {
    SimTime at;
    double cwnd = 0.0;
};

/// Raw observations of one run, before reduction.
struct RunRecord {
    std::string scenario;
    std::string algorithm;
    std::string workload;  // ftp | calls | vbr
    std::uint64_t seed = 0;
    double loss_rate = 0.0;
    double bottleneck_rate = 0.0;  // bit/s
    SimTime end;
    std::optional<SimTime> completion;
    std::vector<Delivery> deliveries;
    std::vector<WindowSample> window;
    std::vector<MetricPoint> utilization;  // per sample interval
    double mean_utilization = 0.0;
    std::optional<CallStats> calls;
    std::optional<bool> payload_intact;
    std::uint64_t timeouts = 0;
    std::uint64_t triple_dups = 0;
    std::uint64_t maintenance_entries = 0;
    double sample_interval = 1.0;  // s
};

struct RunSummary {
    std::string scenario;
    std::string algorithm;
    std::string workload;
    std::uint64_t seed = 0;
    double loss_rate = 0.0;
    std::optional<double> completion_time_s;
    double mean_throughput_bps = 0.0;
    double mean_utilization = 0.0;
    std::optional<double> mean_hold_on_s;
    std::optional<double> p95_hold_on_s;
    std::optional<double> blocking_rate;
    std::uint64_t bytes_acked = 0;
    std::optional<std::uint64_t> calls_attempted;
    std::optional<std::uint64_t> calls_completed;
    std::optional<std::uint64_t> calls_blocked;
    std::optional<bool> payload_intact;
    std::uint64_t timeouts = 0;
    std::uint64_t triple_dups = 0;
    std::uint64_t maintenance_entries = 0;
};

struct RunReport {
    RunSummary summary;
    std::vector<MetricSeries> series;
};

/// Series per workload: ftp -> throughput, cwnd, utilization; vbr -> throughput;
/// calls -> none (the call statistics live in the summary).
RunReport summarize(const RunRecord& run);

/// Fixed field order; absent optionals are written as null.
nlohmann::ordered_json to_json(const RunSummary& s);

}  // namespace spacecc
