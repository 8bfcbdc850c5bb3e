#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "spacecc/channel.hpp"
#include "spacecc/congestion.hpp"
#include "spacecc/connection.hpp"
#include "spacecc/geometry.hpp"
#include "spacecc/metrics.hpp"
#include "spacecc/traffic.hpp"

namespace spacecc {

struct GeoPoint {
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    double alt_km = 0.0;
    bool operator==(const GeoPoint&) const = default;
};

struct AnalysisParams {
    double link_rate_bps = 10e6;
    double segment_bits = 8192.0;
    bool operator==(const AnalysisParams&) const = default;
};

struct SweepParams {
    std::vector<Algorithm> algorithms;
    std::vector<double> loss_rates;
    bool operator==(const SweepParams&) const = default;
};

struct ScenarioConfig {
    std::string name = "scenario";
    Algorithm algorithm = Algorithm::Aggressive;
    std::vector<std::uint64_t> seeds{1};
    double duration = 1200.0;         // s
    double sample_interval = 1.0;     // s
    PathSpec path;
    std::optional<double> end_to_end_loss;  // overrides per-link loss when set
    std::vector<GeoPoint> geometry;         // optional; feeds rtt_est
    TransportParams transport;
    double initial_ssthresh = 1000.0;       // segments
    bool empty_segments_in_ca = false;
    WorkloadConfig workload = FtpWorkload{};
    AnalysisParams analysis;
    std::optional<SweepParams> sweep;

    bool operator==(const ScenarioConfig&) const = default;

    /// Throws InvalidConfig.
    void validate() const;
    /// Path with the end-to-end loss override applied.
    PathSpec effective_path() const;
    /// Explicit transport.rtt_est, else 2D/c over the geometry points, else
    /// twice the one-way propagation delay.
    double effective_rtt_est() const;
};

/// Throws ConfigParse with line/column or field-path context.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& file);
nlohmann::ordered_json to_json(const ScenarioConfig& cfg);
std::string serialize_config(const ScenarioConfig& cfg);

struct RunOptions {
    bool keep_trace = true;
    bool keep_stream = false;
};

struct RunResult {
    RunReport report;
    std::uint64_t run_digest = 0;
    std::uint64_t events = 0;
    double rtt_est = 0.0;
    SenderTrace trace;  // ftp and vbr only
    std::uint64_t sent_checksum = 0;
    std::uint64_t received_checksum = 0;
    std::uint64_t received_bytes = 0;
};

/// One simulation of `cfg.algorithm` under `seed`.
RunResult run_single(const ScenarioConfig& cfg, std::uint64_t seed, const RunOptions& opts = {});

/// Writes `<root>/<scenario>/<algorithm>/<seed>/{*.csv,summary.json}` and
/// returns that directory. Throws IoFailure.
std::filesystem::path write_run(const std::filesystem::path& root, const std::string& scenario,
                                const RunReport& report);

struct SweepCell {
    Algorithm algorithm = Algorithm::Aggressive;
    double loss_rate = 0.0;
    std::uint64_t seed = 0;
    RunSummary summary;
};

struct RankEntry {
    double loss_rate = 0.0;
    std::string metric;
    std::vector<std::pair<Algorithm, double>> order;  // best first
};

struct SweepResult {
    std::string scenario;
    std::vector<SweepCell> cells;
    std::vector<RankEntry> ranking;
};

struct SweepSpec {
    ScenarioConfig base;
    std::vector<Algorithm> algorithms;
    std::vector<double> loss_rates;  // empty: keep the configured path loss
    std::vector<std::uint64_t> seeds;
};
/// Builds a sweep from configs that must agree on everything but the
/// algorithm. A single config with a `sweep` section expands on its own.
/// Throws MismatchedSweep.
SweepSpec make_sweep(const std::vector<ScenarioConfig>& configs);

/// Runs the cross product, `threads` cells at a time (0 = hardware threads).
/// When `out` is set every cell is also written under it.
SweepResult compare(const SweepSpec& spec, unsigned threads = 0,
                    const std::optional<std::filesystem::path>& out = std::nullopt);
void write_comparison(const std::filesystem::path& dir, const SweepResult& result);

/// rtt * (1 + log2(B * rtt / l)). Throws DegenerateBdp when B * rtt / l < 1.
double analyze_slow_start(double rtt, double link_rate_bps, double segment_bits);

nlohmann::ordered_json geometry_report(const std::vector<GeoPoint>& points);

/// Directory-safe loss label, e.g. 0.005 -> "loss0.005".
std::string loss_label(double loss);

}  // namespace spacecc
