#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "spacecc/sim_core.hpp"

namespace spacecc {

struct FtpWorkload {
    std::uint64_t total_bytes = 10ull << 20;  // 10 MB
    double start = 0.0;                       // s

    bool operator==(const FtpWorkload&) const = default;
};

struct PoissonCallConfig {
    double lambda = 14.0;          // calls/s
    double horizon_start = 0.0;    // s
    double horizon_end = 3600.0;   // s
    std::uint64_t bytes_per_call = 500;
    std::uint64_t max_calls = 0;   // 0 = no cap
    double block_timeout = 2.0;    // s; open must complete within this

    bool operator==(const PoissonCallConfig&) const = default;
};

/// Frame sizes are i.i.d. Pareto(x_min, alpha) scaled so that the mean frame
/// is `mean_frame_bytes`.
struct ParetoConfig {
    double x_min = 1.0;
    double alpha = 1.5;
    double mean_frame_bytes = 12000.0;
    double frame_interval = 0.04;  // s

    /// Bytes per unit of the dimensionless Pareto sample.
    double unit_bytes() const { return mean_frame_bytes * (alpha - 1.0) / (alpha * x_min); }
    bool operator==(const ParetoConfig&) const = default;
};

using WorkloadConfig = std::variant<FtpWorkload, PoissonCallConfig, ParetoConfig>;
std::string_view workload_kind(const WorkloadConfig& w);
void validate(const WorkloadConfig& w);

/// Exponential inter-arrival by inverse CDF: -ln(U) / lambda, U on (0, 1].
double poisson_gap(double u, double lambda);
double next_poisson_arrival(RngStream& rng, double lambda);

/// x_min * U^(-1/alpha), U on (0, 1].
double pareto_from_uniform(double u, const ParetoConfig& cfg);
double sample_pareto(RngStream& rng, const ParetoConfig& cfg);

struct SendRequest {
    SimTime at;
    std::uint64_t bytes = 0;
    bool operator==(const SendRequest&) const = default;
};

/// Materializes a workload as a list of send requests. FTP yields a single
/// request; calls yield one request per arrival (each its own connection);
/// VBR yields one frame per interval over [0, until). Throws InvalidConfig.
std::vector<SendRequest> generate_workload(const WorkloadConfig& w, std::uint64_t seed, double until);

}  // namespace spacecc
