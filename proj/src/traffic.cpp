#include "spacecc/traffic.hpp"

#include <algorithm>
#include <cmath>

#include "spacecc/errors.hpp"

namespace spacecc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

std::string_view workload_kind(const WorkloadConfig& w) {
    return std::visit(overloaded{[](const FtpWorkload&) { return std::string_view("ftp"); },
                                 [](const PoissonCallConfig&) { return std::string_view("calls"); },
                                 [](const ParetoConfig&) { return std::string_view("vbr"); }},
                      w);
}

void validate(const WorkloadConfig& w) {
    std::visit(overloaded{
                   [](const FtpWorkload& f) {
                       if (f.total_bytes == 0) throw InvalidConfig("ftp total_bytes must be positive");
                       if (!(f.start >= 0.0)) throw InvalidConfig("ftp start must be >= 0");
                   },
                   [](const PoissonCallConfig& c) {
                       if (!(c.lambda > 0.0)) throw InvalidConfig("calls lambda must be positive");
                       if (!(c.horizon_start >= 0.0 && c.horizon_start < c.horizon_end)) {
                           throw InvalidConfig("calls horizon must satisfy 0 <= start < end");
                       }
                       if (c.bytes_per_call == 0) throw InvalidConfig("calls bytes_per_call must be positive");
                       if (!(c.block_timeout > 0.0)) throw InvalidConfig("calls block_timeout must be positive");
                   },
                   [](const ParetoConfig& p) {
                       if (!(p.alpha > 1.0)) throw InvalidConfig("vbr alpha must exceed 1 for a finite mean");
                       if (!(p.x_min > 0.0)) throw InvalidConfig("vbr x_min must be positive");
                       if (!(p.mean_frame_bytes > 0.0)) throw InvalidConfig("vbr mean_frame_bytes must be positive");
                       if (!(p.frame_interval > 0.0)) throw InvalidConfig("vbr frame_interval must be positive");
                   }},
               w);
}

double poisson_gap(double u, double lambda) { return -std::log(u) / lambda; }

double next_poisson_arrival(RngStream& rng, double lambda) { return poisson_gap(rng.next_uniform(), lambda); }

double pareto_from_uniform(double u, const ParetoConfig& cfg) { return cfg.x_min * std::pow(u, -1.0 / cfg.alpha); }

double sample_pareto(RngStream& rng, const ParetoConfig& cfg) { return pareto_from_uniform(rng.next_uniform(), cfg); }

std::vector<SendRequest> generate_workload(const WorkloadConfig& w, std::uint64_t seed, double until) {
    validate(w);
    std::vector<SendRequest> out;
    std::visit(overloaded{
                   [&](const FtpWorkload& f) { out.push_back({at_seconds(f.start), f.total_bytes}); },
                   [&](const PoissonCallConfig& c) {
                       RngStream rng(seed, "poisson");
                       double t = c.horizon_start;
                       for (;;) {
                           t += next_poisson_arrival(rng, c.lambda);
                           if (t > c.horizon_end) break;
                           if (c.max_calls > 0 && out.size() >= c.max_calls) break;
                           out.push_back({at_seconds(t), c.bytes_per_call});
                       }
                   },
                   [&](const ParetoConfig& p) {
                       RngStream rng(seed, "pareto");
                       const double unit = p.unit_bytes();
                       for (std::uint64_t i = 0;; ++i) {
                           const double t = static_cast<double>(i) * p.frame_interval;
                           if (t >= until) break;
                           const auto bytes = static_cast<std::uint64_t>(std::llround(sample_pareto(rng, p) * unit));
                           out.push_back({at_seconds(t), std::max<std::uint64_t>(1, bytes)});
                       }
                   }},
               w);
    return out;
}

}  // namespace spacecc
