// Command-line front end: run, compare, geometry, analyze-slowstart.
//
// Exit status: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spacecc/errors.hpp"
#include "spacecc/scenario.hpp"

namespace fs = std::filesystem;
using namespace spacecc;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct CommonOpts {
    std::vector<std::string> configs;
    std::string out;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool multi_config) {
    if (multi_config) {
        cmd->add_option("--config,-c", o.configs, "Scenario config file (JSON); repeat to compare variants");
    } else {
        cmd->add_option("--config,-c", o.configs, "Scenario config file (JSON)")->expected(0, 1);
    }
    cmd->add_option("--out,-o", o.out, "Output directory (run/compare) or file (geometry/analyze-slowstart)");
    cmd->add_option("--seed,-s", o.seed, "Replace the configured seed list with this seed");
}

ScenarioConfig load_one(const CommonOpts& o) {
    if (o.configs.empty()) throw ConfigParse("--config is required");
    ScenarioConfig cfg = load_config(o.configs.front());
    if (o.seed) cfg.seeds = {*o.seed};
    return cfg;
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    const fs::path p(out);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
        if (ec) throw IoFailure("cannot create " + p.parent_path().string() + ": " + ec.message());
    }
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw IoFailure("cannot open " + out + " for writing");
    os << text;
    if (!os) throw IoFailure("failed writing " + out);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

int cmd_run(const CommonOpts& o, const std::optional<std::string>& algorithm, const std::optional<double>& loss) {
    ScenarioConfig cfg = load_one(o);
    if (algorithm) cfg.algorithm = parse_algorithm(*algorithm);
    if (loss) cfg.end_to_end_loss = *loss;
    cfg.validate();
    const fs::path root = o.out.empty() ? fs::path("out") : fs::path(o.out);
    for (auto seed : cfg.seeds) {
        RunOptions opts;
        opts.keep_trace = false;
        const RunResult r = run_single(cfg, seed, opts);
        const fs::path dir = write_run(root, cfg.name, r.report);
        const auto& s = r.report.summary;
        std::cout << s.algorithm << " seed=" << seed << " throughput_bps=" << fmt(s.mean_throughput_bps);
        if (s.completion_time_s) std::cout << " completion_s=" << fmt(*s.completion_time_s);
        if (s.blocking_rate) std::cout << " blocking=" << fmt(*s.blocking_rate);
        if (s.mean_hold_on_s) std::cout << " hold_on_s=" << fmt(*s.mean_hold_on_s);
        std::cout << " -> " << dir.string() << "\n";
    }
    return kOk;
}

int cmd_compare(const CommonOpts& o, const std::vector<std::string>& algorithms, const std::vector<double>& losses,
                unsigned threads) {
    if (o.configs.empty()) throw ConfigParse("--config is required");
    std::vector<ScenarioConfig> cfgs;
    for (const auto& c : o.configs) {
        cfgs.push_back(load_config(c));
        if (o.seed) cfgs.back().seeds = {*o.seed};
    }
    if (!algorithms.empty() || !losses.empty()) {
        if (cfgs.size() != 1) throw MismatchedSweep("--algorithms/--loss-rates need exactly one --config");
        SweepParams sp = cfgs.front().sweep.value_or(SweepParams{});
        if (!algorithms.empty()) {
            sp.algorithms.clear();
            for (const auto& a : algorithms) sp.algorithms.push_back(parse_algorithm(a));
        }
        if (!losses.empty()) sp.loss_rates = losses;
        cfgs.front().sweep = sp;
        cfgs.front().validate();
    }
    const SweepSpec spec = make_sweep(cfgs);
    const fs::path root = o.out.empty() ? fs::path("out") : fs::path(o.out);
    const SweepResult res = compare(spec, threads, root);
    write_comparison(root / spec.base.name, res);

    for (const auto& r : res.ranking) {
        std::cout << "loss=" << fmt(r.loss_rate) << " " << r.metric << ":";
        for (std::size_t i = 0; i < r.order.size(); ++i) {
            std::cout << " " << (i + 1) << "." << to_string(r.order[i].first) << "(" << fmt(r.order[i].second) << ")";
        }
        std::cout << "\n";
    }
    std::cout << res.cells.size() << " runs -> " << (root / spec.base.name / "comparison.csv").string() << "\n";
    return kOk;
}

GeoPoint parse_point(const std::string& s) {
    GeoPoint p;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%lf,%lf,%lf%c", &p.lat_deg, &p.lon_deg, &p.alt_km, &tail) != 3) {
        throw ConfigParse("--point expects lat_deg,lon_deg,alt_km, got '" + s + "'");
    }
    return p;
}

int cmd_geometry(const CommonOpts& o, const std::vector<std::string>& points) {
    std::vector<GeoPoint> pts;
    if (!points.empty()) {
        for (const auto& s : points) pts.push_back(parse_point(s));
    } else {
        pts = load_one(o).geometry;
    }
    emit(o.out, geometry_report(pts).dump(2) + "\n");
    return kOk;
}

int cmd_slowstart(const CommonOpts& o, std::optional<double> rtt, std::optional<double> rate,
                  std::optional<double> bits) {
    if (!o.configs.empty()) {
        const ScenarioConfig cfg = load_one(o);
        if (!rtt) rtt = cfg.effective_rtt_est();
        if (!rate) rate = cfg.analysis.link_rate_bps;
        if (!bits) bits = cfg.analysis.segment_bits;
    }
    if (!rtt || !rate || !bits) throw ConfigParse("need --rtt, --rate and --segment-bits, or a --config");
    const double t = analyze_slow_start(*rtt, *rate, *bits);
    nlohmann::ordered_json j;
    j["rtt_s"] = *rtt;
    j["link_rate_bps"] = *rate;
    j["segment_bits"] = *bits;
    j["bdp_segments"] = *rate * *rtt / *bits;
    j["t_ss_s"] = t;
    emit(o.out, j.dump(2) + "\n");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Congestion control simulator for long-delay satellite paths"};
    app.require_subcommand(1);

    CommonOpts run_o, cmp_o, geo_o, ss_o;

    auto* run = app.add_subcommand("run", "Simulate one algorithm for every configured seed");
    add_common(run, run_o, false);
    std::optional<std::string> run_alg;
    std::optional<double> run_loss;
    run->add_option("--algorithm,-a", run_alg, "Override the configured algorithm");
    run->add_option("--loss", run_loss, "Override the end-to-end packet loss rate");

    auto* cmp = app.add_subcommand("compare", "Sweep algorithms x loss rates x seeds with paired randomness");
    add_common(cmp, cmp_o, true);
    std::vector<std::string> cmp_algs;
    std::vector<double> cmp_losses;
    unsigned threads = 0;
    cmp->add_option("--algorithms", cmp_algs, "Algorithms to sweep")->delimiter(',');
    cmp->add_option("--loss-rates", cmp_losses, "End-to-end loss rates to sweep")->delimiter(',');
    cmp->add_option("--threads,-j", threads, "Concurrent runs (0 = hardware threads)");

    auto* geo = app.add_subcommand("geometry", "Hop angles, distances, RTT estimate and interruption threshold");
    add_common(geo, geo_o, false);
    std::vector<std::string> points;
    geo->add_option("--point,-p", points, "lat_deg,lon_deg,alt_km (repeat; overrides the config)");

    auto* ss = app.add_subcommand("analyze-slowstart", "Time for slow start to fill the bandwidth-delay product");
    add_common(ss, ss_o, false);
    std::optional<double> rtt, rate, bits;
    ss->add_option("--rtt", rtt, "Round-trip time, s");
    ss->add_option("--rate", rate, "Link rate, bit/s");
    ss->add_option("--segment-bits", bits, "Segment size, bits");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return cmd_run(run_o, run_alg, run_loss);
        if (*cmp) return cmd_compare(cmp_o, cmp_algs, cmp_losses, threads);
        if (*geo) return cmd_geometry(geo_o, points);
        if (*ss) return cmd_slowstart(ss_o, rtt, rate, bits);
    } catch (const ConfigParse& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const UnknownAlgorithm& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const MismatchedSweep& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const TooFewPoints& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const DegenerateBdp& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kConfigError;
}
