#include "spacecc/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "spacecc/errors.hpp"

namespace spacecc {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// --- parsing helpers ------------------------------------------------------

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigParse("config field '" + where + "': " + what);
}

std::string join(const std::string& where, std::string_view key) {
    return where.empty() ? std::string(key) : where + "." + std::string(key);
}

const char* type_name(const json& j) { return j.type_name(); }

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where.empty() ? "<root>" : where, std::string("expected object, got ") + type_name(j));
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            fail(join(where, key), "unknown field");
        }
    }
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, std::string("expected number, got ") + type_name(j));
    return j.get<double>();
}

std::uint64_t as_unsigned(const json& j, const std::string& where) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
    fail(where, std::string("expected non-negative integer, got ") + (j.is_number() ? j.dump() : type_name(j)));
}

bool as_bool(const json& j, const std::string& where) {
    if (!j.is_boolean()) fail(where, std::string("expected boolean, got ") + type_name(j));
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where, std::string("expected string, got ") + type_name(j));
    return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, std::string("expected array, got ") + type_name(j));
    return j;
}

template <class T, class F>
void read_opt(const json& obj, const std::string& where, std::string_view key, T& dst, F conv) {
    const auto it = obj.find(std::string(key));
    if (it != obj.end()) dst = conv(*it, join(where, key));
}

Algorithm as_algorithm(const json& j, const std::string& where) {
    const std::string name = as_string(j, where);
    try {
        return parse_algorithm(name);
    } catch (const UnknownAlgorithm& e) {
        fail(where, e.what());
    }
}

std::string index_path(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

LinkSpec parse_link(const json& j, const std::string& where) {
    expect_object(j, where);
    check_keys(j, where, {"prop_delay_s", "forward_rate_bps", "reverse_rate_bps", "loss_prob", "queue_capacity"});
    LinkSpec l;
    read_opt(j, where, "prop_delay_s", l.prop_delay, as_number);
    read_opt(j, where, "forward_rate_bps", l.forward_rate, as_number);
    read_opt(j, where, "reverse_rate_bps", l.reverse_rate, as_number);
    read_opt(j, where, "loss_prob", l.loss_prob, as_number);
    std::uint64_t cap = l.queue_capacity;
    read_opt(j, where, "queue_capacity", cap, as_unsigned);
    l.queue_capacity = static_cast<std::size_t>(cap);
    return l;
}

void parse_path(const json& j, const std::string& where, ScenarioConfig& cfg) {
    expect_object(j, where);
    check_keys(j, where, {"links", "end_to_end_loss", "outages", "geometry"});
    const auto lit = j.find("links");
    if (lit == j.end()) fail(join(where, "links"), "missing required field");
    const std::string lw = join(where, "links");
    const json& links = as_array(*lit, lw);
    cfg.path.links.clear();
    for (std::size_t i = 0; i < links.size(); ++i) cfg.path.links.push_back(parse_link(links[i], index_path(lw, i)));
    if (cfg.path.links.empty()) fail(lw, "at least one link is required");

    read_opt(j, where, "end_to_end_loss", cfg.end_to_end_loss, [](const json& v, const std::string& w) {
        return std::optional<double>(as_number(v, w));
    });

    cfg.path.outages.clear();
    if (const auto oit = j.find("outages"); oit != j.end()) {
        const std::string ow = join(where, "outages");
        const json& arr = as_array(*oit, ow);
        if (!arr.empty()) cfg.path.outages.assign(cfg.path.links.size(), {});
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string w = index_path(ow, i);
            expect_object(arr[i], w);
            check_keys(arr[i], w, {"link", "start_s", "end_s"});
            std::uint64_t link = 0;
            double start = 0.0;
            double end = 0.0;
            read_opt(arr[i], w, "link", link, as_unsigned);
            if (!arr[i].contains("start_s") || !arr[i].contains("end_s")) fail(w, "start_s and end_s are required");
            read_opt(arr[i], w, "start_s", start, as_number);
            read_opt(arr[i], w, "end_s", end, as_number);
            if (link >= cfg.path.links.size()) fail(join(w, "link"), "no such link");
            if (!(end > start)) fail(w, "end_s must exceed start_s");
            cfg.path.outages[link].push_back({at_seconds(start), at_seconds(end)});
        }
    }

    cfg.geometry.clear();
    if (const auto git = j.find("geometry"); git != j.end()) {
        const std::string gw = join(where, "geometry");
        const json& arr = as_array(*git, gw);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string w = index_path(gw, i);
            expect_object(arr[i], w);
            check_keys(arr[i], w, {"lat_deg", "lon_deg", "alt_km"});
            GeoPoint p;
            read_opt(arr[i], w, "lat_deg", p.lat_deg, as_number);
            read_opt(arr[i], w, "lon_deg", p.lon_deg, as_number);
            read_opt(arr[i], w, "alt_km", p.alt_km, as_number);
            cfg.geometry.push_back(p);
        }
    }
}

void parse_transport(const json& j, const std::string& where, ScenarioConfig& cfg) {
    expect_object(j, where);
    check_keys(j, where,
               {"mss_bytes", "header_bytes", "rtt_est_s", "min_rto_s", "max_rto_s", "history_capacity",
                "rtt_decay_tau_s", "probe_interval_factor", "dupack_threshold", "partial_ack_timer", "initial_ssthresh",
                "empty_segments_in_ca"});
    TransportParams& t = cfg.transport;
    std::uint64_t mss = t.mss, header = t.header_bytes, hist = t.history_capacity, dup = t.dupack_threshold;
    read_opt(j, where, "mss_bytes", mss, as_unsigned);
    read_opt(j, where, "header_bytes", header, as_unsigned);
    read_opt(j, where, "history_capacity", hist, as_unsigned);
    read_opt(j, where, "dupack_threshold", dup, as_unsigned);
    t.mss = static_cast<std::size_t>(mss);
    t.header_bytes = static_cast<std::size_t>(header);
    t.history_capacity = static_cast<std::size_t>(hist);
    t.dupack_threshold = static_cast<unsigned>(dup);
    read_opt(j, where, "rtt_est_s", t.rtt_est, as_number);
    read_opt(j, where, "min_rto_s", t.min_rto, as_number);
    read_opt(j, where, "max_rto_s", t.max_rto, as_number);
    read_opt(j, where, "rtt_decay_tau_s", t.decay_tau, as_number);
    read_opt(j, where, "probe_interval_factor", t.probe_interval_factor, as_number);
    read_opt(j, where, "partial_ack_timer", t.partial_ack_timer, [](const json& v, const std::string& w) {
        try {
            return parse_partial_ack_timer(as_string(v, w));
        } catch (const InvalidConfig& e) {
            fail(w, e.what());
        }
    });
    read_opt(j, where, "initial_ssthresh", cfg.initial_ssthresh, as_number);
    read_opt(j, where, "empty_segments_in_ca", cfg.empty_segments_in_ca, as_bool);
}

WorkloadConfig parse_workload(const json& j, const std::string& where) {
    expect_object(j, where);
    const auto kit = j.find("kind");
    if (kit == j.end()) fail(join(where, "kind"), "missing required field (ftp, calls or vbr)");
    const std::string kind = as_string(*kit, join(where, "kind"));
    if (kind == "ftp") {
        check_keys(j, where, {"kind", "total_bytes", "start_s"});
        FtpWorkload f;
        read_opt(j, where, "total_bytes", f.total_bytes, as_unsigned);
        read_opt(j, where, "start_s", f.start, as_number);
        return f;
    }
    if (kind == "calls") {
        check_keys(j, where,
                   {"kind", "lambda_per_s", "horizon_start_s", "horizon_end_s", "bytes_per_call", "max_calls",
                    "block_timeout_s"});
        PoissonCallConfig c;
        read_opt(j, where, "lambda_per_s", c.lambda, as_number);
        read_opt(j, where, "horizon_start_s", c.horizon_start, as_number);
        read_opt(j, where, "horizon_end_s", c.horizon_end, as_number);
        read_opt(j, where, "bytes_per_call", c.bytes_per_call, as_unsigned);
        read_opt(j, where, "max_calls", c.max_calls, as_unsigned);
        read_opt(j, where, "block_timeout_s", c.block_timeout, as_number);
        return c;
    }
    if (kind == "vbr") {
        check_keys(j, where, {"kind", "x_min", "alpha", "mean_frame_bytes", "frame_interval_s"});
        ParetoConfig p;
        read_opt(j, where, "x_min", p.x_min, as_number);
        read_opt(j, where, "alpha", p.alpha, as_number);
        read_opt(j, where, "mean_frame_bytes", p.mean_frame_bytes, as_number);
        read_opt(j, where, "frame_interval_s", p.frame_interval, as_number);
        return p;
    }
    fail(join(where, "kind"), "unknown workload '" + kind + "' (expected ftp, calls or vbr)");
}

ScenarioConfig parse_root(const json& root) {
    expect_object(root, "");
    check_keys(root, "",
               {"name", "algorithm", "seeds", "duration_s", "sample_interval_s", "path", "transport", "workload",
                "analysis", "sweep"});
    ScenarioConfig cfg;
    read_opt(root, "", "name", cfg.name, as_string);
    read_opt(root, "", "algorithm", cfg.algorithm, as_algorithm);
    if (const auto it = root.find("seeds"); it != root.end()) {
        const json& arr = as_array(*it, "seeds");
        cfg.seeds.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) cfg.seeds.push_back(as_unsigned(arr[i], index_path("seeds", i)));
    }
    read_opt(root, "", "duration_s", cfg.duration, as_number);
    read_opt(root, "", "sample_interval_s", cfg.sample_interval, as_number);

    const auto pit = root.find("path");
    if (pit == root.end()) fail("path", "missing required section");
    parse_path(*pit, "path", cfg);
    if (const auto it = root.find("transport"); it != root.end()) parse_transport(*it, "transport", cfg);
    if (const auto it = root.find("workload"); it != root.end()) cfg.workload = parse_workload(*it, "workload");

    if (const auto it = root.find("analysis"); it != root.end()) {
        expect_object(*it, "analysis");
        check_keys(*it, "analysis", {"link_rate_bps", "segment_bits"});
        read_opt(*it, "analysis", "link_rate_bps", cfg.analysis.link_rate_bps, as_number);
        read_opt(*it, "analysis", "segment_bits", cfg.analysis.segment_bits, as_number);
    }
    if (const auto it = root.find("sweep"); it != root.end()) {
        expect_object(*it, "sweep");
        check_keys(*it, "sweep", {"algorithms", "loss_rates"});
        SweepParams s;
        if (const auto a = it->find("algorithms"); a != it->end()) {
            const json& arr = as_array(*a, "sweep.algorithms");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                s.algorithms.push_back(as_algorithm(arr[i], index_path("sweep.algorithms", i)));
            }
        }
        if (const auto l = it->find("loss_rates"); l != it->end()) {
            const json& arr = as_array(*l, "sweep.loss_rates");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                s.loss_rates.push_back(as_number(arr[i], index_path("sweep.loss_rates", i)));
            }
        }
        cfg.sweep = std::move(s);
    }
    return cfg;
}

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

ojson workload_json(const WorkloadConfig& w) {
    return std::visit(overloaded{[](const FtpWorkload& f) {
                                     ojson j;
                                     j["kind"] = "ftp";
                                     j["total_bytes"] = f.total_bytes;
                                     j["start_s"] = f.start;
                                     return j;
                                 },
                                 [](const PoissonCallConfig& c) {
                                     ojson j;
                                     j["kind"] = "calls";
                                     j["lambda_per_s"] = c.lambda;
                                     j["horizon_start_s"] = c.horizon_start;
                                     j["horizon_end_s"] = c.horizon_end;
                                     j["bytes_per_call"] = c.bytes_per_call;
                                     j["max_calls"] = c.max_calls;
                                     j["block_timeout_s"] = c.block_timeout;
                                     return j;
                                 },
                                 [](const ParetoConfig& p) {
                                     ojson j;
                                     j["kind"] = "vbr";
                                     j["x_min"] = p.x_min;
                                     j["alpha"] = p.alpha;
                                     j["mean_frame_bytes"] = p.mean_frame_bytes;
                                     j["frame_interval_s"] = p.frame_interval;
                                     return j;
                                 }},
                      w);
}

// --- simulation -----------------------------------------------------------

CcParams cc_params(const ScenarioConfig& cfg) {
    CcParams p;
    p.initial_ssthresh = cfg.initial_ssthresh;
    p.decay_tau = cfg.transport.decay_tau;
    p.segment_bytes = cfg.transport.mss;
    p.empty_segments_in_ca = cfg.empty_segments_in_ca;
    return p;
}

std::uint64_t call_seed(std::uint64_t seed, std::size_t index) {
    return mix64(seed ^ ((index + 1) * 0x9e3779b97f4a7c15ULL));
}

void fold_trace(const SenderTrace& trace, RunRecord& rec) {
    rec.deliveries.reserve(rec.deliveries.size() + trace.acked.size());
    for (const auto& [t, b] : trace.acked) rec.deliveries.push_back({t, b});
    for (const auto& w : trace.window) rec.window.push_back({w.at, w.cwnd});
    for (const auto& l : trace.losses) {
        if (l.kind == LossKind::Timeout) {
            ++rec.timeouts;
        } else {
            ++rec.triple_dups;
        }
    }
    rec.maintenance_entries += trace.maintenance.size();
}

void run_stream(const ScenarioConfig& cfg, std::uint64_t seed, const RunOptions& opts, const TransportParams& tp,
                RunRecord& rec, RunResult& out) {
    Simulator sim;
    Path path(sim, cfg.effective_path(), seed);
    SenderTrace trace;
    Connection conn(sim, path, tp, make_controller(cfg.algorithm, cc_params(cfg)), seed, &trace, opts.keep_stream);
    Sender& sender = conn.sender();

    const SimTime end = at_seconds(cfg.duration);
    const SimDuration step = from_seconds(cfg.sample_interval);
    std::optional<SimTime> done;
    SimTime last_sample{};
    auto take_sample = [&](SimTime now) {
        if (now > last_sample) rec.utilization.push_back({now, path.utilization_sample(last_sample, now)});
        last_sample = now;
    };
    sender.on_complete([&](SimTime t) {
        done = t;
        take_sample(t);
    });

    std::function<void()> sampler = [&] {
        if (done) return;
        take_sample(sim.now());
        if (sim.now() + step <= end) sim.schedule(sim.now() + step, sampler);
    };
    if (SimTime{} + step <= end) sim.schedule(SimTime{} + step, sampler);

    if (const auto* ftp = std::get_if<FtpWorkload>(&cfg.workload)) {
        sim.schedule(at_seconds(ftp->start), [&sender, bytes = ftp->total_bytes] {
            sender.send(static_cast<std::size_t>(bytes));
            sender.finish_input();
        });
    } else {
        const auto frames = generate_workload(cfg.workload, seed, cfg.duration);
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const bool last = i + 1 == frames.size();
            sim.schedule(frames[i].at, [&sender, bytes = frames[i].bytes, last] {
                sender.send(static_cast<std::size_t>(bytes));
                if (last) sender.finish_input();
            });
        }
    }

    sim.run_until(end);

    const SimTime horizon = done.value_or(end);
    rec.end = end;
    rec.completion = done;
    rec.mean_utilization = horizon > SimTime{} ? path.utilization_sample(SimTime{}, horizon) : 0.0;
    fold_trace(trace, rec);
    out.sent_checksum = sender.input_checksum();
    out.received_checksum = conn.receiver().checksum();
    out.received_bytes = conn.receiver().cum_ack();
    rec.payload_intact = out.sent_checksum == out.received_checksum && out.received_bytes == sender.app_bytes();
    out.run_digest = sim.run_log_digest();
    out.events = sim.events_processed();
    if (opts.keep_trace) out.trace = std::move(trace);
}

void run_calls(const ScenarioConfig& cfg, std::uint64_t seed, const TransportParams& tp, RunRecord& rec,
               RunResult& out) {
    const auto& cc = std::get<PoissonCallConfig>(cfg.workload);
    Simulator sim;
    Path path(sim, cfg.effective_path(), seed);
    const SimTime end = at_seconds(cfg.duration);
    const SimDuration block_after = from_seconds(cc.block_timeout);
    const CcParams ccp = cc_params(cfg);

    struct Call {
        std::unique_ptr<Connection> conn;
        SimTime arrival;
        bool opened = false;
        bool blocked = false;
        bool done = false;
    };
    const auto arrivals = generate_workload(cfg.workload, seed, cfg.duration);
    std::deque<Call> calls;
    CallStats stats;

    for (std::size_t i = 0; i < arrivals.size(); ++i) {
        if (arrivals[i].at > end) break;
        sim.schedule(arrivals[i].at, [&, i, bytes = arrivals[i].bytes] {
            Call& call = calls.emplace_back();
            call.arrival = sim.now();
            call.conn = std::make_unique<Connection>(sim, path, tp, make_controller(cfg.algorithm, ccp),
                                                     call_seed(seed, i));
            Sender& s = call.conn->sender();
            s.on_first_ack([&call](SimTime) { call.opened = true; });
            s.on_complete([&call, &stats, &rec, bytes](SimTime t) {
                call.done = true;
                ++stats.completed;
                stats.hold_on_times.push_back(to_seconds(t - call.arrival));
                rec.deliveries.push_back({t, bytes});
            });
            sim.schedule_in(block_after, [&call, &stats] {
                if (call.opened || call.done) return;
                call.blocked = true;
                ++stats.blocked;
                call.conn->sender().close();
            });
            s.send(static_cast<std::size_t>(bytes));
            s.finish_input();
        });
    }

    sim.run_until(end);

    for (const auto& c : calls) {
        if (!c.done && !c.blocked) ++stats.unfinished;
    }
    std::sort(rec.deliveries.begin(), rec.deliveries.end(),
              [](const Delivery& a, const Delivery& b) { return a.at < b.at; });
    rec.end = end;
    rec.mean_utilization = path.utilization_sample(SimTime{}, end);
    rec.calls = std::move(stats);
    out.run_digest = sim.run_log_digest();
    out.events = sim.events_processed();
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_file(const std::filesystem::path& file, const std::string& content) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw IoFailure("cannot open " + file.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw IoFailure("failed writing " + file.string());
}

void make_dirs(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoFailure("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

// --- config ---------------------------------------------------------------

void ScenarioConfig::validate() const {
    if (name.empty() || name.find_first_of("/\\") != std::string::npos || name == "." || name == "..") {
        throw InvalidConfig("name must be a non-empty directory-safe label");
    }
    if (seeds.empty()) throw InvalidConfig("at least one seed is required");
    if (!(duration > 0.0)) throw InvalidConfig("duration_s must be positive");
    if (!(sample_interval > 0.0)) throw InvalidConfig("sample_interval_s must be positive");
    path.validate();
    if (end_to_end_loss && !(*end_to_end_loss >= 0.0 && *end_to_end_loss < 1.0)) {
        throw InvalidConfig("path.end_to_end_loss must lie in [0, 1)");
    }
    for (const auto& p : geometry) SubSatellitePoint::from_degrees(p.lat_deg, p.lon_deg, p.alt_km);
    if (geometry.size() == 1) throw InvalidConfig("path.geometry needs at least two points");
    const auto& t = transport;
    if (t.mss == 0) throw InvalidConfig("transport.mss_bytes must be positive");
    if (!(t.rtt_est >= 0.0)) throw InvalidConfig("transport.rtt_est_s must be >= 0");
    if (!(t.min_rto > 0.0 && t.max_rto >= t.min_rto)) throw InvalidConfig("transport RTO bounds are inconsistent");
    if (t.history_capacity == 0) throw InvalidConfig("transport.history_capacity must be positive");
    if (!(t.decay_tau > 0.0)) throw InvalidConfig("transport.rtt_decay_tau_s must be positive");
    if (!(t.probe_interval_factor > 0.0)) throw InvalidConfig("transport.probe_interval_factor must be positive");
    if (t.dupack_threshold == 0) throw InvalidConfig("transport.dupack_threshold must be positive");
    if (!(initial_ssthresh >= 2.0)) throw InvalidConfig("transport.initial_ssthresh must be >= 2");
    spacecc::validate(workload);
    if (!(analysis.link_rate_bps > 0.0 && analysis.segment_bits > 0.0)) {
        throw InvalidConfig("analysis rates must be positive");
    }
    if (sweep) {
        for (double l : sweep->loss_rates) {
            if (!(l >= 0.0 && l < 1.0)) throw InvalidConfig("sweep.loss_rates entries must lie in [0, 1)");
        }
    }
}

PathSpec ScenarioConfig::effective_path() const {
    PathSpec p = path;
    if (end_to_end_loss) p.set_end_to_end_loss(*end_to_end_loss);
    return p;
}

double ScenarioConfig::effective_rtt_est() const {
    if (transport.rtt_est > 0.0) return transport.rtt_est;
    if (geometry.size() >= 2) {
        std::vector<SubSatellitePoint> pts;
        for (const auto& g : geometry) pts.push_back(SubSatellitePoint::from_degrees(g.lat_deg, g.lon_deg, g.alt_km));
        return path_geometry(pts).rtt_est;
    }
    return 2.0 * path.propagation_delay();
}

ScenarioConfig parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte);
        throw ConfigParse("config syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                          ": " + e.what());
    }
    ScenarioConfig cfg = parse_root(root);
    try {
        cfg.validate();
    } catch (const InvalidConfig& e) {
        throw ConfigParse(std::string("invalid config: ") + e.what());
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw ConfigParse("cannot read config file " + file.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigParse& e) {
        throw ConfigParse(file.string() + ": " + e.what());
    }
}

nlohmann::ordered_json to_json(const ScenarioConfig& cfg) {
    ojson j;
    j["name"] = cfg.name;
    j["algorithm"] = std::string(to_string(cfg.algorithm));
    j["seeds"] = cfg.seeds;
    j["duration_s"] = cfg.duration;
    j["sample_interval_s"] = cfg.sample_interval;

    ojson path;
    path["links"] = ojson::array();
    for (const auto& l : cfg.path.links) {
        ojson lj;
        lj["prop_delay_s"] = l.prop_delay;
        lj["forward_rate_bps"] = l.forward_rate;
        lj["reverse_rate_bps"] = l.reverse_rate;
        lj["loss_prob"] = l.loss_prob;
        lj["queue_capacity"] = l.queue_capacity;
        path["links"].push_back(std::move(lj));
    }
    if (cfg.end_to_end_loss) path["end_to_end_loss"] = *cfg.end_to_end_loss;
    path["outages"] = ojson::array();
    for (std::size_t i = 0; i < cfg.path.outages.size(); ++i) {
        for (const auto& o : cfg.path.outages[i]) {
            ojson oj;
            oj["link"] = i;
            oj["start_s"] = to_seconds(o.start);
            oj["end_s"] = to_seconds(o.end);
            path["outages"].push_back(std::move(oj));
        }
    }
    path["geometry"] = ojson::array();
    for (const auto& g : cfg.geometry) {
        path["geometry"].push_back(ojson{{"lat_deg", g.lat_deg}, {"lon_deg", g.lon_deg}, {"alt_km", g.alt_km}});
    }
    j["path"] = std::move(path);

    const auto& t = cfg.transport;
    ojson tj;
    tj["mss_bytes"] = t.mss;
    tj["header_bytes"] = t.header_bytes;
    tj["rtt_est_s"] = t.rtt_est;
    tj["min_rto_s"] = t.min_rto;
    tj["max_rto_s"] = t.max_rto;
    tj["history_capacity"] = t.history_capacity;
    tj["rtt_decay_tau_s"] = t.decay_tau;
    tj["probe_interval_factor"] = t.probe_interval_factor;
    tj["dupack_threshold"] = t.dupack_threshold;
    tj["partial_ack_timer"] = std::string(to_string(t.partial_ack_timer));
    tj["initial_ssthresh"] = cfg.initial_ssthresh;
    tj["empty_segments_in_ca"] = cfg.empty_segments_in_ca;
    j["transport"] = std::move(tj);

    j["workload"] = workload_json(cfg.workload);
    j["analysis"] = ojson{{"link_rate_bps", cfg.analysis.link_rate_bps}, {"segment_bits", cfg.analysis.segment_bits}};
    if (cfg.sweep) {
        ojson s;
        s["algorithms"] = ojson::array();
        for (auto a : cfg.sweep->algorithms) s["algorithms"].push_back(std::string(to_string(a)));
        s["loss_rates"] = cfg.sweep->loss_rates;
        j["sweep"] = std::move(s);
    }
    return j;
}

std::string serialize_config(const ScenarioConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

// --- runs -----------------------------------------------------------------

RunResult run_single(const ScenarioConfig& cfg, std::uint64_t seed, const RunOptions& opts) {
    cfg.validate();
    TransportParams tp = cfg.transport;
    tp.rtt_est = cfg.effective_rtt_est();

    RunResult out;
    out.rtt_est = tp.rtt_est;
    RunRecord rec;
    rec.scenario = cfg.name;
    rec.algorithm = std::string(to_string(cfg.algorithm));
    rec.workload = std::string(workload_kind(cfg.workload));
    rec.seed = seed;
    const PathSpec path = cfg.effective_path();
    rec.loss_rate = cfg.end_to_end_loss.value_or(path.end_to_end_loss());
    rec.bottleneck_rate = path.links[path.bottleneck_link()].forward_rate;
    rec.sample_interval = cfg.sample_interval;

    if (std::holds_alternative<PoissonCallConfig>(cfg.workload)) {
        run_calls(cfg, seed, tp, rec, out);
    } else {
        run_stream(cfg, seed, opts, tp, rec, out);
    }
    out.report = summarize(rec);
    return out;
}

std::filesystem::path write_run(const std::filesystem::path& root, const std::string& scenario,
                                const RunReport& report) {
    const auto dir = root / scenario / report.summary.algorithm / std::to_string(report.summary.seed);
    make_dirs(dir);
    for (const auto& s : report.series) {
        std::ostringstream os;
        s.write_csv(os);
        write_file(dir / (s.name() + ".csv"), os.str());
    }
    write_file(dir / "summary.json", to_json(report.summary).dump(2) + "\n");
    return dir;
}

std::string loss_label(double loss) { return "loss" + format_double(loss); }

SweepSpec make_sweep(const std::vector<ScenarioConfig>& configs) {
    if (configs.empty()) throw MismatchedSweep("no configs to compare");
    SweepSpec spec;
    spec.base = configs.front();
    spec.seeds = spec.base.seeds;
    if (spec.base.sweep) spec.loss_rates = spec.base.sweep->loss_rates;

    if (configs.size() == 1) {
        if (spec.base.sweep) spec.algorithms = spec.base.sweep->algorithms;
    } else {
        for (const auto& c : configs) {
            ScenarioConfig a = c;
            ScenarioConfig b = spec.base;
            a.algorithm = b.algorithm;
            a.name = b.name;
            if (!(a == b)) {
                throw MismatchedSweep("config '" + c.name + "' differs from '" + spec.base.name +
                                      "' in more than the algorithm");
            }
            spec.algorithms.push_back(c.algorithm);
        }
    }
    std::vector<Algorithm> sorted = spec.algorithms;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw MismatchedSweep("an algorithm appears twice in the sweep");
    }
    if (spec.algorithms.size() < 2) throw MismatchedSweep("a comparison needs at least two algorithms");
    return spec;
}

SweepResult compare(const SweepSpec& spec, unsigned threads, const std::optional<std::filesystem::path>& out) {
    struct Job {
        Algorithm algorithm;
        std::optional<double> loss;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    const std::vector<std::optional<double>> losses = [&] {
        std::vector<std::optional<double>> v;
        for (double l : spec.loss_rates) v.emplace_back(l);
        if (v.empty()) v.emplace_back(std::nullopt);
        return v;
    }();
    for (const auto& l : losses) {
        for (auto a : spec.algorithms) {
            for (auto s : spec.seeds) jobs.push_back({a, l, s});
        }
    }

    SweepResult result;
    result.scenario = spec.base.name;
    result.cells.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                ScenarioConfig cfg = spec.base;
                cfg.algorithm = jobs[i].algorithm;
                if (jobs[i].loss) {
                    cfg.end_to_end_loss = *jobs[i].loss;
                    cfg.name = spec.base.name + "-" + loss_label(*jobs[i].loss);
                }
                RunOptions opts;
                opts.keep_trace = false;
                RunResult r = run_single(cfg, jobs[i].seed, opts);
                if (out) write_run(*out, cfg.name, r.report);
                result.cells[i] = {jobs[i].algorithm, r.report.summary.loss_rate, jobs[i].seed, r.report.summary};
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                next.store(jobs.size());
            }
        }
    };

    unsigned n = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    n = static_cast<unsigned>(std::min<std::size_t>(n, jobs.size()));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);

    // Rankings per loss rate, averaged over seeds.
    struct Metric {
        const char* name;
        bool higher_is_better;
        std::optional<double> (*get)(const RunSummary&);
    };
    static const Metric metrics[] = {
        {"mean_throughput_bps", true, [](const RunSummary& s) { return std::optional<double>(s.mean_throughput_bps); }},
        {"completion_time_s", false, [](const RunSummary& s) { return s.completion_time_s; }},
        {"mean_hold_on_s", false, [](const RunSummary& s) { return s.mean_hold_on_s; }},
        {"blocking_rate", false, [](const RunSummary& s) { return s.blocking_rate; }},
    };
    for (std::size_t li = 0; li < losses.size(); ++li) {
        const std::size_t per_loss = spec.algorithms.size() * spec.seeds.size();
        const std::size_t base = li * per_loss;
        for (const auto& m : metrics) {
            RankEntry entry;
            entry.loss_rate = result.cells[base].loss_rate;
            entry.metric = m.name;
            bool complete = true;
            for (std::size_t ai = 0; ai < spec.algorithms.size() && complete; ++ai) {
                double sum = 0.0;
                for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
                    const auto v = m.get(result.cells[base + ai * spec.seeds.size() + si].summary);
                    if (!v) {
                        complete = false;
                        break;
                    }
                    sum += *v;
                }
                entry.order.emplace_back(spec.algorithms[ai], sum / static_cast<double>(spec.seeds.size()));
            }
            if (!complete) continue;
            std::stable_sort(entry.order.begin(), entry.order.end(), [&](const auto& a, const auto& b) {
                return m.higher_is_better ? a.second > b.second : a.second < b.second;
            });
            result.ranking.push_back(std::move(entry));
        }
    }
    return result;
}

void write_comparison(const std::filesystem::path& dir, const SweepResult& result) {
    make_dirs(dir);
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    std::ostringstream csv;
    csv << "algorithm,loss_rate,seed,completion_time_s,mean_throughput_bps,mean_utilization,mean_hold_on_s,"
           "blocking_rate\n";
    for (const auto& c : result.cells) {
        csv << to_string(c.algorithm) << ',' << format_double(c.loss_rate) << ',' << c.seed << ','
            << opt(c.summary.completion_time_s) << ',' << format_double(c.summary.mean_throughput_bps) << ','
            << format_double(c.summary.mean_utilization) << ',' << opt(c.summary.mean_hold_on_s) << ','
            << opt(c.summary.blocking_rate) << '\n';
    }
    write_file(dir / "comparison.csv", csv.str());

    ojson ranking = ojson::array();
    for (const auto& r : result.ranking) {
        ojson e;
        e["loss_rate"] = r.loss_rate;
        e["metric"] = r.metric;
        e["order"] = ojson::array();
        for (std::size_t i = 0; i < r.order.size(); ++i) {
            e["order"].push_back(
                ojson{{"rank", i + 1}, {"algorithm", std::string(to_string(r.order[i].first))}, {"mean", r.order[i].second}});
        }
        ranking.push_back(std::move(e));
    }
    write_file(dir / "ranking.json", ranking.dump(2) + "\n");
}

// --- analysis -------------------------------------------------------------

double analyze_slow_start(double rtt, double link_rate_bps, double segment_bits) {
    if (!(rtt > 0.0 && link_rate_bps > 0.0 && segment_bits > 0.0)) {
        throw InvalidConfig("rtt, link rate and segment size must all be positive");
    }
    const double bdp = link_rate_bps * rtt / segment_bits;
    if (bdp < 1.0) throw DegenerateBdp("bandwidth-delay product below one segment (" + format_double(bdp) + ")");
    return rtt * (1.0 + std::log2(bdp));
}

nlohmann::ordered_json geometry_report(const std::vector<GeoPoint>& points) {
    std::vector<SubSatellitePoint> pts;
    pts.reserve(points.size());
    for (const auto& p : points) pts.push_back(SubSatellitePoint::from_degrees(p.lat_deg, p.lon_deg, p.alt_km));
    const LinkGeometry g = path_geometry(pts);
    ojson j;
    j["hops"] = ojson::array();
    for (std::size_t i = 0; i < g.hop_angles.size(); ++i) {
        const bool beyond = std::find(g.hops_beyond_visibility.begin(), g.hops_beyond_visibility.end(), i) !=
                            g.hops_beyond_visibility.end();
        ojson h;
        h["hop"] = i;
        h["theta_rad"] = g.hop_angles[i];
        h["theta_deg"] = g.hop_angles[i] * 180.0 / std::acos(-1.0);
        h["distance_m"] = g.hop_distances[i];
        h["beyond_visibility"] = beyond;
        j["hops"].push_back(std::move(h));
    }
    j["total_distance_m"] = g.total_distance;
    j["rtt_est_s"] = g.rtt_est;
    j["interruption_threshold_s"] = interruption_threshold(g);
    return j;
}

}  // namespace spacecc
