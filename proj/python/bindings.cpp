#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spacecc/errors.hpp"
#include "spacecc/geometry.hpp"
#include "spacecc/scenario.hpp"
#include "spacecc/traffic.hpp"

namespace py = pybind11;
using namespace spacecc;

namespace {

py::object to_py(const nlohmann::ordered_json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_spacecc, m) {
    m.doc() = "Discrete-event congestion control simulator for long-delay satellite paths.";

    py::register_exception<ConfigParse>(m, "ConfigParse", PyExc_ValueError);
    py::register_exception<InvalidConfig>(m, "InvalidConfig", PyExc_ValueError);
    py::register_exception<DegenerateBdp>(m, "DegenerateBdp", PyExc_ValueError);
    py::register_exception<TooFewPoints>(m, "TooFewPoints", PyExc_ValueError);
    py::register_exception<UnknownAlgorithm>(m, "UnknownAlgorithm", PyExc_ValueError);
    py::register_exception<MismatchedSweep>(m, "MismatchedSweep", PyExc_ValueError);

    m.def("algorithms", [] {
        std::vector<std::string> names;
        for (auto a : all_algorithms()) names.emplace_back(to_string(a));
        return names;
    });

    m.def("analyze_slow_start", &analyze_slow_start, py::arg("rtt"), py::arg("link_rate_bps"),
          py::arg("segment_bits"), "rtt * (1 + log2(B * rtt / l)) in seconds.");

    m.def(
        "geocentric_angle",
        [](double lat1, double lon1, double alt1, double lat2, double lon2, double alt2) {
            return geocentric_angle(SubSatellitePoint::from_degrees(lat1, lon1, alt1),
                                    SubSatellitePoint::from_degrees(lat2, lon2, alt2));
        },
        "Angle in radians between two sub-satellite points given in degrees (altitudes in km).");
    m.def(
        "link_distance",
        [](double lat1, double lon1, double alt1, double lat2, double lon2, double alt2) {
            return link_distance(SubSatellitePoint::from_degrees(lat1, lon1, alt1),
                                 SubSatellitePoint::from_degrees(lat2, lon2, alt2));
        },
        "Straight-line distance in meters.");
    m.def(
        "geometry",
        [](const std::vector<std::tuple<double, double, double>>& pts) {
            std::vector<GeoPoint> g;
            for (const auto& [lat, lon, alt] : pts) g.push_back({lat, lon, alt});
            return to_py(geometry_report(g));
        },
        py::arg("points"), "Per-hop angles and distances, RTT estimate and interruption threshold.");

    m.def(
        "pareto_mean",
        [](std::uint64_t seed, std::size_t n, double x_min, double alpha) {
            ParetoConfig cfg;
            cfg.x_min = x_min;
            cfg.alpha = alpha;
            RngStream rng(seed, "pareto");
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) sum += sample_pareto(rng, cfg);
            return sum / static_cast<double>(n);
        },
        py::arg("seed"), py::arg("n"), py::arg("x_min") = 1.0, py::arg("alpha") = 1.5);

    m.def(
        "normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
        py::arg("text"), "Parses a JSON scenario and returns it with every default spelled out.");

    m.def(
        "run",
        [](const std::string& text, std::uint64_t seed) {
            const ScenarioConfig cfg = parse_config(text);
            RunOptions opts;
            opts.keep_trace = false;
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_single(cfg, seed, opts);
            }
            py::dict out;
            out["summary"] = to_py(to_json(r.report.summary));
            py::dict series;
            for (const auto& s : r.report.series) {
                py::list pts;
                for (const auto& p : s.points()) pts.append(py::make_tuple(to_seconds(p.at), p.value));
                series[py::str(s.name())] = pts;
            }
            out["series"] = series;
            out["run_digest"] = r.run_digest;
            return out;
        },
        py::arg("config_json"), py::arg("seed"), "Runs one seed; returns the summary and the metric series.");
}
