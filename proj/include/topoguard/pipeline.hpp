#pragma once

// Batch front-end: CSV ingestion, synthetic shapes, the `run` driver with its
// on-disk artifacts, and dataset summary statistics.

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "topoguard/complexes.hpp"
#include "topoguard/diagram_distances.hpp"
#include "topoguard/error.hpp"
#include "topoguard/geometry.hpp"
#include "topoguard/natural_neighbor.hpp"
#include "topoguard/persistence.hpp"
#include "topoguard/random.hpp"
#include "topoguard/stopping.hpp"

namespace topoguard {

namespace fs = std::filesystem;

// Ingestion ----------------------------------------------------------------

struct IngestResult {
    Sample sample;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string unquote(std::string s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

// Indices of points within `tol` of an earlier point.
inline std::vector<std::size_t> duplicate_indices(const std::vector<Point2>& pts, double tol) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && a < b);
    });
    std::vector<char> dup(pts.size(), 0);
    for (std::size_t a = 0; a < order.size(); ++a) {
        const std::size_t i = order[a];
        if (dup[i]) continue;
        for (std::size_t b = a + 1; b < order.size() && pts[order[b]].x - pts[i].x <= tol; ++b) {
            const std::size_t j = order[b];
            if (!dup[j] && distance(pts[i], pts[j]) <= tol) dup[std::max(i, j)] = 1;
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (dup[i]) out.push_back(i);
    return out;
}

}  // namespace detail

/// Reads a CSV with a header naming `x` and `y`; every other column becomes a
/// channel. Near-duplicate points (1e-9 of the bbox diagonal) are dropped.
inline IngestResult ingest(std::istream& is, const std::string& id, const std::string& name) {
    IngestResult res;
    res.sample.id = id;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    std::size_t xi = kNone, yi = kNone;
    std::vector<std::size_t> channel_cols;
    while (std::getline(is, line)) {
        ++lineno;
        if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv(line);
        for (auto& f : fields) f = detail::unquote(f);
        if (header.empty()) {
            header = fields;
            std::set<std::string> seen;
            for (std::size_t c = 0; c < header.size(); ++c) {
                if (header[c].empty() || !seen.insert(header[c]).second)
                    fail(ErrorKind::ParseError, name + ":" + std::to_string(lineno) + ": empty or repeated column name");
                if (header[c] == "x") xi = c;
                else if (header[c] == "y") yi = c;
                else channel_cols.push_back(c);
            }
            if (xi == kNone || yi == kNone)
                fail(ErrorKind::ParseError, name + ":" + std::to_string(lineno) + ": header must name columns x and y");
            for (std::size_t c : channel_cols) res.sample.channels.push_back({header[c], {}});
            continue;
        }
        if (fields.size() != header.size())
            fail(ErrorKind::ParseError, name + ":" + std::to_string(lineno) + ": expected " +
                                            std::to_string(header.size()) + " fields, found " +
                                            std::to_string(fields.size()));
        std::vector<double> vals(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            if (!detail::parse_number(fields[c], vals[c], false))
                fail(ErrorKind::ParseError, name + ":" + std::to_string(lineno) + ": column '" + header[c] +
                                                "' is not a finite number: '" + fields[c] + "'");
        res.sample.points.push_back({vals[xi], vals[yi]});
        for (std::size_t k = 0; k < channel_cols.size(); ++k)
            res.sample.channels[k].values.push_back(vals[channel_cols[k]]);
    }
    if (header.empty()) fail(ErrorKind::ParseError, name + ": empty file");
    if (!res.sample.points.empty()) {
        const double tol = 1e-9 * ClipRect::bounding(res.sample.points).diagonal();
        const auto dups = detail::duplicate_indices(res.sample.points, tol);
        if (!dups.empty()) {
            res.warnings.push_back(name + ": dropped " + std::to_string(dups.size()) + " duplicate point(s)");
            std::vector<char> drop(res.sample.size(), 0);
            for (std::size_t i : dups) drop[i] = 1;
            auto compact = [&](auto& v) {
                std::size_t w = 0;
                for (std::size_t i = 0; i < v.size(); ++i)
                    if (!drop[i]) v[w++] = v[i];
                v.resize(w);
            };
            compact(res.sample.points);
            for (auto& ch : res.sample.channels) compact(ch.values);
        }
    }
    if (res.sample.size() < 3)
        fail(ErrorKind::TooFewPoints, name + ": " + std::to_string(res.sample.size()) + " distinct points, need 3");
    return res;
}

inline IngestResult ingest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ParseError, path.string() + ": cannot open");
    return ingest(in, path.stem().string(), path.string());
}

inline std::string format_double(double v) { return format_value(v); }

inline void write_sample_csv(std::ostream& os, const Sample& s) {
    os << "x,y";
    for (const auto& c : s.channels) os << ',' << c.name;
    os << '\n';
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << format_double(s.points[i].x) << ',' << format_double(s.points[i].y);
        for (const auto& c : s.channels) os << ',' << format_double(c.values[i]);
        os << '\n';
    }
}

// Synthetic shapes ----------------------------------------------------------

enum class ShapeKind { Circle, Annulus, TwoClusters, FigureEight, SignatureLike };

constexpr std::string_view to_string(ShapeKind k) noexcept {
    switch (k) {
        case ShapeKind::Circle: return "circle";
        case ShapeKind::Annulus: return "annulus";
        case ShapeKind::TwoClusters: return "two_clusters";
        case ShapeKind::FigureEight: return "figure_eight";
        case ShapeKind::SignatureLike: return "signature_like";
    }
    return "unknown";
}

inline ShapeKind parse_shape_kind(std::string_view s) {
    for (ShapeKind k : {ShapeKind::Circle, ShapeKind::Annulus, ShapeKind::TwoClusters, ShapeKind::FigureEight,
                        ShapeKind::SignatureLike})
        if (s == to_string(k)) return k;
    fail(ErrorKind::InvalidArgument, "unknown shape '" + std::string(s) + "'");
}

/// Reference scales (alpha filtration, noise 0):
///   circle        unit radius, beta = (1,1,0) for r in (sin(pi/n), 1)
///   annulus       radii 0.6 and 1, one dominant H1 class
///   two_clusters  unit disks centred at (+-separation/2, 0), beta0 = 2 for
///                 r between the largest in-cluster merge and separation/2 - 1
///   figure_eight  x = cos t, y = sin t cos t, two dominant H1 classes
///   signature_like prolate cycloid with channels t and pressure
struct SyntheticShape {
    ShapeKind kind = ShapeKind::Circle;
    std::size_t n = 64;
    double noise = 0.0;
    std::uint64_t seed = 0;
    double separation = 10.0;
    double radius = 1.0;
};

inline Sample generate(const SyntheticShape& shape) {
    if (shape.n < 8) fail(ErrorKind::InvalidArgument, "generate: need n >= 8");
    if (!(shape.noise >= 0.0)) fail(ErrorKind::InvalidArgument, "generate: noise must be >= 0");
    Rng rng(shape.seed);
    Sample s;
    s.id = std::string(to_string(shape.kind));
    const std::size_t n = shape.n;
    const double two_pi = 2.0 * std::numbers::pi;
    switch (shape.kind) {
        case ShapeKind::Circle:
            for (std::size_t i = 0; i < n; ++i) {
                const double t = two_pi * double(i) / double(n);
                s.points.push_back({shape.radius * std::cos(t), shape.radius * std::sin(t)});
            }
            break;
        case ShapeKind::Annulus:
            for (std::size_t i = 0; i < n; ++i) {
                const double r = shape.radius * std::sqrt(rng.uniform(0.36, 1.0));
                const double t = two_pi * rng.uniform();
                s.points.push_back({r * std::cos(t), r * std::sin(t)});
            }
            break;
        case ShapeKind::TwoClusters:
            for (std::size_t i = 0; i < n; ++i) {
                const double cx = (i < n / 2 ? -0.5 : 0.5) * shape.separation;
                const double r = shape.radius * std::sqrt(rng.uniform());
                const double t = two_pi * rng.uniform();
                s.points.push_back({cx + r * std::cos(t), r * std::sin(t)});
            }
            break;
        case ShapeKind::FigureEight:
            for (std::size_t i = 0; i < n; ++i) {
                const double t = two_pi * (double(i) + 0.5) / double(n);
                s.points.push_back({shape.radius * std::cos(t), shape.radius * std::sin(t) * std::cos(t)});
            }
            break;
        case ShapeKind::SignatureLike: {
            Channel time{"t", {}}, pressure{"pressure", {}};
            for (std::size_t i = 0; i < n; ++i) {
                const double u = double(i) / double(n - 1);
                const double t = 2.0 * two_pi * u;
                s.points.push_back({shape.radius * (0.6 * t - 1.5 * std::sin(t)),
                                    shape.radius * (1.0 - 1.5 * std::cos(t))});
                time.values.push_back(u);
                pressure.values.push_back(0.6 + 0.3 * std::sin(3.0 * t) + 0.05 * rng.normal());
            }
            s.channels = {std::move(time), std::move(pressure)};
            break;
        }
    }
    if (shape.noise > 0.0)
        for (auto& p : s.points) p = p + Point2{shape.noise * rng.normal(), shape.noise * rng.normal()};
    return s;
}

// Configuration -------------------------------------------------------------

struct RunConfig {
    std::vector<std::string> inputs;  // paths or glob patterns
    std::string out_dir = "out";
    StopConfig stop;
    std::string stats_quantity = "norm";  // "norm" or a channel name
    std::size_t threads = 0;              // 0 = hardware concurrency
};

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j = to_json(c.stop);
    j["inputs"] = c.inputs;
    j["out"] = c.out_dir;
    j["stats_quantity"] = c.stats_quantity;
    j["threads"] = c.threads;
    return j;
}

inline void update_from_json(RunConfig& c, const nlohmann::json& j) {
    if (!j.is_object()) fail(ErrorKind::InvalidArgument, "config must be a JSON object");
    static const std::set<std::string> known{"alpha",         "gamma",        "p",           "max_iters",
                                             "complex",       "r_max_policy", "landmark_fraction",
                                             "landmark_method", "max_dim",    "max_simplices", "clip_margin",
                                             "normalize",     "n_new",        "seed",        "inputs",
                                             "out",           "stats_quantity", "threads"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) fail(ErrorKind::InvalidArgument, "config: unknown field '" + k + "'");
    try {
        if (j.contains("inputs")) {
            const auto& in = j.at("inputs");
            c.inputs = in.is_string() ? std::vector<std::string>{in.get<std::string>()}
                                      : in.get<std::vector<std::string>>();
        }
        if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
        if (j.contains("stats_quantity")) c.stats_quantity = j.at("stats_quantity").get<std::string>();
        if (j.contains("threads")) c.threads = j.at("threads").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
    }
    update_from_json(c.stop, j);
}

inline RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidArgument, path.string() + ": cannot open config");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
    RunConfig c;
    update_from_json(c, j);
    return c;
}

// Files ---------------------------------------------------------------------

/// Writes through a temporary file and renames it into place.
inline void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + tmp.string());
        out << content;
        if (!out) fail(ErrorKind::InvalidArgument, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

/// Expands each pattern with glob(3); a pattern without matches that names
/// an existing file is kept. Results are sorted and unique.
inline std::vector<fs::path> expand_inputs(const std::vector<std::string>& patterns) {
    std::set<std::string> found;
    for (const auto& pat : patterns) {
        glob_t g{};
        if (::glob(pat.c_str(), 0, nullptr, &g) == 0)
            for (std::size_t i = 0; i < g.gl_pathc; ++i)
                if (fs::is_regular_file(g.gl_pathv[i])) found.insert(g.gl_pathv[i]);
        ::globfree(&g);
    }
    return {found.begin(), found.end()};
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

inline std::string diagram_csv(const PersistenceDiagram& d) {
    std::ostringstream os;
    write_diagram_csv(os, d);
    return os.str();
}

// Statistics ----------------------------------------------------------------

struct Moments {
    std::size_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double v) {
        ++count;
        sum += v;
        sum_sq += v * v;
    }
    void add(const Moments& o) {
        count += o.count;
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
};

/// Per-point values of the summary quantity: coordinate norms or a channel.
inline Moments quantity_moments(const Sample& s, const std::string& quantity) {
    Moments m;
    if (quantity == "norm") {
        for (Point2 p : s.points) m.add(norm(p));
        return m;
    }
    for (const auto& c : s.channels)
        if (c.name == quantity) {
            for (double v : c.values) m.add(v);
            return m;
        }
    fail(ErrorKind::InvalidArgument, "sample '" + s.id + "' has no channel '" + quantity + "'");
}

struct UnstoppedRecord {
    std::size_t t = 0;
    std::size_t n_points = 0;
    Moments quantity;
    double w1_to_original = 0.0;
};

struct StatsRow {
    double mean = 0.0;
    double std = 0.0;
    double variation = 0.0;  // std / mean, 0 when mean = 0
    double w1 = 0.0;         // average over samples of W1(original, X^t)
    std::size_t samples = 0;
};

struct SummaryStats {
    std::string quantity = "norm";
    std::size_t n_traces = 0;
    std::vector<std::size_t> t;
    std::vector<StatsRow> stopped, unstopped;
};

namespace detail {

inline StatsRow finish_row(const Moments& m, double w1_sum, std::size_t samples) {
    StatsRow r;
    r.samples = samples;
    if (m.count > 0) {
        r.mean = m.sum / double(m.count);
        r.std = std::sqrt(std::max(0.0, m.sum_sq / double(m.count) - r.mean * r.mean));
        r.variation = r.mean != 0.0 ? r.std / r.mean : 0.0;
    }
    r.w1 = samples ? w1_sum / double(samples) : 0.0;
    return r;
}

}  // namespace detail

struct TraceStats {
    std::vector<UnstoppedRecord> unstopped;
    std::size_t accepted_t = 0;  // last iteration whose sample was kept
};

/// Pools per-trace statistics. The stopped variant holds each sample at its
/// last accepted iteration once the loop has stopped.
inline SummaryStats summarize(const std::vector<TraceStats>& traces, const std::string& quantity) {
    if (traces.empty()) fail(ErrorKind::NoTraces, "no traces to summarize");
    SummaryStats s;
    s.quantity = quantity;
    s.n_traces = traces.size();
    std::size_t T = 0;
    for (const auto& tr : traces)
        if (!tr.unstopped.empty()) T = std::max(T, tr.unstopped.back().t);
    for (std::size_t t = 0; t <= T; ++t) {
        Moments ms, mu;
        double ws = 0.0, wu = 0.0;
        std::size_t ns = 0, nu = 0;
        for (const auto& tr : traces) {
            auto find = [&](std::size_t tt) -> const UnstoppedRecord* {
                for (const auto& r : tr.unstopped)
                    if (r.t == tt) return &r;
                return nullptr;
            };
            if (const auto* r = find(t)) {
                mu.add(r->quantity);
                wu += r->w1_to_original;
                ++nu;
            }
            if (const auto* r = find(std::min(t, tr.accepted_t))) {
                ms.add(r->quantity);
                ws += r->w1_to_original;
                ++ns;
            }
        }
        s.t.push_back(t);
        s.stopped.push_back(detail::finish_row(ms, ws, ns));
        s.unstopped.push_back(detail::finish_row(mu, wu, nu));
    }
    return s;
}

inline nlohmann::json to_json(const SummaryStats& s) {
    auto row = [](const StatsRow& r) {
        return nlohmann::json{{"mean", r.mean}, {"std", r.std}, {"variation", r.variation},
                              {"w1", r.w1},     {"samples", r.samples}};
    };
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < s.t.size(); ++i)
        rows.push_back({{"t", s.t[i]}, {"stopped", row(s.stopped[i])}, {"unstopped", row(s.unstopped[i])}});
    return {{"quantity", s.quantity}, {"traces", s.n_traces}, {"rows", rows}};
}

inline std::string summary_csv(const SummaryStats& s) {
    std::ostringstream os;
    os << "t,variant,mean,std,variation,w1,samples\n";
    for (std::size_t i = 0; i < s.t.size(); ++i)
        for (auto [name, r] : {std::pair{"stopped", &s.stopped[i]}, std::pair{"unstopped", &s.unstopped[i]}})
            os << s.t[i] << ',' << name << ',' << format_double(r->mean) << ',' << format_double(r->std) << ','
               << format_double(r->variation) << ',' << format_double(r->w1) << ',' << r->samples << '\n';
    return os.str();
}

inline nlohmann::json to_json(const UnstoppedRecord& r) {
    return {{"t", r.t},
            {"n_points", r.n_points},
            {"quantity", {{"count", r.quantity.count}, {"sum", r.quantity.sum}, {"sum_sq", r.quantity.sum_sq}}},
            {"w1_to_original", r.w1_to_original}};
}

/// Reads the statistics part of a trace.json document.
inline TraceStats trace_stats_from_json(const nlohmann::json& j) {
    TraceStats ts;
    try {
        for (const auto& r : j.at("unstopped")) {
            UnstoppedRecord u;
            u.t = r.at("t").get<std::size_t>();
            u.n_points = r.at("n_points").get<std::size_t>();
            u.quantity.count = r.at("quantity").at("count").get<std::size_t>();
            u.quantity.sum = r.at("quantity").at("sum").get<double>();
            u.quantity.sum_sq = r.at("quantity").at("sum_sq").get<double>();
            u.w1_to_original = r.at("w1_to_original").get<double>();
            ts.unstopped.push_back(u);
        }
        ts.accepted_t = j.at("accepted_t").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, std::string("trace: ") + e.what());
    }
    return ts;
}

// Per-sample driver ---------------------------------------------------------

struct SampleOutcome {
    std::string id;
    std::optional<TraceStats> stats;
    std::string error;        // fatal failure before or during the run
    std::string trace_error;  // failure recorded inside the trace
};

inline std::string series_csv(const StopTrace& trace) {
    std::ostringstream os;
    os << "t,d_b,d_w1,gamma_hat,decision\n";
    for (const auto& r : trace.iterations) {
        os << r.t << ',';
        if (r.t == 0) os << "0,0,";
        else if (r.error.empty()) os << format_double(r.d_b_max) << ',' << format_double(r.d_w1_total) << ',';
        else os << ",,";
        if (r.test) os << format_double(r.test->gamma_hat);
        os << ',' << to_string(r.decision) << '\n';
    }
    return os.str();
}

/// Runs the loop on one sample and writes its artifacts under out/<id>/.
inline SampleOutcome process_sample(const Sample& sample, const RunConfig& cfg, const fs::path& out_dir) {
    SampleOutcome res;
    res.id = sample.id;
    try {
        StopConfig sc = cfg.stop;
        sc.seed = mix_seed(cfg.stop.seed, fnv1a(sample.id));
        const Frame frame = sc.normalize ? Frame::unit_diagonal(sample.points) : Frame{};
        const bool alpha_loop = sc.filtration.kind == ComplexKind::Alpha;
        auto alpha_of = [&](const Sample& s) { return compute_diagram(alpha_filtration(frame.apply(s.points))); };
        std::optional<PersistenceDiagram> original;
        std::map<std::size_t, PersistenceDiagram> diagrams;
        TraceStats ts;
        auto observer = [&](std::size_t t, const Sample& s, const PersistenceDiagram& d) {
            diagrams.emplace(t, d);
            UnstoppedRecord u;
            u.t = t;
            u.n_points = s.size();
            u.quantity = quantity_moments(s, cfg.stats_quantity);
            const PersistenceDiagram a = alpha_loop ? d : alpha_of(s);
            if (!original) original = a;
            u.w1_to_original = compare_diagrams(*original, a, 1.0).wasserstein_total;
            ts.unstopped.push_back(u);
        };
        const LoopResult lr = run_stopping_loop(sample, sc, observer, true);
        for (const auto& r : lr.trace.iterations)
            if (r.decision != Decision::Stop) ts.accepted_t = r.t;
        for (const auto& r : lr.trace.iterations)
            if (!r.error.empty()) res.trace_error = r.error;

        const fs::path dir = out_dir / sample.id;
        nlohmann::json tj = to_json(lr.trace);
        tj["accepted_t"] = ts.accepted_t;
        tj["final_n_points"] = lr.sample.size();
        tj["stats_quantity"] = cfg.stats_quantity;
        nlohmann::json un = nlohmann::json::array();
        for (const auto& u : ts.unstopped) un.push_back(to_json(u));
        tj["unstopped"] = un;
        for (const auto& r : lr.trace.iterations) {
            auto it = diagrams.find(r.t);
            if (it == diagrams.end() || !r.error.empty()) continue;
            for (int k = 0; k <= kMaxHomologyDim; ++k)
                write_file_atomic(dir / "diagrams" / ("t" + std::to_string(r.t) + "_dim" + std::to_string(k) + ".csv"),
                                  diagram_csv(it->second.of_dim(k)));
        }
        write_file_atomic(dir / "series.csv", series_csv(lr.trace));
        write_file_atomic(dir / "trace.json", tj.dump(2) + "\n");
        res.stats = std::move(ts);
    } catch (const std::exception& e) {
        res.error = e.what();
    }
    return res;
}

// Commands ------------------------------------------------------------------

enum ExitCode { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

inline int cmd_run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        cfg.stop.validate();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    const auto files = expand_inputs(cfg.inputs);
    if (files.empty()) {
        err << "error: no input files matched";
        for (const auto& p : cfg.inputs) err << " '" << p << "'";
        err << '\n';
        return kExitUsage;
    }

    std::vector<std::string> errors;
    std::vector<Sample> samples;
    std::set<std::string> ids;
    bool input_error = false;
    for (const auto& f : files) {
        try {
            auto r = ingest(f);
            for (const auto& w : r.warnings) err << "warning: " << w << '\n';
            if (!ids.insert(r.sample.id).second)
                fail(ErrorKind::InvalidArgument, f.string() + ": duplicate sample id '" + r.sample.id + "'");
            if (cfg.stats_quantity != "norm") quantity_moments(r.sample, cfg.stats_quantity);
            samples.push_back(std::move(r.sample));
        } catch (const Error& e) {
            errors.push_back(f.string() + ": " + e.what());
            input_error = true;
        }
    }

    const fs::path out_dir(cfg.out_dir);
    std::vector<SampleOutcome> outcomes(samples.size());
    std::size_t workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(samples.size(), 1));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < samples.size();)
            outcomes[i] = process_sample(samples[i], cfg, out_dir);
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    bool runtime_error = false;
    std::vector<TraceStats> stats;
    for (const auto& o : outcomes) {
        if (!o.error.empty()) {
            errors.push_back(o.id + ": " + o.error);
            runtime_error = true;
            continue;
        }
        if (!o.trace_error.empty()) {
            errors.push_back(o.id + ": " + o.trace_error);
            runtime_error = true;
        }
        stats.push_back(*o.stats);
    }
    if (!stats.empty()) {
        const SummaryStats s = summarize(stats, cfg.stats_quantity);
        nlohmann::json sj = to_json(s);
        sj["config"] = to_json(cfg);
        write_file_atomic(out_dir / "summary.json", sj.dump(2) + "\n");
        write_file_atomic(out_dir / "summary.csv", summary_csv(s));
    }
    out << "processed " << stats.size() << " of " << files.size() << " sample(s) into " << out_dir.string() << '\n';
    for (const auto& e : errors) err << "error: " << e << '\n';
    if (input_error) return kExitUsage;
    return runtime_error ? kExitRuntime : kExitOk;
}

inline PersistenceDiagram load_diagram(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ParseError, path.string() + ": cannot open");
    return read_diagram_csv(in, path.string());
}

/// Prints per-dimension bottleneck and p-Wasserstein distances.
inline int cmd_distance(const fs::path& a, const fs::path& b, double p, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    try {
        const DistanceReport r = compare_diagrams(load_diagram(a), load_diagram(b), p);
        char buf[128];
        out << "dim,bottleneck,wasserstein\n";
        for (int k = 0; k <= kMaxHomologyDim; ++k) {
            std::snprintf(buf, sizeof buf, "%d,%.9f,%.9f\n", k, r.bottleneck[k], r.wasserstein[k]);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "all,%.9f,%.9f\n", r.bottleneck_max, r.wasserstein_total);
        out << buf;
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::ParseError ? kExitUsage : kExitRuntime;
    }
}

/// Summary table over trace.json files matched by the patterns. Writes
/// summary.json and summary.csv into `out_dir` when it is non-empty.
inline int cmd_stats(const std::vector<std::string>& patterns, const std::string& out_dir,
                     std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<fs::path> files;
    for (const auto& f : expand_inputs(patterns)) files.push_back(f);
    try {
        if (files.empty()) fail(ErrorKind::NoTraces, "no trace files matched");
        std::vector<TraceStats> traces;
        std::string quantity;
        for (const auto& f : files) {
            std::ifstream in(f);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                fail(ErrorKind::ParseError, f.string() + ": " + e.what());
            }
            const std::string q = j.value("stats_quantity", std::string("norm"));
            if (!quantity.empty() && q != quantity)
                fail(ErrorKind::InvalidArgument, f.string() + ": traces use different quantities");
            quantity = q;
            traces.push_back(trace_stats_from_json(j));
        }
        const SummaryStats s = summarize(traces, quantity);
        const std::string csv = summary_csv(s);
        out << csv;
        if (!out_dir.empty()) {
            write_file_atomic(fs::path(out_dir) / "summary.json", to_json(s).dump(2) + "\n");
            write_file_atomic(fs::path(out_dir) / "summary.csv", csv);
        }
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::InvalidArgument ? kExitRuntime : kExitUsage;
    }
}

}  // namespace topoguard
