#pragma once

// Trimmed-Wasserstein two-sample statistic, its critical region, and the
// augmentation loop that halts when the diagrams stop looking alike.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "topoguard/complexes.hpp"
#include "topoguard/diagram_distances.hpp"
#include "topoguard/error.hpp"
#include "topoguard/natural_neighbor.hpp"
#include "topoguard/persistence.hpp"
#include "topoguard/random.hpp"

namespace topoguard {

struct StopConfig {
    double alpha = 0.01;
    double gamma = 0.1;
    double p = 1.0;
    std::size_t max_iters = 5;
    FiltrationConfig filtration;
    double clip_margin = 0.1;
    bool normalize = true;     // diagrams on the cloud scaled to unit bbox diagonal
    std::size_t n_new = 0;     // points added per iteration; 0 = current count
    std::uint64_t seed = 0;

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorKind::InvalidArgument, "alpha must be positive");
        if (!(gamma >= 0.0 && gamma < 0.5)) fail(ErrorKind::InvalidArgument, "gamma must lie in [0, 0.5)");
        if (!(p >= 1.0) || !std::isfinite(p)) fail(ErrorKind::InvalidArgument, "p must be finite and >= 1");
        if (!(clip_margin >= 0.0)) fail(ErrorKind::InvalidArgument, "clip margin must be >= 0");
        if (!(filtration.landmark_fraction > 0.0 && filtration.landmark_fraction <= 1.0))
            fail(ErrorKind::InvalidArgument, "landmark fraction must lie in (0, 1]");
        if (filtration.max_dim < 1 || filtration.max_dim > 3)
            fail(ErrorKind::InvalidArgument, "max_dim must lie in 1..3");
    }
};

/// Costs of the optimal p-Wasserstein matching, all dims pooled, ascending.
inline std::vector<double> matched_costs(const PersistenceDiagram& a, const PersistenceDiagram& b, double p = 1.0) {
    std::vector<double> costs;
    for (int k = 0; k <= kMaxHomologyDim; ++k)
        for (const auto& m : optimal_matching(a.of_dim(k).points, b.of_dim(k).points, p).pairs)
            costs.push_back(m.cost);
    std::sort(costs.begin(), costs.end());
    return costs;
}

struct TrimmedStatistic {
    double gamma_hat = 0.0;
    double sigma_hat = 0.0;
    std::size_t m = 0;     // cost terms before trimming
    std::size_t kept = 0;  // terms inside the trim window
};

namespace detail {

inline std::size_t trim_count(double gamma, std::size_t m) {
    return static_cast<std::size_t>(std::floor(gamma * double(m) * (1.0 + 1e-12)));
}

}  // namespace detail

/// Drops floor(gamma m) costs from each end and returns
///   1/(1 - 2 gamma) * (sum of kept cost^p / m)^(1/p)
/// with the Bessel-corrected standard deviation of the kept cost^p values.
inline TrimmedStatistic trimmed_statistic(std::vector<double> costs, double gamma, double p) {
    if (!(gamma >= 0.0 && gamma < 0.5)) fail(ErrorKind::InvalidArgument, "gamma must lie in [0, 0.5)");
    if (!(p >= 1.0)) fail(ErrorKind::InvalidArgument, "p must be >= 1");
    std::sort(costs.begin(), costs.end());
    const std::size_t m = costs.size();
    const std::size_t k = detail::trim_count(gamma, m);
    if (m == 0 || 2 * k >= m) fail(ErrorKind::EmptyAfterTrim, "no cost terms remain after trimming " + std::to_string(m));
    TrimmedStatistic s;
    s.m = m;
    s.kept = m - 2 * k;
    double sum = 0.0;
    for (std::size_t i = k; i < m - k; ++i) sum += std::pow(costs[i], p);
    s.gamma_hat = std::pow(sum / double(m), 1.0 / p) / (1.0 - 2.0 * gamma);
    if (s.kept > 1 && costs[k] != costs[m - k - 1]) {
        const double mean = sum / double(s.kept);
        double ss = 0.0;
        for (std::size_t i = k; i < m - k; ++i) ss += (std::pow(costs[i], p) - mean) * (std::pow(costs[i], p) - mean);
        s.sigma_hat = std::sqrt(ss / double(s.kept - 1));
    }
    return s;
}

inline double trimmed_wasserstein(const std::vector<double>& costs, double gamma, double p) {
    return trimmed_statistic(costs, gamma, p).gamma_hat;
}

/// Standard normal quantile: Acklam's rational approximation refined by one
/// Halley step.
inline double normal_quantile(double q) {
    if (!(q >= 0.0 && q <= 1.0)) fail(ErrorKind::InvalidArgument, "quantile level outside [0, 1]");
    if (q == 0.0) return -std::numeric_limits<double>::infinity();
    if (q == 1.0) return std::numeric_limits<double>::infinity();
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double lo = 0.02425, hi = 1.0 - lo;
    double x;
    if (q < lo) {
        const double r = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    } else if (q <= hi) {
        const double u = q - 0.5, r = u * u;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double r = std::sqrt(-2.0 * std::log1p(-q));
        x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - q;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

enum class Decision { Baseline, Continue, Stop, MaxItersReached };

constexpr std::string_view to_string(Decision d) noexcept {
    switch (d) {
        case Decision::Baseline: return "BASELINE";
        case Decision::Continue: return "CONTINUE";
        case Decision::Stop: return "STOP";
        case Decision::MaxItersReached: return "MAX_ITERS_REACHED";
    }
    return "UNKNOWN";
}

struct TestResult {
    double statistic = 0.0;
    double threshold = 0.0;  // z_gamma
    Decision decision = Decision::Continue;
    double gamma_hat = 0.0;
    double sigma_hat = 0.0;
    std::size_t n = 0, m = 0;
    bool zero_dispersion = false;  // sigma_hat = 0: decided by gamma_hat^p against alpha^p
};

/// CONTINUE iff (nm/(n+m))^(1/p) (gamma_hat^p - alpha^p) / sigma_hat <= z_gamma.
inline TestResult critical_test(double gamma_hat, double sigma_hat, std::size_t n, std::size_t m,
                                const StopConfig& cfg) {
    if (n == 0 || m == 0) fail(ErrorKind::InvalidArgument, "critical test needs n, m > 0");
    if (!(sigma_hat >= 0.0)) fail(ErrorKind::InvalidArgument, "negative dispersion");
    TestResult r;
    r.gamma_hat = gamma_hat;
    r.sigma_hat = sigma_hat;
    r.n = n;
    r.m = m;
    r.threshold = normal_quantile(cfg.gamma);
    const double excess = std::pow(gamma_hat, cfg.p) - std::pow(cfg.alpha, cfg.p);
    if (sigma_hat == 0.0) {
        r.zero_dispersion = true;
        r.statistic = excess > 0.0 ? kInf : (excess < 0.0 ? -kInf : 0.0);
        r.decision = excess > 0.0 ? Decision::Stop : Decision::Continue;
        return r;
    }
    const double nm = double(n) * double(m) / double(n + m);
    r.statistic = std::pow(nm, 1.0 / cfg.p) * excess / sigma_hat;
    r.decision = r.statistic <= r.threshold ? Decision::Continue : Decision::Stop;
    return r;
}

/// Test between consecutive diagrams; n = m = number of pooled cost terms.
inline TestResult diagram_test(const PersistenceDiagram& prev, const PersistenceDiagram& next, const StopConfig& cfg) {
    const auto costs = matched_costs(prev, next, cfg.p);
    const auto s = trimmed_statistic(costs, cfg.gamma, cfg.p);
    return critical_test(s.gamma_hat, s.sigma_hat, s.m, s.m, cfg);
}

struct IterationRecord {
    std::size_t t = 0;
    std::size_t n_points = 0;
    std::uint64_t seed = 0;
    std::array<double, 3> d_b{};
    std::array<double, 3> d_w1{};
    double d_b_max = 0.0;
    double d_w1_total = 0.0;
    std::optional<TestResult> test;  // absent for the baseline and failed iterations
    Decision decision = Decision::Baseline;
    std::string error;
};

struct StopTrace {
    std::string sample_id;
    nlohmann::json config;
    std::string config_hash;
    std::vector<IterationRecord> iterations;
    std::optional<std::size_t> stopped_at;

    const IterationRecord& terminal() const { return iterations.back(); }
};

/// Fills the distances and the test of `rec`, solving each per-dimension
/// matching once when p = 1.
inline void compare_step(const PersistenceDiagram& prev, const PersistenceDiagram& next, const StopConfig& cfg,
                         IterationRecord& rec) {
    std::vector<double> costs;
    for (int k = 0; k <= kMaxHomologyDim; ++k) {
        const auto a = prev.of_dim(k).points, b = next.of_dim(k).points;
        const Matching m = optimal_matching(a, b, cfg.p);
        for (const auto& pr : m.pairs) costs.push_back(pr.cost);
        rec.d_w1[k] = cfg.p == 1.0 ? m.cost(1.0) : wasserstein(a, b, 1.0);
        rec.d_b[k] = bottleneck(a, b);
        rec.d_b_max = std::max(rec.d_b_max, rec.d_b[k]);
    }
    rec.d_w1_total = rec.d_w1[0] + rec.d_w1[1] + rec.d_w1[2];
    const auto s = trimmed_statistic(std::move(costs), cfg.gamma, cfg.p);
    rec.test = critical_test(s.gamma_hat, s.sigma_hat, s.m, s.m, cfg);
}

/// Normalising frame: translate by the bbox corner, scale by 1/diagonal.
struct Frame {
    Point2 origin{0.0, 0.0};
    double scale = 1.0;

    static Frame unit_diagonal(std::span<const Point2> pts) {
        const ClipRect box = ClipRect::bounding(pts);
        const double diag = box.diagonal();
        return {{box.xmin, box.ymin}, diag > 0.0 ? 1.0 / diag : 1.0};
    }
    std::vector<Point2> apply(std::span<const Point2> pts) const {
        std::vector<Point2> out;
        out.reserve(pts.size());
        for (Point2 p : pts) out.push_back(scale * (p - origin));
        return out;
    }
};

/// Diagram (dims 0..2) of the configured filtration.
inline PersistenceDiagram sample_diagram(std::span<const Point2> pts, const FiltrationConfig& cfg, std::uint64_t seed) {
    return compute_diagram(build_filtration(pts, cfg, seed));
}

struct LoopResult {
    Sample sample;  // last sample that passed the test
    StopTrace trace;
};

/// Called with (t, sample, diagram) for the baseline and every augmented
/// sample, including ones generated after STOP when following the
/// unstopped branch.
using LoopObserver = std::function<void(std::size_t, const Sample&, const PersistenceDiagram&)>;

inline std::string config_hash(const nlohmann::json& j) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : j.dump()) h = (h ^ ch) * 0x100000001b3ULL;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline nlohmann::json to_json(const StopConfig& cfg);

/// Augments until the test stops it or max_iters is reached. With
/// `follow_unstopped`, augmentation continues after STOP up to max_iters for
/// the observer only; the trace and returned sample are unaffected.
inline LoopResult run_stopping_loop(const Sample& sample, const StopConfig& cfg, const LoopObserver& observer = {},
                                    bool follow_unstopped = false) {
    cfg.validate();
    sample.validate();
    if (sample.size() < 3) fail(ErrorKind::TooFewPoints, "sample '" + sample.id + "' has fewer than 3 points");

    LoopResult res;
    res.sample = sample;
    res.trace.sample_id = sample.id;
    res.trace.config = to_json(cfg);
    res.trace.config_hash = config_hash(res.trace.config);

    const Frame frame = cfg.normalize ? Frame::unit_diagonal(sample.points) : Frame{};
    const ClipRect clip = ClipRect::around(sample.points, cfg.clip_margin);
    auto diagram_of = [&](const Sample& s, std::size_t t) {
        return sample_diagram(frame.apply(s.points), cfg.filtration, mix_seed(cfg.seed, 0x10000 + t));
    };

    PersistenceDiagram prev = diagram_of(sample, 0);
    IterationRecord base;
    base.n_points = sample.size();
    base.seed = cfg.seed;
    res.trace.iterations.push_back(base);
    if (observer) observer(0, sample, prev);
    if (cfg.max_iters == 0) {
        res.trace.iterations.back().decision = Decision::MaxItersReached;
        return res;
    }

    Sample current = sample;
    bool halted = false;
    for (std::size_t t = 1; t <= cfg.max_iters; ++t) {
        IterationRecord rec;
        rec.t = t;
        rec.seed = mix_seed(cfg.seed, t);
        Sample next;
        PersistenceDiagram diag;
        try {
            const std::size_t n_new = cfg.n_new ? cfg.n_new : current.size();
            next = augment(current, n_new, rec.seed, clip).first;
            rec.n_points = next.size();
            diag = diagram_of(next, t);
            if (!halted) {
                compare_step(prev, diag, cfg, rec);
                rec.decision = rec.test->decision;
            }
        } catch (const Error& e) {
            if (halted) break;
            rec.decision = Decision::Stop;
            rec.error = e.what();
            res.trace.iterations.push_back(rec);
            res.trace.stopped_at = t;
            break;
        }
        if (observer) observer(t, next, diag);
        if (!halted) {
            if (rec.decision == Decision::Stop) {
                res.trace.stopped_at = t;
                res.trace.iterations.push_back(rec);
                halted = true;
                if (!follow_unstopped) break;
            } else {
                if (t == cfg.max_iters) rec.decision = Decision::MaxItersReached;
                res.trace.iterations.push_back(rec);
                res.sample = next;
            }
        }
        current = std::move(next);
        prev = std::move(diag);
    }
    return res;
}

// JSON ------------------------------------------------------------------

namespace detail {

inline nlohmann::json number_or_inf(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
}

}  // namespace detail

inline nlohmann::json to_json(const StopConfig& cfg) {
    return {
        {"alpha", cfg.alpha},
        {"gamma", cfg.gamma},
        {"p", cfg.p},
        {"max_iters", cfg.max_iters},
        {"complex", std::string(to_string(cfg.filtration.kind))},
        {"r_max_policy", cfg.filtration.r_max_policy == RadiusPolicy::Max ? "max" : "mean"},
        {"landmark_fraction", cfg.filtration.landmark_fraction},
        {"landmark_method", cfg.filtration.landmark_method == LandmarkMethod::Uniform ? "uniform" : "maxmin"},
        {"max_dim", cfg.filtration.max_dim},
        {"max_simplices", cfg.filtration.max_simplices},
        {"clip_margin", cfg.clip_margin},
        {"normalize", cfg.normalize},
        {"n_new", cfg.n_new},
        {"seed", cfg.seed},
    };
}

/// Reads the fields present in `j` over the values already in `cfg`.
inline void update_from_json(StopConfig& cfg, const nlohmann::json& j) {
    try {
        if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
        if (j.contains("gamma")) cfg.gamma = j.at("gamma").get<double>();
        if (j.contains("p")) cfg.p = j.at("p").get<double>();
        if (j.contains("max_iters")) cfg.max_iters = j.at("max_iters").get<std::size_t>();
        if (j.contains("complex")) cfg.filtration.kind = parse_complex_kind(j.at("complex").get<std::string>());
        if (j.contains("r_max_policy")) {
            const auto s = j.at("r_max_policy").get<std::string>();
            if (s != "max" && s != "mean") fail(ErrorKind::InvalidArgument, "r_max_policy must be max or mean");
            cfg.filtration.r_max_policy = s == "max" ? RadiusPolicy::Max : RadiusPolicy::Mean;
        }
        if (j.contains("landmark_fraction")) cfg.filtration.landmark_fraction = j.at("landmark_fraction").get<double>();
        if (j.contains("landmark_method")) {
            const auto s = j.at("landmark_method").get<std::string>();
            if (s != "uniform" && s != "maxmin") fail(ErrorKind::InvalidArgument, "landmark_method must be uniform or maxmin");
            cfg.filtration.landmark_method = s == "uniform" ? LandmarkMethod::Uniform : LandmarkMethod::MaxMin;
        }
        if (j.contains("max_dim")) cfg.filtration.max_dim = j.at("max_dim").get<int>();
        if (j.contains("max_simplices")) cfg.filtration.max_simplices = j.at("max_simplices").get<std::size_t>();
        if (j.contains("clip_margin")) cfg.clip_margin = j.at("clip_margin").get<double>();
        if (j.contains("normalize")) cfg.normalize = j.at("normalize").get<bool>();
        if (j.contains("n_new")) cfg.n_new = j.at("n_new").get<std::size_t>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
    }
    cfg.validate();
}

inline nlohmann::json to_json(const IterationRecord& r) {
    auto per_dim = [](const std::array<double, 3>& v) {
        return nlohmann::json{{"0", v[0]}, {"1", v[1]}, {"2", v[2]}};
    };
    nlohmann::json j{
        {"t", r.t},
        {"n_points", r.n_points},
        {"seed", r.seed},
        {"decision", std::string(to_string(r.decision))},
    };
    if (r.t > 0 && r.error.empty()) {
        j["d_b"] = per_dim(r.d_b);
        j["d_w1"] = per_dim(r.d_w1);
        j["d_b_max"] = r.d_b_max;
        j["d_w1_total"] = r.d_w1_total;
    }
    if (r.test) {
        j["gamma_hat"] = r.test->gamma_hat;
        j["sigma_hat"] = r.test->sigma_hat;
        j["statistic"] = detail::number_or_inf(r.test->statistic);
        j["threshold"] = detail::number_or_inf(r.test->threshold);
        j["n"] = r.test->n;
        j["m"] = r.test->m;
        j["zero_dispersion"] = r.test->zero_dispersion;
    }
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

inline nlohmann::json to_json(const StopTrace& t) {
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& r : t.iterations) iters.push_back(to_json(r));
    return {
        {"sample_id", t.sample_id},
        {"config", t.config},
        {"config_hash", t.config_hash},
        {"iterations", iters},
        {"stopped_at", t.stopped_at ? nlohmann::json(*t.stopped_at) : nlohmann::json(nullptr)},
    };
}

}  // namespace topoguard
