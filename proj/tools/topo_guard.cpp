// topo-guard: command-line front-end for the topoguard library.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "topoguard/pipeline.hpp"

namespace tg = topoguard;

namespace {

int exit_code_for(const tg::Error& e) {
    switch (e.kind()) {
        case tg::ErrorKind::ParseError:
        case tg::ErrorKind::TooFewPoints:
        case tg::ErrorKind::InvalidArgument:
        case tg::ErrorKind::NoTraces: return tg::kExitUsage;
        default: return tg::kExitRuntime;
    }
}

// Writes to `path`, or stdout when it is empty or "-".
void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") std::cout << content;
    else tg::write_file_atomic(path, content);
}

tg::Point2 parse_point(const std::string& s) {
    const auto f = tg::detail::split_csv(s);
    tg::Point2 p;
    if (f.size() != 2 || !tg::detail::parse_number(f[0], p.x, false) || !tg::detail::parse_number(f[1], p.y, false))
        tg::fail(tg::ErrorKind::InvalidArgument, "query must be 'x,y', got '" + s + "'");
    return p;
}

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, const char* out_help) {
    cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "random seed (overrides the config)");
    cmd->add_option("--out", c.out, out_help);
}

tg::RunConfig base_config(const Common& c) {
    tg::RunConfig rc = c.config.empty() ? tg::RunConfig{} : tg::load_run_config(c.config);
    if (c.seed) rc.stop.seed = *c.seed;
    if (!c.out.empty()) rc.out_dir = c.out;
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topology-guarded natural-neighbour augmentation of 2D point clouds"};
    app.require_subcommand(1);

    // run
    Common run_c;
    std::vector<std::string> run_inputs;
    std::optional<std::string> run_complex, run_quantity;
    std::optional<double> run_alpha, run_gamma, run_p;
    std::optional<std::size_t> run_iters, run_threads;
    bool print_config = false;
    auto* run = app.add_subcommand("run", "augment samples until the topology test stops them");
    add_common(run, run_c, "output directory");
    run->add_option("-i,--input", run_inputs, "input CSV paths or glob patterns");
    run->add_option("--complex", run_complex, "rips | cech | alpha | witness");
    run->add_option("--alpha", run_alpha, "tolerance for topological change");
    run->add_option("--gamma", run_gamma, "trimming fraction in [0, 0.5)");
    run->add_option("--p", run_p, "Wasserstein order");
    run->add_option("--max-iters", run_iters, "maximum augmentation iterations");
    run->add_option("--threads", run_threads, "worker threads (0 = all cores)");
    run->add_option("--quantity", run_quantity, "summary quantity: norm or a channel name");
    run->add_flag("--print-config", print_config, "print the effective configuration and exit");

    // distance
    std::string dist_a, dist_b;
    double dist_p = 1.0;
    auto* dist = app.add_subcommand("distance", "bottleneck and Wasserstein distances between diagram CSVs");
    dist->add_option("a", dist_a, "first diagram CSV")->required()->check(CLI::ExistingFile);
    dist->add_option("b", dist_b, "second diagram CSV")->required()->check(CLI::ExistingFile);
    dist->add_option("--p", dist_p, "Wasserstein order")->check(CLI::Range(1.0, 1e6));

    // persistence
    Common pers_c;
    std::string pers_input;
    std::optional<std::string> pers_complex;
    bool pers_normalize = false;
    auto* pers = app.add_subcommand("persistence", "persistence diagram of a point cloud");
    add_common(pers, pers_c, "diagram CSV path (stdout if omitted)");
    pers->add_option("-i,--input", pers_input, "input CSV")->required();
    pers->add_option("--complex", pers_complex, "rips | cech | alpha | witness");
    pers->add_flag("--normalize", pers_normalize, "scale the cloud to unit bounding-box diagonal first");

    // interpolate
    Common interp_c;
    std::string interp_input;
    std::vector<std::string> queries;
    double margin = 0.1;
    std::size_t n_new = 0;
    auto* interp = app.add_subcommand("interpolate", "natural-neighbour weights or one augmentation step");
    add_common(interp, interp_c, "augmented sample CSV path (stdout if omitted)");
    interp->add_option("-i,--input", interp_input, "input CSV")->required();
    interp->add_option("-q,--query", queries, "query point 'x,y' (repeatable)");
    interp->add_option("--margin", margin, "clip margin per side as a fraction of the bbox")->check(CLI::NonNegativeNumber);
    interp->add_option("--augment", n_new, "insert this many uniform points instead of answering queries");

    // generate
    Common gen_c;
    std::string shape = "circle";
    tg::SyntheticShape shape_cfg;
    auto* gen = app.add_subcommand("generate", "synthetic point cloud");
    add_common(gen, gen_c, "output CSV path (stdout if omitted)");
    gen->add_option("--shape", shape, "circle | annulus | two_clusters | figure_eight | signature_like");
    gen->add_option("-n", shape_cfg.n, "number of points");
    gen->add_option("--noise", shape_cfg.noise, "Gaussian noise per coordinate");
    gen->add_option("--separation", shape_cfg.separation, "cluster centre distance (two_clusters)");
    gen->add_option("--radius", shape_cfg.radius, "shape radius");

    // stats
    Common stats_c;
    std::vector<std::string> traces;
    auto* stats = app.add_subcommand("stats", "summary statistics over trace.json files");
    add_common(stats, stats_c, "directory for summary.json and summary.csv");
    stats->add_option("traces", traces, "trace.json paths or glob patterns")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : tg::kExitUsage;
    }

    try {
        if (*run) {
            tg::RunConfig rc = base_config(run_c);
            if (!run_inputs.empty()) rc.inputs = run_inputs;
            if (run_complex) rc.stop.filtration.kind = tg::parse_complex_kind(*run_complex);
            if (run_alpha) rc.stop.alpha = *run_alpha;
            if (run_gamma) rc.stop.gamma = *run_gamma;
            if (run_p) rc.stop.p = *run_p;
            if (run_iters) rc.stop.max_iters = *run_iters;
            if (run_threads) rc.threads = *run_threads;
            if (run_quantity) rc.stats_quantity = *run_quantity;
            if (print_config) {
                rc.stop.validate();
                std::cout << tg::to_json(rc).dump(2) << '\n';
                return tg::kExitOk;
            }
            return tg::cmd_run(rc);
        }
        if (*dist) return tg::cmd_distance(dist_a, dist_b, dist_p);
        if (*pers) {
            tg::RunConfig rc = base_config(pers_c);
            if (pers_complex) rc.stop.filtration.kind = tg::parse_complex_kind(*pers_complex);
            rc.stop.validate();
            const auto in = tg::ingest(pers_input);
            for (const auto& w : in.warnings) std::cerr << "warning: " << w << '\n';
            const auto frame = pers_normalize ? tg::Frame::unit_diagonal(in.sample.points) : tg::Frame{};
            const auto d = tg::sample_diagram(frame.apply(in.sample.points), rc.stop.filtration, rc.stop.seed);
            emit(pers_c.out, tg::diagram_csv(d));
            return tg::kExitOk;
        }
        if (*interp) {
            const tg::RunConfig rc = base_config(interp_c);
            const auto in = tg::ingest(interp_input);
            for (const auto& w : in.warnings) std::cerr << "warning: " << w << '\n';
            const auto clip = tg::ClipRect::around(in.sample.points, margin);
            if (n_new > 0) {
                const auto [aug, step] = tg::augment(in.sample, n_new, rc.stop.seed, clip);
                std::ostringstream os;
                tg::write_sample_csv(os, aug);
                emit(interp_c.out, os.str());
                return tg::kExitOk;
            }
            if (queries.empty()) tg::fail(tg::ErrorKind::InvalidArgument, "give --query or --augment");
            const tg::NaturalNeighborInterpolator nn(in.sample, clip);
            std::ostringstream os;
            os << "query,neighbor,lambda\n";
            for (std::size_t qi = 0; qi < queries.size(); ++qi) {
                const auto w = nn.weights(parse_point(queries[qi]));
                for (std::size_t k = 0; k < w.lambdas.size(); ++k)
                    os << qi << ',' << w.neighbor_indices[k] << ',' << tg::format_double(w.lambdas[k]) << '\n';
                const auto vals = nn.apply(w);
                const auto pos = nn.position(w);
                std::cerr << "query " << qi << ": x=" << tg::format_double(pos.x) << " y=" << tg::format_double(pos.y);
                for (std::size_t c = 0; c < vals.size(); ++c)
                    std::cerr << ' ' << in.sample.channels[c].name << '=' << tg::format_double(vals[c]);
                std::cerr << '\n';
            }
            emit("", os.str());
            return tg::kExitOk;
        }
        if (*gen) {
            shape_cfg.kind = tg::parse_shape_kind(shape);
            if (gen_c.seed) shape_cfg.seed = *gen_c.seed;
            std::ostringstream os;
            tg::write_sample_csv(os, tg::generate(shape_cfg));
            emit(gen_c.out, os.str());
            return tg::kExitOk;
        }
        if (*stats) return tg::cmd_stats(traces, stats_c.out);
    } catch (const tg::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return tg::kExitRuntime;
    }
    return tg::kExitUsage;
}
