// qlab - batch front-end for the Q-valued analysis laboratory.
//
// Subcommands: dirmin, freq, whitney, flatten, excess, gallery.  Each reads
// a JSON config, writes its artifacts plus a manifest echoing the effective
// configuration, and exits 0 (ok), 2 (soft-fail: unconverged) or 1 (error).

#include <CLI11.hpp>
#include <json.hpp>

#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "qlab/covering.hpp"
#include "qlab/dirmin.hpp"
#include "qlab/excess.hpp"
#include "qlab/flattening.hpp"
#include "qlab/frequency.hpp"
#include "qlab/gallery.hpp"
#include "qlab/svg.hpp"
#include "qlab/whitney.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace qlab;

namespace {

constexpr const char* kVersion = "qlab 0.1.0";

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed = -1;  // overrides the config seed when >= 0
    int threads = 0;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path);
    return json::parse(in);
}

GridDomain grid_from_config(const json& g) {
    const std::string shape = g.value("shape", "disk");
    const double h = g.at("h").get<double>();
    if (shape == "rectangle")
        return GridDomain::rectangle(g.at("lo").get<Vec>(), g.at("hi").get<Vec>(), h);
    if (shape == "disk")
        return GridDomain::disk(g.value("center", Vec{0.0, 0.0}), g.at("radius").get<double>(),
                                h, g.value("inner_radius", 0.0));
    throw contract_violation("config: unknown grid shape " + shape);
}

// surface samples restricted to a component ("full" keeps both fiber
// coordinates, "re"/"im" keeps one)
QGridFunction surface_function(const json& input, const GridDomain& dom) {
    const auto surface = surface_by_name(input.at("surface").get<std::string>());
    const std::string component = input.value("component", "full");
    const auto sampled = sample_on_grid(surface, dom);
    if (component == "full") return sampled.f;
    const int pick = component == "re" ? 0 : component == "im" ? 1 : -1;
    if (pick < 0) throw contract_violation("config: component must be full/re/im");
    QGridFunction f(dom, surface.q, 1);
    for (std::size_t v : dom.domain_vertices())
        for (int i = 0; i < surface.q; ++i)
            f.value(v).point(i)[0] = sampled.f.value(v).point(i)[pick];
    f.rematch_all();
    return f;
}

QGridFunction input_function(const json& input, const GridDomain& dom) {
    if (input.contains("surface")) return surface_function(input, dom);
    if (input.contains("function_header"))
        return load_qgrid_function(input.at("function_header").get<std::string>(),
                                   input.at("function_table").get<std::string>());
    if (input.contains("zero")) {
        QGridFunction f(dom, input.value("q", 1), input.value("n", 1));
        f.rematch_all();
        return f;
    }
    throw contract_violation("config: input needs surface, function_header or zero");
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const ordered_json& effective_config, const ordered_json& results) {
    ordered_json m;
    m["version"] = kVersion;
    m["command"] = command;
    m["config"] = effective_config;
    m["results"] = results;
    std::ofstream out(out_dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest");
    out << m.dump(2) << "\n";
}

double slope_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    const int k = static_cast<int>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < k; ++i) {
        const double lx = std::log(xs[i]), ly = std::log(std::abs(ys[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

// ---- dirmin ------------------------------------------------------------

int cmd_dirmin(const CommonOpts& opts) {
    const json cfg = load_config(opts.config_path);
    const fs::path out(opts.out_dir);
    fs::create_directories(out);

    const GridDomain dom = grid_from_config(cfg.at("grid"));
    const json jtrace = cfg.at("trace");
    TraceData trace;
    int q = 0, n = 0;
    if (jtrace.contains("surface")) {
        const auto f = surface_function(jtrace, dom);
        q = f.q();
        n = f.n();
        for (std::size_t v : dom.boundary_vertices()) trace.values.emplace(v, f.value(v));
    } else {
        q = jtrace.at("q").get<int>();
        n = jtrace.at("n").get<int>();
        trace = load_trace(dom, q, n, jtrace.at("trace_table").get<std::string>());
    }

    SolverConfig solver;
    const json js = cfg.value("solver", json::object());
    solver.max_outer_iters = js.value("max_outer_iters", solver.max_outer_iters);
    solver.inner_sweeps = js.value("inner_sweeps", solver.inner_sweeps);
    solver.restarts = js.value("restarts", solver.restarts);
    solver.energy_tol = js.value("energy_tol", solver.energy_tol);
    solver.rng_seed = js.value("seed", 1);
    solver.init_coupled_sweeps = js.value("init_coupled_sweeps", solver.init_coupled_sweeps);
    solver.defect_polish_moves = js.value("defect_polish_moves", solver.defect_polish_moves);
    if (js.contains("temperature_schedule"))
        solver.reassignment_temperature_schedule =
            js.at("temperature_schedule").get<std::vector<double>>();
    if (opts.seed >= 0) solver.rng_seed = static_cast<std::uint64_t>(opts.seed);

    const auto res = dir_minimize(trace, dom, solver);

    save_qgrid_function(res.f, (out / "minimizer_header.json").string(),
                        (out / "minimizer_table.csv").string());
    {
        std::ofstream log(out / "energy_log.csv");
        log << "restart,outer_iter,energy\n";
        for (std::size_t r = 0; r < res.all_histories.size(); ++r)
            for (std::size_t i = 0; i < res.all_histories[r].size(); ++i)
                log << r << "," << i << "," << format_double(res.all_histories[r][i]) << "\n";
    }

    ordered_json echo;
    echo["grid"] = cfg.at("grid");
    echo["trace"] = jtrace;
    echo["solver"] = {{"max_outer_iters", solver.max_outer_iters},
                      {"inner_sweeps", solver.inner_sweeps},
                      {"restarts", solver.restarts},
                      {"energy_tol", solver.energy_tol},
                      {"seed", solver.rng_seed},
                      {"init_coupled_sweeps", solver.init_coupled_sweeps},
                      {"defect_polish_moves", solver.defect_polish_moves},
                      {"temperature_schedule", solver.reassignment_temperature_schedule}};
    ordered_json results;
    results["final_energy"] = res.energy;
    results["converged"] = res.converged;
    results["residual"] = res.residual;
    results["outer_iters"] = res.outer_iters;
    results["best_restart"] = res.best_restart;
    write_manifest(out, "dirmin", echo, results);
    return res.converged ? 0 : 2;
}

// ---- freq --------------------------------------------------------------

int cmd_freq(const CommonOpts& opts) {
    const json cfg = load_config(opts.config_path);
    const fs::path out(opts.out_dir);
    fs::create_directories(out);

    const GridDomain dom = grid_from_config(cfg.at("grid"));
    const QGridFunction f = input_function(cfg.at("input"), dom);
    const Vec center = cfg.value("center", Vec{0.0, 0.0});
    const double r_min = cfg.at("r_min").get<double>();
    const double r_max = cfg.at("r_max").get<double>();
    const int steps = cfg.value("steps", 24);
    const std::string variant = cfg.value("variant", "smoothed");
    const double tolerance = cfg.value("tolerance", 0.05);

    std::vector<std::pair<std::string, FrequencyVariant>> runs;
    if (variant == "classical" || variant == "both")
        runs.emplace_back("classical", FrequencyVariant::Classical);
    if (variant == "smoothed" || variant == "both")
        runs.emplace_back("smoothed", FrequencyVariant::Smoothed);
    if (runs.empty()) throw contract_violation("config: variant must be classical/smoothed/both");

    ordered_json results;
    std::vector<PlotSeries> series;
    for (const auto& [name, var] : runs) {
        const auto prof = frequency_profile(f, center, r_min, r_max, steps, var);
        save_profile_csv(prof, (out / ("profile_" + name + ".csv")).string());
        PlotSeries s;
        s.label = "I(r) " + name;
        s.color = name == "classical" ? "#d7504b" : "#1f6fb2";
        for (const auto& e : prof.entries)
            if (e.I) s.points.emplace_back(e.r, *e.I);
        series.push_back(std::move(s));
        ordered_json rj;
        rj["defined_entries"] = static_cast<int>(series.back().points.size());
        if (const auto vo = prof.vanishing_order()) rj["vanishing_order"] = *vo;
        try {
            const auto rep = monotonicity_report(prof, tolerance);
            rj["almost_monotonicity_constant"] = rep.almost_monotonicity_constant;
            rj["largest_violation"] = rep.largest_violation;
            rj["pass"] = rep.pass;
        } catch (const contract_violation&) {
            rj["monotonicity"] = "insufficient-data";
        }
        results[name] = std::move(rj);
    }
    svg_line_plot((out / "profile.svg").string(), series, "r", "I(r)");
    {
        std::ofstream rep(out / "monotonicity.json");
        rep << results.dump(2) << "\n";
    }

    write_manifest(out, "freq", ordered_json::parse(cfg.dump()), results);
    return 0;
}

// ---- whitney -----------------------------------------------------------

CriterionOracle oracle_from_config(const json& jo, double excess_E) {
    const std::string kind = jo.value("kind", "zero");
    if (kind == "zero")
        return {[](const DyadicCube&) { return 0.0; }, [](const DyadicCube&) { return 0.0; }};
    if (kind == "synthetic-bumps") {
        struct Bump {
            Vec c;
            double amp, sigma;
        };
        auto bumps = std::make_shared<std::vector<Bump>>();
        Rng rng(jo.value("seed", 1));
        const int count = jo.value("bumps", 3);
        const int m = jo.value("m", 2);
        for (int k = 0; k < count; ++k) {
            Bump b;
            for (int a = 0; a < m; ++a) b.c.push_back(rng.uniform(-4, 4));
            b.amp = rng.uniform(0.0, jo.value("amplitude", 1e-4));
            b.sigma = rng.uniform(0.3, 2.0);
            bumps->push_back(b);
        }
        auto field = [bumps](const DyadicCube& cube) {
            double v = 0.0;
            for (const auto& b : *bumps) {
                double d2 = 0.0;
                for (int a = 0; a < cube.m; ++a) {
                    const double d = cube.center[a] - b.c[a];
                    d2 += d * d;
                }
                v += b.amp * std::exp(-d2 / (b.sigma * b.sigma));
            }
            return v;
        };
        return {[field](const DyadicCube& cube) { return field(cube) * cube.half_side; },
                [field](const DyadicCube& cube) { return 0.5 * field(cube) * cube.half_side; }};
    }
    if (kind == "branch-point") {
        // closed-form stand-in for a branch point of homogeneity alpha at
        // the origin: excess ~ kappa max(|x|, ball), height ~ (.)^{alpha}
        const double kappa = jo.value("kappa", 1.5) * excess_E;
        const double alpha = jo.value("alpha", 1.5);
        const double hcoef = jo.value("height_coefficient", 2.0) * std::sqrt(excess_E);
        return {[kappa](const DyadicCube& cube) {
                    return kappa * std::max(norm(cube.center), cube.ball_radius);
                },
                [hcoef, alpha](const DyadicCube& cube) {
                    return hcoef * std::pow(norm(cube.center) + cube.ball_radius, alpha);
                }};
    }
    throw contract_violation("config: unknown oracle kind " + kind);
}

int cmd_whitney(const CommonOpts& opts) {
    const json cfg = load_config(opts.config_path);
    const fs::path out(opts.out_dir);
    fs::create_directories(out);

    WhitneyParams params;
    const json jp = cfg.value("params", json::object());
    params.C_e = jp.value("C_e", params.C_e);
    params.C_h = jp.value("C_h", params.C_h);
    params.gamma1 = jp.value("gamma1", params.gamma1);
    params.N0 = jp.value("N0", params.N0);
    params.M0 = jp.value("M0", params.M0);
    params.excess_E = jp.value("excess_E", params.excess_E);
    params.ball_factor = jp.value("ball_factor", params.ball_factor);
    const int m = cfg.value("m", 2);
    const int max_depth = cfg.value("max_depth", params.N0 + 3);

    const auto oracle = oracle_from_config(cfg.value("oracle", json::object()), params.excess_E);
    const auto tree = build_decomposition(oracle, params, m, max_depth);
    save_cube_tree_json(tree, (out / "tree.json").string());
    if (m == 2) svg_cube_tree((out / "tree.svg").string(), tree);

    ordered_json results;
    results["W_e"] = tree.w_cubes(CubeClass::We).size();
    results["W_h"] = tree.w_cubes(CubeClass::Wh).size();
    results["W_n"] = tree.w_cubes(CubeClass::Wn).size();
    results["gamma_cells"] = tree.gamma_cells().size();
    results["paper_scale"] = tree.params().paper_scale_ok(m);
    write_manifest(out, "whitney", ordered_json::parse(cfg.dump()), results);
    return 0;
}

// ---- flatten -----------------------------------------------------------

int cmd_flatten(const CommonOpts& opts) {
    const json cfg = load_config(opts.config_path);
    const fs::path out(opts.out_dir);
    fs::create_directories(out);

    FlatteningConfig fc;
    fc.epsilon3 = cfg.at("epsilon3").get<double>();
    fc.current_backed = cfg.value("current_backed", false);

    std::function<double(double)> profile;
    if (cfg.contains("R_set")) {
        const auto segs = cfg.at("R_set").get<std::vector<std::pair<double, double>>>();
        profile = [segs, eps = fc.epsilon3](double r) {
            for (const auto& [lo, hi] : segs)
                if (r >= lo && r <= hi) return 0.0;
            return 2.0 * eps * eps;
        };
    } else {
        throw contract_violation("config: flatten needs an R_set");
    }
    std::function<std::optional<double>(double)> stop;
    if (cfg.contains("stop_rbar") && !cfg.at("stop_rbar").is_null()) {
        const double rbar = cfg.at("stop_rbar").get<double>();
        stop = [rbar](double) { return std::optional<double>(rbar); };
    } else {
        stop = [](double) { return std::optional<double>{}; };
    }
    const auto sched = flattening_schedule(profile, stop, fc);
    save_schedule_json(sched, (out / "schedule.json").string());

    ordered_json results;
    results["t0"] = sched.t0;
    results["intervals"] = sched.intervals.size();
    results["truncated"] = sched.truncated;
    write_manifest(out, "flatten", ordered_json::parse(cfg.dump()), results);
    return 0;
}

// ---- excess ------------------------------------------------------------

QGraphCurrent current_from_config(const json& jc) {
    const std::string kind = jc.value("kind", "tilt");
    if (kind == "tilt") {
        const double a = jc.value("a", 0.3);
        const double half = jc.value("halfwidth", 1.0);
        const double h = jc.value("h", 1.0 / 32);
        const auto dom = GridDomain::rectangle({-half, -half}, {half, half}, h);
        QGridFunction f(dom, 1, 1);
        for (std::size_t v : dom.domain_vertices())
            f.value(v).point(0)[0] = a * dom.position(v)[0];
        f.rematch_all();
        return make_graph_current(std::move(f));
    }
    if (kind == "surface") {
        const auto dom = grid_from_config(jc.at("grid"));
        return sample_on_grid(surface_by_name(jc.at("name").get<std::string>()), dom).current;
    }
    throw contract_violation("config: unknown current kind " + kind);
}

int cmd_excess(const CommonOpts& opts) {
    const json cfg = load_config(opts.config_path);
    const fs::path out(opts.out_dir);
    fs::create_directories(out);

    const auto T = current_from_config(cfg.at("current"));
    const json jr = cfg.at("region");
    const std::string rkind = jr.value("kind", "cylinder");
    const Vec center = jr.at("center").get<Vec>();
    const double radius = jr.at("radius").get<double>();
    const json jplane = cfg.value("plane", json("pi0"));

    ExcessReport rep;
    if (rkind == "cylinder") {
        Plane plane(2, T.n());
        if (jplane.is_object() && jplane.contains("tilt"))
            plane = Plane(2, T.n(), jplane.at("tilt").get<Vec>());
        rep = cylindrical_excess(T, center, radius, plane);
    } else if (rkind == "ball") {
        if (jplane.is_string() && jplane.get<std::string>() == "optimize") {
            rep = spherical_excess(T, center, radius);
        } else {
            Plane plane(2, T.n());
            if (jplane.is_object() && jplane.contains("tilt"))
                plane = Plane(2, T.n(), jplane.at("tilt").get<Vec>());
            rep = spherical_excess_at_plane(T, center, radius, plane);
        }
    } else {
        throw contract_violation("config: region kind must be cylinder or ball");
    }
    save_excess_report(rep, (out / "excess.json").string());

    ordered_json results;
    results["excess"] = rep.excess;
    results["mass_deficit_excess"] = rep.mass_deficit_excess;
    results["height"] = rep.height;
    results["mass"] = rep.mass;
    results["plane_tilt"] = rep.plane.tilt;
    write_manifest(out, "excess", ordered_json::parse(cfg.dump()), results);
    return 0;
}

// ---- gallery -----------------------------------------------------------

int cmd_gallery(const CommonOpts& opts) {
    const json cfg = load_config(opts.config_path);
    const fs::path out(opts.out_dir);
    fs::create_directories(out);

    const std::string name = cfg.at("surface").get<std::string>();
    const auto surface = surface_by_name(name);
    ordered_json results;

    if (cfg.contains("grid")) {
        const auto dom = grid_from_config(cfg.at("grid"));
        const auto sampled = sample_on_grid(surface, dom);
        if (cfg.value("write_function", true))
            save_qgrid_function(sampled.f, (out / "function_header.json").string(),
                                (out / "function_table.csv").string());
        double residual = 0.0;
        for (std::size_t v : dom.domain_vertices()) {
            const Vec p = dom.position(v);
            for (int i = 0; i < surface.q; ++i) {
                auto w = sampled.f.value(v).point(i);
                residual = std::max(
                    residual, surface.defining_residual(p[0], p[1], Vec(w.begin(), w.end())));
            }
        }
        results["max_defining_residual"] = residual;
        results["branch_vertices"] = sampled.branch_vertices.size();
        results["graph_mass"] = graph_mass_exact(sampled.current);
        results["dirichlet_energy"] = dirichlet_energy(sampled.f);
    }

    if (cfg.contains("decay_radii")) {
        const auto radii = cfg.at("decay_radii").get<std::vector<double>>();
        const int cells = cfg.value("decay_grid_cells", 48);
        std::vector<double> excesses(radii.size()), heights(radii.size());
        Plane pi0(2, surface.n);
        parallel_for(radii.size(), [&](std::size_t i) {
            const double r = radii[i];
            const auto dom = GridDomain::disk({0, 0}, r, r / cells);
            const auto s = sample_on_grid(surface, dom);
            const double rc = r * (1.0 - 3.0 / cells);
            const auto rep = cylindrical_excess(s.current, {0, 0}, rc, pi0);
            excesses[i] = rep.excess;
            heights[i] = rep.height;
        });
        ordered_json decay = ordered_json::array();
        for (std::size_t i = 0; i < radii.size(); ++i)
            decay.push_back({{"r", radii[i]}, {"excess", excesses[i]}, {"height", heights[i]}});
        results["decay"] = std::move(decay);
        std::vector<double> rr(radii.begin(), radii.end());
        results["height_loglog_slope"] = slope_fit(rr, heights);
        bool decreasing = true;
        for (std::size_t i = 1; i < excesses.size(); ++i)
            if (excesses[i] >= excesses[i - 1]) decreasing = false;
        results["excess_strictly_decreasing"] = decreasing;
        PlotSeries se{"excess vs r", "#d7504b", {}}, sh{"height vs r", "#1f6fb2", {}};
        for (std::size_t i = 0; i < radii.size(); ++i) {
            se.points.emplace_back(radii[i], excesses[i]);
            sh.points.emplace_back(radii[i], heights[i]);
        }
        svg_line_plot((out / "decay.svg").string(), {se, sh}, "r", "value", true, true);
    }

    {
        std::ofstream sum(out / "summary.json");
        sum << results.dump(2) << "\n";
    }
    write_manifest(out, "gallery", ordered_json::parse(cfg.dump()), results);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for Q-valued functions and graph currents"};
    app.require_subcommand(1);

    CommonOpts opts;

    const std::map<std::string, std::function<int(const CommonOpts&)>> commands = {
        {"dirmin", cmd_dirmin},   {"freq", cmd_freq},     {"whitney", cmd_whitney},
        {"flatten", cmd_flatten}, {"excess", cmd_excess}, {"gallery", cmd_gallery},
    };
    const std::map<std::string, std::string> descriptions = {
        {"dirmin", "Dirichlet minimization with a fixed boundary trace"},
        {"freq", "frequency function profiles and monotonicity reports"},
        {"whitney", "dyadic Whitney decomposition from a criterion oracle"},
        {"flatten", "intervals-of-flattening schedule from a synthetic profile"},
        {"excess", "cylindrical/spherical excess reports"},
        {"gallery", "analytic example surfaces and decay experiments"},
    };

    std::string picked;
    for (const auto& [cmd_name, fn] : commands) {
        auto* sub = app.add_subcommand(cmd_name, descriptions.at(cmd_name));
        sub->add_option("--config", opts.config_path, "JSON configuration file")->required();
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--seed", opts.seed, "RNG seed override");
        sub->add_option("--threads", opts.threads,
                        "worker thread count (default QLAB_THREADS or 1)");
        sub->callback([&picked, cmd_name] { picked = cmd_name; });
    }

    CLI11_PARSE(app, argc, argv);
    if (opts.threads > 0) set_default_thread_count(opts.threads);

    try {
        return commands.at(picked)(opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
