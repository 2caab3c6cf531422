#include "morse/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "morse/critical.hpp"
#include "morse/fields.hpp"
#include "morse/flow.hpp"
#include "morse/moduli.hpp"
#include "morse/svg_plot.hpp"
#include "morse/topology.hpp"

namespace morse {

using nlohmann::json;

namespace {

double require_number(const json& j, const std::string& key) {
    if (!j.contains(key)) throw Error("schema violation: missing key '" + key + "'");
    if (!j[key].is_number()) throw Error("schema violation: '" + key + "' must be a number");
    return j[key].get<double>();
}

int require_int(const json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_number_integer())
        throw Error("schema violation: '" + key + "' must be an integer");
    return j[key].get<int>();
}

std::string require_string(const json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_string())
        throw Error("schema violation: '" + key + "' must be a string");
    return j[key].get<std::string>();
}

}  // namespace

ProblemDef parse_problem(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("problem file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error("schema violation: top level must be an object");
    if (!doc.contains("manifold") || !doc["manifold"].is_object())
        throw Error("schema violation: missing 'manifold' object");

    const json& jm = doc["manifold"];
    int p = require_int(jm, "torus_dims");
    int q = require_int(jm, "euclidean_dims");
    if (!jm.contains("periods") || !jm["periods"].is_array())
        throw Error("schema violation: 'manifold.periods' must be an array");
    std::vector<double> periods;
    for (const auto& v : jm["periods"]) {
        if (!v.is_number()) throw Error("schema violation: periods must be numbers");
        periods.push_back(v.get<double>());
    }
    ManifoldModel m(p, q, periods);

    if (!doc.contains("Z") || !doc["Z"].is_object() || !doc["Z"].contains("pinned") ||
        !doc["Z"]["pinned"].is_array())
        throw Error("schema violation: 'Z.pinned' must be an array");
    std::vector<int> pin_idx;
    std::vector<double> pin_val;
    for (const auto& e : doc["Z"]["pinned"]) {
        pin_idx.push_back(require_int(e, "index"));
        pin_val.push_back(e.contains("value") ? require_number(e, "value") : 0.0);
    }
    SubmanifoldSpec z(pin_idx, pin_val);

    ScalarField F = ScalarField::parse(require_string(doc, "F"));
    ScalarField h = ScalarField::parse(require_string(doc, "h"));

    Tolerances tol;
    if (doc.contains("tolerances")) {
        if (!doc["tolerances"].is_object())
            throw Error("schema violation: 'tolerances' must be an object");
        for (auto it = doc["tolerances"].begin(); it != doc["tolerances"].end(); ++it) {
            if (!it.value().is_number())
                throw Error("schema violation: tolerance '" + it.key() + "' must be a number");
            tol.set(it.key(), it.value().get<double>());
        }
    }
    std::vector<int> seeds;
    if (doc.contains("seed_grid")) {
        if (!doc["seed_grid"].is_array())
            throw Error("schema violation: 'seed_grid' must be an array");
        for (const auto& v : doc["seed_grid"]) {
            if (!v.is_number_integer())
                throw Error("schema violation: seed_grid entries must be integers");
            seeds.push_back(v.get<int>());
        }
    }
    return ProblemDef(std::move(m), std::move(z), std::move(F), std::move(h), tol,
                      std::move(seeds));
}

ProblemDef parse_problem_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open problem file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_problem(ss.str());
}

namespace {

json point_json(const Point& x) {
    json a = json::array();
    for (double v : x.c) a.push_back(v);
    return a;
}

json theorem_json(const TheoremReport& r) {
    json j;
    j["norm_hF"] = r.norm_hF;
    j["norm_certified"] = r.norm_certified;
    j["gap"] = r.gap_infinite ? json("infinite") : json(r.gap);
    j["applicable"] = r.applicable;
    j["required"] = r.required;
    j["found_total"] = r.found_total;
    j["found_in_window"] = r.found_in_window;
    j["window"] = json::array({-r.window, r.window});
    j["verdict"] = to_string(r.verdict);
    j["advisory"] = r.advisory;
    if (r.advisory) j["advisory_reason"] = r.advisory_reason;
    json pts = json::array();
    for (const auto& cp : r.critical_points) {
        json pj;
        pj["location"] = point_json(cp.location);
        pj["value"] = cp.value;
        pj["morse_index"] = cp.morse_index ? json(*cp.morse_index) : json("degenerate");
        pj["hessian_spectrum"] = cp.hessian_spectrum;
        pj["basin_id"] = cp.basin_id;
        pj["in_window"] = std::abs(cp.value) <= r.norm_hF + 1e-9;
        pts.push_back(pj);
    }
    j["critical_points"] = pts;
    json degs = json::array();
    for (const auto& c : r.degenerate_components) {
        json dj;
        dj["representatives"] = c.reps.size();
        dj["first"] = point_json(c.reps.front());
        dj["value"] = c.value;
        degs.push_back(dj);
    }
    j["degenerate_components"] = degs;
    return j;
}

struct CommandContext {
    const RunConfig& cfg;
    ProblemDef& p;
    std::filesystem::path out;
    json report;
    std::ostream& err;

    double set_or(const std::string& key, double fallback) const {
        for (const auto& kv : cfg.overrides)
            if (kv.first == key) return std::stod(kv.second);
        return fallback;
    }
};

void plot_beta(const BumpFamily& b, const std::filesystem::path& path) {
    std::vector<double> xs, ys;
    double s0 = -2, s1 = b.support_end() + 1;
    for (int i = 0; i <= 800; ++i) {
        double s = s0 + (s1 - s0) * i / 800;
        xs.push_back(s);
        ys.push_back(b(s).value);
    }
    SvgPlot plot(640, 240, "bump profile r=" + std::to_string(b.r) + " k=" + std::to_string(b.k));
    plot.add_series(xs, ys, "#1b6ca8");
    plot.save(path.string());
}

void plot_trajectory(const Trajectory& t, const std::filesystem::path& path) {
    SvgPlot plot(640, 320, "trajectory projections");
    const char* colors[] = {"#1b6ca8", "#b8336a", "#2e8540", "#b25d00", "#5d3fd3", "#444444"};
    std::size_t dim = t.samples.front().x.size();
    std::vector<double> xs;
    for (const auto& s : t.samples) xs.push_back(s.s);
    for (std::size_t c = 0; c < dim; ++c) {
        std::vector<double> ys;
        for (const auto& s : t.samples) ys.push_back(s.x[c]);
        plot.add_series(xs, ys, colors[c % 6]);
    }
    plot.save(path.string());
}

double energy_identity_residual(const Trajectory& t) {
    const auto& a = t.front();
    const auto& b = t.back();
    double quad = b.energy_acc - a.energy_acc;
    double endpoint = a.G - b.G + (b.ramp_acc - a.ramp_acc);
    return std::abs(quad - endpoint);
}

int cmd_verify(CommandContext& ctx) {
    TheoremReport rep = verify_cuplength_bound(ctx.p);
    ctx.report["theorem"] = theorem_json(rep);
    ctx.report["verdict"] = to_string(rep.verdict);

    // Lemma sweep: a small moduli batch feeds the per-lemma maxima.
    json diag;
    if (rep.applicable) {
        int k = cuplength(ctx.p.zset, ctx.p.manifold);
        BumpFamily b(k, 1.0);
        ModuliBatch batch = solve_moduli(ctx.p, b, ctx.p.z_seeds(8));
        double mg = 0, mf = 0, me = 0, mres = 0;
        for (const auto& e : batch.accepted) {
            mg = std::max(mg, e.diagnostics.max_abs_G);
            mf = std::max(mf, e.diagnostics.max_abs_F);
            me = std::max(me, e.diagnostics.energy);
            mres = std::max(mres, energy_identity_residual(e.trajectory));
        }
        diag["lemma_sweep"] = {{"r", 1.0},
                               {"elements", batch.accepted.size()},
                               {"rejected", batch.rejected.size()},
                               {"max_abs_G", mg},
                               {"max_abs_F", mf},
                               {"max_energy", me},
                               {"max_energy_identity_residual", mres},
                               {"norm_hF", batch.norm_hF}};
    }
    FdCheckResult fd = fd_check(ctx.p.F, ctx.p.manifold, 100, ctx.cfg.rng_seed + 1, ctx.p.tol);
    diag["fd_check_F"] = {{"max_grad_rel_err", fd.max_grad_rel_err},
                          {"max_hess_rel_err", fd.max_hess_rel_err}};
    MorseBottReport mb = morse_bott_verify(ctx.p);
    diag["morse_bott"] = {{"pass", mb.pass},
                          {"transverse_eigenvalues", mb.transverse_eigenvalues},
                          {"max_tangential", mb.max_tangential}};
    ctx.report["diagnostics"] = diag;

    switch (rep.verdict) {
        case Verdict::Pass: return 0;
        case Verdict::HypothesisViolated: return 2;
        case Verdict::BoundViolated: return 3;
    }
    return 1;
}

int cmd_spectrum(CommandContext& ctx) {
    SpectralGapResult gap = spectral_gap(ctx.p);
    MorseBottReport mb = morse_bott_verify(ctx.p);
    CriticalSet cs = find_critical_points(ctx.p.F, ctx.p);
    json j;
    j["gap"] = gap.infinite ? json("infinite") : json(gap.value);
    j["critical_components_off_Z"] = gap.critical_components;
    j["failed_seeds"] = gap.failed_seeds;
    j["degenerate_warning"] = gap.degenerate_warning;
    j["morse_bott_pass"] = mb.pass;
    j["transverse_eigenvalues"] = mb.transverse_eigenvalues;
    json comps = json::array();
    for (const auto& c : cs.components)
        comps.push_back({{"first", point_json(c.reps.front())},
                         {"representatives", c.reps.size()},
                         {"value", c.value},
                         {"degenerate", c.degenerate},
                         {"distance_to_Z", c.distance_to_Z}});
    j["components"] = comps;
    ctx.report["diagnostics"] = j;
    ctx.report["verdict"] = mb.pass ? "pass" : "BOUND_VIOLATED";
    return mb.pass ? 0 : 3;
}

int cmd_flow(CommandContext& ctx) {
    int k = cuplength(ctx.p.zset, ctx.p.manifold);
    double r = ctx.set_or("r", 0.0);
    BumpFamily b(k, r);

    // Default start: an off-Z perturbation of a Z point.
    Point x0 = ctx.p.z_seeds(4).front();
    for (int j : ctx.p.zset.pinned_indices()) x0.c[static_cast<std::size_t>(j)] += 0.3;
    for (const auto& kv : ctx.cfg.overrides)
        if (kv.first == "start") {
            std::vector<double> c;
            std::stringstream ss(kv.second);
            std::string tok;
            while (std::getline(ss, tok, ',')) c.push_back(std::stod(tok));
            x0 = Point(c);
        }

    double horizon = integration_horizon(ctx.p, b);
    Trajectory t = integrate(ctx.p, b, x0, -1.0, horizon);
    {
        std::ofstream csv(ctx.out / "trajectory.csv");
        write_trajectory_csv(t, csv);
    }
    plot_beta(b, ctx.out / "beta.svg");
    plot_trajectory(t, ctx.out / "trajectory.svg");

    double radius = ctx.set_or("tube_radius", 1.0);
    json j;
    j["samples"] = t.samples.size();
    j["converged"] = t.converged;
    j["energy"] = t.samples.size() >= 2 ? energy(t) : 0.0;
    j["energy_identity_residual"] = energy_identity_residual(t);
    try {
        ExponentialRateResult er = exponential_rate(ctx.p, t, radius);
        j["exponential_rate"] = {{"fitted_B", er.fitted_B},
                                 {"predicted_bound", er.predicted_bound},
                                 {"satisfies_bound", er.satisfies_bound},
                                 {"tail_points", er.tail_points}};
    } catch (const Error& e) {
        j["exponential_rate"] = {{"error", e.what()}};
    }
    ActionEnergyResult ae = action_energy_constant(ctx.p, radius);
    j["action_energy_C"] = ae.C;
    ctx.report["diagnostics"] = j;
    ctx.report["verdict"] = "pass";
    return 0;
}

int cmd_moduli(CommandContext& ctx) {
    int k = cuplength(ctx.p.zset, ctx.p.manifold);
    std::vector<double> rs{0.25, 1.0, 4.0, 16.0};
    for (const auto& kv : ctx.cfg.overrides)
        if (kv.first == "r") rs = {std::stod(kv.second)};

    int seeds_per_axis = static_cast<int>(ctx.set_or("z_seeds", 64));
    json per_r = json::array();
    double mg = 0, mf = 0, me = 0, mres = 0;
    int total = 0, rejected = 0;
    bool first_dump = true;
    for (double r : rs) {
        BumpFamily b(k, r);
        ModuliBatch batch = solve_moduli(ctx.p, b, ctx.p.z_seeds(seeds_per_axis));
        for (const auto& e : batch.accepted) {
            mg = std::max(mg, e.diagnostics.max_abs_G);
            mf = std::max(mf, e.diagnostics.max_abs_F);
            me = std::max(me, e.diagnostics.energy);
            mres = std::max(mres, energy_identity_residual(e.trajectory));
        }
        total += static_cast<int>(batch.accepted.size());
        rejected += static_cast<int>(batch.rejected.size());
        per_r.push_back({{"r", r},
                         {"accepted", batch.accepted.size()},
                         {"rejected", batch.rejected.size()},
                         {"norm_hF", batch.norm_hF}});
        if (first_dump && !batch.accepted.empty()) {
            std::ofstream csv(ctx.out / "moduli_first.csv");
            write_trajectory_csv(batch.accepted.front().trajectory, csv);
            plot_trajectory(batch.accepted.front().trajectory, ctx.out / "moduli_first.svg");
            plot_beta(b, ctx.out / "beta.svg");
            first_dump = false;
        }
    }
    json j;
    j["per_r"] = per_r;
    j["elements"] = total;
    j["rejected"] = rejected;
    j["max_abs_G"] = mg;
    j["max_abs_F"] = mf;
    j["max_energy"] = me;
    j["max_energy_identity_residual"] = mres;
    ctx.report["diagnostics"] = j;
    bool ok = rejected == 0;
    ctx.report["verdict"] = ok ? "pass" : "BOUND_VIOLATED";
    return ok ? 0 : 3;
}

int cmd_chain(CommandContext& ctx) {
    int k = cuplength(ctx.p.zset, ctx.p.manifold);
    std::vector<double> rs{4, 8, 16, 32};
    BreakingChain chain = breaking_analysis(ctx.p, k, rs, ctx.cfg.rng_seed);

    json pts = json::array();
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < chain.limit_points.size(); ++i) {
        const auto& cp = chain.limit_points[i];
        pts.push_back({{"location", point_json(cp.location)},
                       {"h_value", cp.h_value},
                       {"grad_norm", cp.grad_norm},
                       {"window_s", cp.window_s}});
        xs.push_back(static_cast<double>(i));
        ys.push_back(cp.h_value);
    }
    SvgPlot plot(480, 280, "breaking chain h-values");
    plot.add_series(xs, ys, "#b8336a");
    plot.save((ctx.out / "chain.svg").string());

    json j;
    j["r_sequence"] = chain.r_sequence;
    j["limit_points"] = pts;
    j["strict_links"] = chain.strict;
    j["per_r_values"] = chain.per_r_values;
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < chain.limit_points.size(); ++i)
        if (chain.limit_points[i].h_value < chain.limit_points[i + 1].h_value - 1e-8)
            monotone = false;
    j["monotone"] = monotone;
    ctx.report["diagnostics"] = j;
    ctx.report["verdict"] = monotone ? "pass" : "BOUND_VIOLATED";
    return monotone ? 0 : 3;
}

int cmd_homology(CommandContext& ctx) {
    std::mt19937_64 rng(ctx.cfg.rng_seed);
    ManifoldModel zm = ctx.p.zset.intrinsic_manifold(ctx.p.manifold);
    ZMorseFunction f = ZMorseFunction::random(zm, rng);
    MorseComplexZ2 cx = build_complex(f, ctx.p);
    {
        std::ofstream dump(ctx.out / "complex.txt");
        cx.dump(dump);
    }
    std::vector<int> b = betti(cx);
    CohomologyProfile closed = catalog_profile(ctx.p.zset, ctx.p.manifold);
    json j;
    j["betti"] = b;
    j["betti_closed_form"] = closed.betti;
    j["cuplength"] = closed.cuplength;
    j["differential_squared_zero"] = cx.differential_squared_zero();
    j["generators"] = cx.generators.size();
    bool ok = b == closed.betti && cx.differential_squared_zero();
    j["match"] = ok;
    ctx.report["diagnostics"] = j;
    ctx.report["verdict"] = ok ? "pass" : "BOUND_VIOLATED";
    return ok ? 0 : 3;
}

int cmd_pairing(CommandContext& ctx) {
    ManifoldModel zm = ctx.p.zset.intrinsic_manifold(ctx.p.manifold);
    const int d = zm.dim();
    json j;
    for (int k : {d, d + 1}) {
        int parity = -1;
        for (int attempt = 0; attempt < 10 && parity < 0; ++attempt) {
            std::mt19937_64 rng(ctx.cfg.rng_seed + 1000ull * static_cast<std::uint64_t>(attempt));
            try {
                std::vector<PairingClass> classes;
                for (int i = 0; i < k; ++i) {
                    ZMorseFunction f = ZMorseFunction::random(zm, rng);
                    auto crit = f.critical_points(ctx.p.tol);
                    const ZCriticalPoint* tgt = nullptr;
                    for (const auto& cp : crit)
                        if (cp.index == 1 && cp.repelling_axes.front() == i % d) tgt = &cp;
                    if (!tgt) throw NonTransverseError("no matching index-1 point");
                    classes.push_back({f, tgt->u});
                }
                ZMorseFunction f_star = ZMorseFunction::random(zm, rng);
                auto sc = f_star.critical_points(ctx.p.tol);
                PairingResult pr =
                    theta0_pairing(ctx.p, classes, f_star, f_star.point_of_index(sc, d).u,
                                   f_star.point_of_index(sc, 0).u);
                parity = pr.parity;
            } catch (const NonTransverseError&) {
                continue;
            }
        }
        j["k" + std::to_string(k) + "_parity"] = parity;
    }
    bool ok = j["k" + std::to_string(d) + "_parity"] == 1 &&
              j["k" + std::to_string(d + 1) + "_parity"] == 0;
    ctx.report["diagnostics"] = j;
    ctx.report["verdict"] = ok ? "pass" : "BOUND_VIOLATED";
    return ok ? 0 : 3;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& err) {
    auto t_start = std::chrono::steady_clock::now();
    try {
        ProblemDef p = parse_problem_file(cfg.problem_file);
        for (const auto& kv : cfg.overrides) {
            if (kv.first == "F") {
                p = ProblemDef(p.manifold, p.zset, ScalarField::parse(kv.second), p.h, p.tol,
                               p.seed_grid);
            } else if (kv.first == "h") {
                p = ProblemDef(p.manifold, p.zset, p.F, ScalarField::parse(kv.second), p.tol,
                               p.seed_grid);
            } else if (kv.first == "seed_grid") {
                std::vector<int> seeds;
                std::stringstream ss(kv.second);
                std::string tok;
                while (std::getline(ss, tok, ',')) seeds.push_back(std::stoi(tok));
                p = ProblemDef(p.manifold, p.zset, p.F, p.h, p.tol, seeds);
            } else if (kv.first == "start" || kv.first == "r" || kv.first == "tube_radius" ||
                       kv.first == "z_seeds") {
                // command-level knobs, consumed by the command handlers
            } else {
                Tolerances t = p.tol;
                t.set(kv.first, std::stod(kv.second));
                p = ProblemDef(p.manifold, p.zset, p.F, p.h, t, p.seed_grid);
            }
        }

        std::filesystem::create_directories(cfg.output_dir);
        CommandContext ctx{cfg, p, std::filesystem::path(cfg.output_dir), json::object(), err};

        ctx.report["problem"] = {{"file", cfg.problem_file},
                                 {"F", p.F.source()},
                                 {"h", p.h.source()},
                                 {"torus_dims", p.manifold.torus_dims()},
                                 {"euclidean_dims", p.manifold.euclidean_dims()},
                                 {"z_pinned", p.zset.pinned_indices()}};
        ctx.report["command"] = cfg.command;

        json prov;
        json tolj;
        for (const auto& kv : p.tol.items()) tolj[kv.first] = kv.second;
        prov["tolerances"] = tolj;
        prov["seed_grid"] = p.seed_grid;
        prov["rng_seed"] = cfg.rng_seed;
        json ovr = json::array();
        for (const auto& kv : cfg.overrides) ovr.push_back({{"key", kv.first}, {"value", kv.second}});
        prov["overrides"] = ovr;
        ctx.report["provenance"] = prov;

        int code;
        if (cfg.command == "verify") code = cmd_verify(ctx);
        else if (cfg.command == "spectrum") code = cmd_spectrum(ctx);
        else if (cfg.command == "flow") code = cmd_flow(ctx);
        else if (cfg.command == "moduli") code = cmd_moduli(ctx);
        else if (cfg.command == "chain") code = cmd_chain(ctx);
        else if (cfg.command == "homology") code = cmd_homology(ctx);
        else if (cfg.command == "pairing") code = cmd_pairing(ctx);
        else throw Error("unknown command '" + cfg.command + "'");

        std::ofstream out(std::filesystem::path(cfg.output_dir) / "report.json");
        if (!out) throw Error("cannot write report.json");
        out << ctx.report.dump(2) << '\n';

        // Timing goes to the error stream, not the report, so identical runs
        // produce byte-identical report files.
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
        err << "[morse-cuplength] " << cfg.command << " finished in " << ms << " ms, exit " << code
            << "\n";
        return code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace morse
