#include "morse/moduli.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "morse/fields.hpp"
#include "morse/newton.hpp"
#include "morse/parallel.hpp"
#include "morse/zero_count.hpp"

namespace morse {

ModuliBatch solve_moduli(const ProblemDef& p, const BumpFamily& b,
                         const std::vector<Point>& z_seeds) {
    ModuliBatch out;
    OscillationResult osc = oscillation(ScalarField::difference(p.h, p.F), p.manifold, p.tol);
    out.norm_hF = osc.norm;
    const double horizon = integration_horizon(p, b);

    std::vector<std::pair<bool, ModuliElement>> results(z_seeds.size());
    std::vector<std::string> errors(z_seeds.size());
    parallel_for(z_seeds.size(), [&](std::size_t i) {
        const Point& z0 = z_seeds[i];
        if (p.zset.distance_to(p.manifold, z0) > p.tol.asymptotic_tol) {
            errors[i] = "seed is not on Z";
            return;
        }
        ModuliElement e;
        e.r = b.r;
        e.shoot_param = z0;
        e.backward_limit = p.manifold.normalize(z0);
        try {
            e.trajectory = integrate(p, b, z0, -1.0, horizon);
        } catch (const Error& err) {
            errors[i] = err.what();
            return;
        }
        if (!e.trajectory.converged) {
            errors[i] = "no convergence within the horizon";
            return;
        }
        e.forward_limit = p.manifold.normalize(e.trajectory.back().x);
        double dz = p.zset.distance_to(p.manifold, e.forward_limit);
        if (dz > p.tol.asymptotic_tol) {
            errors[i] = "forward limit off Z by " + std::to_string(dz);
            return;
        }
        e.diagnostics = window_diagnostics(p, e.trajectory, out.norm_hF);
        if (!e.diagnostics.violations.empty()) {
            errors[i] = "window diagnostics violated (" +
                        std::to_string(e.diagnostics.violations.size()) + " samples)";
            return;
        }
        results[i] = {true, std::move(e)};
    });

    for (std::size_t i = 0; i < z_seeds.size(); ++i) {
        if (results[i].first)
            out.accepted.push_back(std::move(results[i].second));
        else
            out.rejected.push_back({z_seeds[i], errors[i]});
    }
    return out;
}

std::vector<Point> evaluate_points(const ProblemDef& p, const BumpFamily& b,
                                   const ModuliElement& e, int k) {
    std::vector<Point> out;
    for (int j = 1; j <= k; ++j)
        out.emplace_back(e.trajectory.interpolate(j * e.r, p, b));
    return out;
}

namespace {

struct WallCondition {
    int slot;       // 0 = shoot parameter, 1..k = evaluation points, k+1 = forward limit
    int z_axis;     // intrinsic axis of Z
    double wall;    // wall position on that axis
};

/// Everything derived from one shoot parameter: the trajectory plus the
/// intrinsic coordinates of each conditioned point.
struct ShotData {
    Trajectory traj;
    std::vector<std::vector<double>> slot_coords;  // indexed by slot
    bool valid = false;
    std::string error;
};

struct CountingSetup {
    const ProblemDef& p;
    const BumpFamily& b;
    ManifoldModel zm;
    std::vector<int> free_axes;
    double horizon;
    int k;
    std::vector<WallCondition> conditions;

    // verification data
    std::vector<ScalarField> ambient_ext;        // one per constraint
    std::vector<Point> ambient_targets;          // embedded x_i
    const StarConstraint* star;
    std::vector<double> star_minus, star_plus;
};

ShotData shoot(const CountingSetup& su, const std::vector<double>& z_u) {
    ShotData out;
    Point z0 = su.p.zset.embed(su.p.manifold, z_u);
    try {
        out.traj = integrate(su.p, su.b, z0, -1.0, su.horizon);
    } catch (const Error& e) {
        out.error = e.what();
        return out;
    }
    if (!out.traj.converged) {
        out.error = "no convergence within the horizon";
        return out;
    }
    out.slot_coords.resize(static_cast<std::size_t>(su.k + 2));
    out.slot_coords[0] = z_u;
    for (int j = 1; j <= su.k; ++j) {
        std::vector<double> xj = out.traj.interpolate(j * su.b.r, su.p, su.b);
        std::vector<double> u;
        for (int ax : su.free_axes) u.push_back(xj[static_cast<std::size_t>(ax)]);
        out.slot_coords[static_cast<std::size_t>(j)] = std::move(u);
    }
    Point fwd = su.p.manifold.normalize(out.traj.back().x);
    out.slot_coords[static_cast<std::size_t>(su.k + 1)] = su.p.zset.project(su.p.manifold, fwd);
    out.valid = true;
    return out;
}

std::vector<double> devs_of(const CountingSetup& su, const ShotData& shot) {
    std::vector<double> out;
    for (const auto& c : su.conditions)
        out.push_back(su.zm.wrap_diff(c.z_axis,
                                      shot.slot_coords[static_cast<std::size_t>(c.slot)]
                                                      [static_cast<std::size_t>(c.z_axis)],
                                      c.wall));
    return out;
}

void verify_witness(const CountingSetup& su, const std::vector<double>& z_u,
                    const ShotData& shot) {
    const Tolerances& tol = su.p.tol;
    // Constraint memberships: the ambient extension flow from each evaluation
    // point must pass by its target.
    for (std::size_t i = 0; i < su.ambient_ext.size(); ++i) {
        std::vector<double> q = shot.traj.interpolate((static_cast<int>(i) + 1) * su.b.r, su.p, su.b);
        ProbeOutcome probe = probe_gradient_flow(su.p.manifold, su.ambient_ext[i], q, tol, false,
                                                 &su.ambient_targets[i]);
        if (probe.min_dist_to_watch > tol.approach_tol)
            throw NonTransverseError("witness evaluation point misses its constraint target");
    }
    // Star conditions via intrinsic flow convergence.
    ProbeOutcome back = probe_gradient_flow(su.zm, su.star->f.field(), z_u, tol, true);
    if (match_point(su.zm, back.limit, {Point(su.star_minus)}, tol.basin_match) != 0)
        throw NonTransverseError("shoot parameter is outside W^u(x_minus)");
    ProbeOutcome fwdp = probe_gradient_flow(
        su.zm, su.star->f.field(), shot.slot_coords[static_cast<std::size_t>(su.k + 1)], tol, false);
    if (match_point(su.zm, fwdp.limit, {Point(su.star_plus)}, tol.basin_match) != 0)
        throw NonTransverseError("forward limit is outside W^s(x_plus)");
}

}  // namespace

ConstrainedCount constrained_count(const ProblemDef& p, const BumpFamily& b,
                                   const std::vector<MorseConstraint>& constraints,
                                   const StarConstraint& star, int grid) {
    const Tolerances& tol = p.tol;
    CountingSetup su{p, b, p.zset.intrinsic_manifold(p.manifold), p.zset.free_indices(p.manifold),
                     integration_horizon(p, b), static_cast<int>(constraints.size()),
                     {}, {}, {}, &star, {}, {}};

    // Wall conditions from the constraints (descent flow, ambient targets).
    int slot = 1;
    for (const auto& c : constraints) {
        auto crit = c.f.critical_points(tol);
        const ZCriticalPoint* tgt = nullptr;
        for (const auto& cp : crit)
            if (su.zm.distance(Point(cp.u), Point(c.target_u)) < tol.basin_match) tgt = &cp;
        if (!tgt) throw Error("constraint target is not a critical point of its Morse function");
        for (int ax : tgt->repelling_axes)
            su.conditions.push_back({slot, ax, tgt->u[static_cast<std::size_t>(ax)]});
        su.ambient_ext.push_back(c.f.ambient_extension(p.manifold, p.zset));
        su.ambient_targets.push_back(p.zset.embed(p.manifold, tgt->u));
        ++slot;
    }
    // Star wall conditions (backward end: ascent flow; forward end: descent).
    auto star_crit = star.f.critical_points(tol);
    const ZCriticalPoint* sm = nullptr;
    const ZCriticalPoint* sp = nullptr;
    for (const auto& cp : star_crit) {
        if (su.zm.distance(Point(cp.u), Point(star.x_minus_u)) < tol.basin_match) sm = &cp;
        if (su.zm.distance(Point(cp.u), Point(star.x_plus_u)) < tol.basin_match) sp = &cp;
    }
    if (!sm || !sp) throw Error("star endpoints are not critical points of f_star");
    su.star_minus = sm->u;
    su.star_plus = sp->u;
    for (int ax = 0; ax < su.zm.dim(); ++ax) {
        if (sm->hess_diag[static_cast<std::size_t>(ax)] > 0)  // ascent-repelling
            su.conditions.push_back({0, ax, sm->u[static_cast<std::size_t>(ax)]});
        if (sp->hess_diag[static_cast<std::size_t>(ax)] < 0)  // descent-repelling
            su.conditions.push_back({su.k + 1, ax, sp->u[static_cast<std::size_t>(ax)]});
    }

    std::map<std::vector<double>, ShotData> cache;
    DevFn devs = [&](const std::vector<double>& u) {
        auto it = cache.find(u);
        if (it == cache.end()) {
            it = cache.emplace(u, shoot(su, u)).first;
            if (cache.size() > 20000) cache.erase(cache.begin());
        }
        if (!it->second.valid) throw Error("shoot failed: " + it->second.error);
        return devs_of(su, it->second);
    };

    ZeroCount zc =
        count_isolated_zeros(su.zm, devs, static_cast<int>(su.conditions.size()), grid, tol);

    ConstrainedCount out;
    out.parity = zc.parity;
    for (const auto& root : zc.roots) {
        ShotData shot_data = shoot(su, root);
        if (!shot_data.valid) throw Error("witness re-shoot failed: " + shot_data.error);
        verify_witness(su, root, shot_data);
        WindowDiagnostics wd = window_diagnostics(p, shot_data.traj);
        if (!wd.violations.empty())
            throw Error("witness trajectory violates the window diagnostics");
        out.witnesses.push_back({root, std::move(shot_data.traj)});
    }
    return out;
}

namespace {

Point polish_newton(const ProblemDef& p, const std::vector<double>& x0, double& grad_norm) {
    FieldWorkspace ws(p.h, p.manifold.dim());
    RootResult r = find_gradient_root(ws, x0, p.tol.newton_grad_tol, p.tol.newton_max_iter);
    if (!r.converged)
        throw Error("chain point polish failed: |grad h| = " + std::to_string(r.grad_norm));
    grad_norm = r.grad_norm;
    return p.manifold.normalize(r.x);
}

Point polish_flow(const ProblemDef& p, const std::vector<double>& x0, bool ascend,
                  double& grad_norm) {
    Trajectory t = integrate_gradient(p.manifold, p.h, x0, p.tol.probe_time, p.tol, ascend);
    if (!t.converged) throw Error("chain point flow polish did not converge");
    return polish_newton(p, t.back().x, grad_norm);
}

double h_grad_norm_at(FieldWorkspace& wh, const std::vector<double>& x) {
    std::vector<double> g(x.size());
    wh.gradient(x.data(), g.data());
    double s = 0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
}

/// The sample minimizing |grad h| over the window [s_lo, s_hi].
std::vector<double> window_argmin(FieldWorkspace& wh, const Trajectory& traj, double s_lo,
                                  double s_hi, double& s_at) {
    double best = 1e308;
    std::vector<double> arg;
    for (const auto& smp : traj.samples) {
        if (smp.s < s_lo || smp.s > s_hi) continue;
        double g = h_grad_norm_at(wh, smp.x);
        if (g < best) {
            best = g;
            arg = smp.x;
            s_at = smp.s;
        }
    }
    if (arg.empty()) throw Error("extraction window contains no samples");
    return arg;
}

}  // namespace

BreakingChain breaking_analysis(const ProblemDef& p, int k, const std::vector<double>& r_sequence,
                                std::uint64_t rng_seed) {
    if (r_sequence.empty()) throw Error("breaking analysis needs at least one r");
    ManifoldModel zm = p.zset.intrinsic_manifold(p.manifold);
    const int d = zm.dim();

    BreakingChain chain;
    chain.r_sequence = r_sequence;

    for (int attempt = 0; attempt < 10; ++attempt) {
        std::mt19937_64 rng(rng_seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(attempt));
        // Constraint functions with seeded phases; target of f_i is an
        // index-1 point whose repelling axis cycles through the Z axes.
        std::vector<MorseConstraint> constraints;
        bool ok_targets = true;
        for (int i = 0; i < k; ++i) {
            ZMorseFunction f = ZMorseFunction::random(zm, rng);
            auto crit = f.critical_points(p.tol);
            const ZCriticalPoint* tgt = nullptr;
            for (const auto& cp : crit)
                if (cp.index == 1 && cp.repelling_axes.front() == i % d) tgt = &cp;
            if (!tgt) {
                ok_targets = false;
                break;
            }
            constraints.push_back({f, tgt->u});
        }
        if (!ok_targets) continue;
        ZMorseFunction f_star = ZMorseFunction::random(zm, rng);
        auto star_crit = f_star.critical_points(p.tol);
        StarConstraint star{f_star, f_star.point_of_index(star_crit, d).u,
                            f_star.point_of_index(star_crit, 0).u};

        try {
            std::vector<double> prev_witness;
            ModuliWitness best;
            FieldWorkspace wh(p.h, p.manifold.dim());

            for (double r : r_sequence) {
                BumpFamily b(k, r);
                ConstrainedCount cc = constrained_count(p, b, constraints, star);
                if (cc.witnesses.empty())
                    throw Error("no witness at r = " + std::to_string(r));
                // Follow the witness continuously in r.
                std::size_t pick = 0;
                if (!prev_witness.empty()) {
                    double bd = 1e308;
                    for (std::size_t i = 0; i < cc.witnesses.size(); ++i) {
                        double dd = zm.distance(Point(cc.witnesses[i].z_u), Point(prev_witness));
                        if (dd < bd) {
                            bd = dd;
                            pick = i;
                        }
                    }
                }
                prev_witness = cc.witnesses[pick].z_u;
                best = std::move(cc.witnesses[pick]);

                // Per-r audit: extract the chain h-values at this r.
                std::vector<double> values;
                const double w = r / 4;
                for (int j = 0; j <= k + 1; ++j) {
                    double s_at;
                    auto raw = window_argmin(wh, best.trajectory, j * r - w, j * r + w, s_at);
                    double gn;
                    Point pol;
                    if (j == 0 || j == k + 1)
                        pol = polish_newton(p, raw, gn);
                    else
                        pol = polish_newton(p, raw, gn);  // value trace only
                    values.push_back(wh.value(pol.c.data()));
                }
                chain.per_r_values.push_back(values);
            }

            // Full extraction at the largest r.
            const double r = r_sequence.back();
            const double w = r / 4;
            const Trajectory& traj = best.trajectory;
            chain.limit_points.clear();

            auto add_point = [&](double s_lo, double s_hi, int polish_mode) {
                double s_at;
                auto raw = window_argmin(wh, traj, s_lo, s_hi, s_at);
                double gn = 0;
                Point pol;
                if (polish_mode == 0) pol = polish_newton(p, raw, gn);
                else pol = polish_flow(p, raw, polish_mode < 0, gn);
                ChainPoint cp;
                cp.location = pol;
                cp.h_value = wh.value(pol.c.data());
                cp.grad_norm = gn;
                cp.window_s = s_at;
                cp.raw_location = p.manifold.normalize(raw);
                chain.limit_points.push_back(std::move(cp));
            };

            add_point(-w, w, 0);  // y0+
            for (int j = 1; j <= k; ++j) {
                add_point(j * r - w, j * r, -1);  // y_j-: ascend h to the earlier rest point
                add_point(j * r, j * r + w, +1);  // y_j+: descend h to the later rest point
            }
            add_point((k + 1) * r - w, (k + 1) * r + w, 0);  // y_{k+1}-

            chain.strict.clear();
            for (std::size_t i = 0; i + 1 < chain.limit_points.size(); ++i)
                chain.strict.push_back(chain.limit_points[i].h_value -
                                           chain.limit_points[i + 1].h_value >
                                       1e-6);
            return chain;
        } catch (const NonTransverseError&) {
            chain.per_r_values.clear();
            continue;  // re-randomize phases
        }
    }
    throw Error("breaking analysis failed to find a transversal configuration");
}

}  // namespace morse
