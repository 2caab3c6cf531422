#include "morse/fields.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "morse/critical.hpp"
#include "morse/newton.hpp"

namespace morse {

FdCheckResult fd_check(const ScalarField& f, const ManifoldModel& m, int samples,
                       std::uint64_t seed, const Tolerances& tol) {
    if (samples < 1) throw Error("fd_check requires at least one sample");
    const int n = m.dim();
    const double h = tol.fd_step;
    FieldWorkspace ws(f, n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    FdCheckResult out;
    std::vector<double> grad(static_cast<std::size_t>(n)), hess(static_cast<std::size_t>(n * n));
    std::vector<double> x(static_cast<std::size_t>(n)), xp(x), xm(x);

    auto rel = [](double err, double ref) { return err / std::max(1.0, std::abs(ref)); };

    for (int s = 0; s < samples; ++s) {
        for (int i = 0; i < n; ++i)
            x[static_cast<std::size_t>(i)] = m.is_toroidal(i)
                                                 ? uni(rng) * m.period(i)
                                                 : (2 * uni(rng) - 1) * 3.0;
        ws.hessian(x.data(), grad.data(), hess.data());
        for (int i = 0; i < n; ++i) {
            xp = x; xm = x;
            xp[static_cast<std::size_t>(i)] += h;
            xm[static_cast<std::size_t>(i)] -= h;
            double fp = ws.value(xp.data());
            double fm = ws.value(xm.data());
            double fd = (fp - fm) / (2 * h);
            out.max_grad_rel_err =
                std::max(out.max_grad_rel_err, rel(std::abs(fd - grad[static_cast<std::size_t>(i)]), fd));

            double f0 = ws.value(x.data());
            double fdd = (fp - 2 * f0 + fm) / (h * h);
            out.max_hess_rel_err = std::max(
                out.max_hess_rel_err,
                rel(std::abs(fdd - hess[static_cast<std::size_t>(i * n + i)]), fdd));
            for (int j = i + 1; j < n; ++j) {
                auto shifted = [&](double di, double dj) {
                    std::vector<double> y(x);
                    y[static_cast<std::size_t>(i)] += di;
                    y[static_cast<std::size_t>(j)] += dj;
                    return ws.value(y.data());
                };
                double fij = (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) /
                             (4 * h * h);
                out.max_hess_rel_err = std::max(
                    out.max_hess_rel_err,
                    rel(std::abs(fij - hess[static_cast<std::size_t>(i * n + j)]), fij));
            }
        }
    }
    return out;
}

namespace {

/// Local refinement of one extremum: LM toward the nearest critical point,
/// accepted only if it does not lose value.
void refine_extremum(FieldWorkspace& ws, const ManifoldModel& m, const Tolerances& tol,
                     bool maximize, std::vector<double>& x, double& v, bool& certified) {
    RootResult r = find_gradient_root(ws, x, tol.newton_grad_tol, tol.newton_max_iter);
    if (!r.converged) {
        certified = false;
        return;
    }
    for (int i = 0; i < m.dim(); ++i)
        if (!m.is_toroidal(i) &&
            std::abs(r.x[static_cast<std::size_t>(i)]) > tol.euclidean_box) {
            certified = false;  // extremum ran off the sampling box
            return;
        }
    double rv = ws.value(r.x.data());
    if ((maximize && rv >= v) || (!maximize && rv <= v)) {
        x = r.x;
        v = rv;
    }
}

}  // namespace

OscillationResult oscillation(const ScalarField& f, const ManifoldModel& m,
                              const Tolerances& tol) {
    const int n = m.dim();
    FieldWorkspace ws(f, n);
    const int g = std::max(tol.osc_grid, 4);

    OscillationResult out;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<double> best_hi, best_lo;
    double hi = -1e308, lo = 1e308;
    bool edge_hi = false, edge_lo = false;
    while (true) {
        bool on_edge = false;
        for (int i = 0; i < n; ++i) {
            double t = double(idx[static_cast<std::size_t>(i)]) / g;
            if (m.is_toroidal(i)) {
                x[static_cast<std::size_t>(i)] = t * m.period(i);
            } else {
                x[static_cast<std::size_t>(i)] = (2 * t - 1) * tol.euclidean_box;
                if (idx[static_cast<std::size_t>(i)] == 0 || idx[static_cast<std::size_t>(i)] == g - 1)
                    on_edge = true;
            }
        }
        double v = ws.value(x.data());
        if (v > hi) { hi = v; best_hi = x; edge_hi = on_edge; }
        if (v < lo) { lo = v; best_lo = x; edge_lo = on_edge; }
        int i = 0;
        for (; i < n; ++i) {
            if (++idx[static_cast<std::size_t>(i)] < g) break;
            idx[static_cast<std::size_t>(i)] = 0;
        }
        if (i == n) break;
    }

    out.certified = !(edge_hi || edge_lo);
    refine_extremum(ws, m, tol, true, best_hi, hi, out.certified);
    refine_extremum(ws, m, tol, false, best_lo, lo, out.certified);

    out.sup = hi;
    out.inf = lo;
    out.norm = hi - lo;
    out.arg_sup = m.normalize(best_hi);
    out.arg_inf = m.normalize(best_lo);
    return out;
}

SpectralGapResult spectral_gap(const ProblemDef& p) {
    CriticalSet cs = find_critical_points(p.F, p);
    SpectralGapResult out;
    out.failed_seeds = cs.failed_seeds;

    double z_tol = std::max(p.tol.cluster_radius, 10 * p.tol.asymptotic_tol);
    bool any = false;
    double gap = 1e308;
    for (const auto& comp : cs.components) {
        if (comp.distance_to_Z < z_tol) continue;  // the Z component itself
        any = true;
        gap = std::min(gap, std::abs(comp.value));
        ++out.critical_components;
        if (comp.degenerate && comp.reps.size() == 1) out.degenerate_warning = true;
    }
    if (!any) {
        out.infinite = true;
    } else {
        out.value = gap;
    }
    return out;
}

MorseBottReport morse_bott_verify(const ProblemDef& p, int samples_per_axis) {
    const auto& m = p.manifold;
    const int n = m.dim();
    MorseBottReport rep;
    rep.pass = true;

    std::vector<int> pin = p.zset.pinned_indices();
    std::vector<int> free = p.zset.free_indices(m);
    const int nn = static_cast<int>(pin.size());

    ManifoldModel zm = p.zset.intrinsic_manifold(m);
    int d = zm.dim();
    FieldWorkspace ws(p.F, n);
    std::vector<double> grad(static_cast<std::size_t>(n)), hess(static_cast<std::size_t>(n * n));

    std::vector<int> idx(static_cast<std::size_t>(std::max(d, 1)), 0);
    bool first = true;
    while (true) {
        std::vector<double> zc(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            zc[static_cast<std::size_t>(i)] =
                (idx[static_cast<std::size_t>(i)] + 0.37) / samples_per_axis * zm.period(i);
        Point z = p.zset.embed(m, zc);
        ws.hessian(z.c.data(), grad.data(), hess.data());

        Eigen::MatrixXd Hnn(nn, nn);
        for (int a = 0; a < nn; ++a)
            for (int b = 0; b < nn; ++b)
                Hnn(a, b) = hess[static_cast<std::size_t>(pin[static_cast<std::size_t>(a)] * n +
                                                          pin[static_cast<std::size_t>(b)])];
        double tangential = 0.0;
        for (int a : free)
            for (int b = 0; b < n; ++b)
                tangential = std::max(tangential, std::abs(hess[static_cast<std::size_t>(a * n + b)]));

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hnn);
        double min_abs = 1e308;
        for (int a = 0; a < nn; ++a) min_abs = std::min(min_abs, std::abs(es.eigenvalues()[a]));
        if (nn == 0) min_abs = 0.0;

        if (first) {
            rep.transverse_eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + nn);
            rep.min_abs_transverse = min_abs;
            first = false;
        }
        rep.min_abs_transverse = std::min(rep.min_abs_transverse, min_abs);
        rep.max_tangential = std::max(rep.max_tangential, tangential);

        if (min_abs < p.tol.degenerate_eig || tangential > p.tol.degenerate_eig) {
            rep.pass = false;
            rep.worst_sample = z;
            rep.message = min_abs < p.tol.degenerate_eig
                              ? "transverse Hessian eigenvalue " + std::to_string(min_abs) +
                                    " inside the degeneracy threshold"
                              : "tangential Hessian block does not vanish (max entry " +
                                    std::to_string(tangential) + ")";
            return rep;
        }

        if (d == 0) break;
        int i = 0;
        for (; i < d; ++i) {
            if (++idx[static_cast<std::size_t>(i)] < samples_per_axis) break;
            idx[static_cast<std::size_t>(i)] = 0;
        }
        if (i == d) break;
    }
    return rep;
}

}  // namespace morse
