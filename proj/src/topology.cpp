#include "morse/topology.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "morse/flow.hpp"
#include "morse/zero_count.hpp"

namespace morse {

// ---------------------------------------------------------------------------
// GF(2) linear algebra
// ---------------------------------------------------------------------------

GF2Matrix GF2Matrix::multiply(const GF2Matrix& other) const {
    if (c_ != other.r_) throw Error("GF2 shape mismatch");
    GF2Matrix out(r_, other.c_);
    for (int i = 0; i < r_; ++i)
        for (int k = 0; k < c_; ++k) {
            if (!at(i, k)) continue;
            for (int j = 0; j < other.c_; ++j)
                out.set(i, j, out.at(i, j) ^ other.at(k, j));
        }
    return out;
}

bool GF2Matrix::is_zero() const {
    for (std::uint8_t v : a_)
        if (v) return false;
    return true;
}

int GF2Matrix::rank() const {
    std::vector<std::uint8_t> m = a_;
    auto at = [&](int i, int j) -> std::uint8_t& { return m[static_cast<std::size_t>(i * c_ + j)]; };
    int rank = 0;
    for (int col = 0; col < c_ && rank < r_; ++col) {
        int pivot = -1;
        for (int i = rank; i < r_; ++i)
            if (at(i, col)) {
                pivot = i;
                break;
            }
        if (pivot < 0) continue;
        for (int j = 0; j < c_; ++j) std::swap(at(pivot, j), at(rank, j));
        for (int i = 0; i < r_; ++i)
            if (i != rank && at(i, col))
                for (int j = 0; j < c_; ++j) at(i, j) ^= at(rank, j);
        ++rank;
    }
    return rank;
}

// ---------------------------------------------------------------------------
// Morse complex on Z
// ---------------------------------------------------------------------------

int MorseComplexZ2::count_of_index(int k) const {
    int n = 0;
    for (const auto& g : generators)
        if (g.index == k) ++n;
    return n;
}

void MorseComplexZ2::dump(std::ostream& os) const {
    os << "# generators: index coordinates value\n";
    for (const auto& g : generators) {
        os << g.index;
        for (double u : g.u) os << ' ' << u;
        os << ' ' << g.value << '\n';
    }
    os << "# differential (row-major, row i = boundary of generator i)\n";
    for (int i = 0; i < differential.rows(); ++i) {
        for (int j = 0; j < differential.cols(); ++j) os << int(differential.at(i, j));
        os << '\n';
    }
}

namespace {

/// Negated copy of a Z Morse function (for running orbit counts upside down).
ScalarField negate_field(const ScalarField& f) {
    auto n = std::make_shared<ast::Node>();
    n->kind = ast::Kind::Neg;
    n->a = f.root();
    return ScalarField::from_ast(n, "-(" + f.source() + ")");
}

struct OrbitContext {
    const ManifoldModel& zm;
    const ScalarField& field;  // the flow field actually integrated (f or -f)
    const Tolerances& tol;
    std::vector<Point> crit_locations;  // of the flow field, intrinsic
};

/// Parity of connecting orbits from `src` (effective index 1) to targets one
/// index below: launch the two rays off the unstable eigen-axis.
void ray_orbit_parities(const OrbitContext& ctx, const ZCriticalPoint& src,
                        std::vector<int>& parity_by_target) {
    if (src.repelling_axes.size() != 1) throw Error("ray probe needs an index-1 source");
    const int axis = src.repelling_axes.front();
    const double eps = 1e-3;
    for (int dir : {-1, +1}) {
        std::vector<double> start = src.u;
        start[static_cast<std::size_t>(axis)] += dir * eps;
        ProbeOutcome probe = probe_gradient_flow(ctx.zm, ctx.field, start, ctx.tol);
        if (!probe.converged)
            throw NonTransverseError("orbit probe did not converge");
        int hit = match_point(ctx.zm, probe.limit, ctx.crit_locations, ctx.tol.basin_match);
        if (hit < 0) throw NonTransverseError("orbit probe limit matches no critical point");
        parity_by_target[static_cast<std::size_t>(hit)] ^= 1;
    }
}

/// Parity of connecting orbits from `src` (effective index 2) to each
/// effective index-1 target: tail-sign flips around the unstable circle,
/// refined by bisection and verified by a near approach to the target.
void circle_orbit_parities(const OrbitContext& ctx, const ZCriticalPoint& src,
                           const std::vector<ZCriticalPoint>& crit,
                           std::vector<int>& parity_by_target) {
    if (src.repelling_axes.size() != 2) throw Error("circle probe needs an index-2 source");
    const int ax0 = src.repelling_axes[0];
    const int ax1 = src.repelling_axes[1];
    const double eps = 1e-3;
    const int N = 64;
    const double theta_off = 0.5 * (2 * M_PI / N) * 0.61803;  // keep axes off the grid

    auto launch = [&](double theta) {
        std::vector<double> start = src.u;
        start[static_cast<std::size_t>(ax0)] += eps * std::cos(theta);
        start[static_cast<std::size_t>(ax1)] += eps * std::sin(theta);
        return start;
    };

    std::vector<ProbeOutcome> probes(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i)
        probes[static_cast<std::size_t>(i)] =
            probe_gradient_flow(ctx.zm, ctx.field, launch(theta_off + 2 * M_PI * i / N), ctx.tol);

    for (std::size_t ti = 0; ti < crit.size(); ++ti) {
        const auto& tgt = crit[ti];
        if (tgt.repelling_axes.size() != 1) continue;
        const int waxis = tgt.repelling_axes.front();
        int flips = 0;
        for (int i = 0; i < N; ++i) {
            int sa = probes[static_cast<std::size_t>(i)].tail_signs[static_cast<std::size_t>(waxis)];
            int sb = probes[static_cast<std::size_t>((i + 1) % N)].tail_signs[static_cast<std::size_t>(waxis)];
            if (sa == 0 || sb == 0)
                throw NonTransverseError("indeterminate tail sign on the unstable circle");
            if (sa == sb) continue;

            // Bisect the flip and confirm the orbit passes by this target.
            double lo = theta_off + 2 * M_PI * i / N;
            double hi = lo + 2 * M_PI / N;
            Point watch(tgt.u);
            for (int it = 0; it < 60; ++it) {
                double mid = 0.5 * (lo + hi);
                ProbeOutcome pm = probe_gradient_flow(ctx.zm, ctx.field, launch(mid), ctx.tol);
                int sm = pm.tail_signs[static_cast<std::size_t>(waxis)];
                if (sm == 0) break;  // essentially on the wall already
                if (sm == sa) lo = mid;
                else hi = mid;
            }
            ProbeOutcome pf =
                probe_gradient_flow(ctx.zm, ctx.field, launch(0.5 * (lo + hi)), ctx.tol, false, &watch);
            if (pf.min_dist_to_watch < ctx.tol.approach_tol) ++flips;
        }
        parity_by_target[ti] ^= (flips & 1);
    }
}

std::vector<ZCriticalPoint> critical_points_of_field(const ZMorseFunction& zf, bool negated,
                                                     const Tolerances& tol) {
    std::vector<ZCriticalPoint> pts = zf.critical_points(tol);
    if (!negated) return pts;
    const int d = zf.zmodel().dim();
    for (auto& cp : pts) {
        cp.value = -cp.value;
        cp.index = d - cp.index;
        std::vector<int> rep;
        for (int i = 0; i < d; ++i) {
            cp.hess_diag[static_cast<std::size_t>(i)] = -cp.hess_diag[static_cast<std::size_t>(i)];
            if (cp.hess_diag[static_cast<std::size_t>(i)] < 0) rep.push_back(i);
        }
        cp.repelling_axes = std::move(rep);
    }
    return pts;
}

}  // namespace

MorseComplexZ2 build_complex(const ZMorseFunction& f, const ProblemDef& p) {
    const ManifoldModel& zm = f.zmodel();
    const int d = zm.dim();
    const Tolerances& tol = p.tol;

    std::vector<ZCriticalPoint> crit = f.critical_points(tol);
    std::sort(crit.begin(), crit.end(), [](const ZCriticalPoint& a, const ZCriticalPoint& b) {
        if (a.index != b.index) return a.index < b.index;
        return a.u < b.u;
    });

    MorseComplexZ2 cx;
    cx.z_dim = d;
    for (const auto& cp : crit) cx.generators.push_back({cp.u, cp.index, cp.value});
    const int ngen = static_cast<int>(crit.size());
    cx.differential = GF2Matrix(ngen, ngen);

    ScalarField neg = negate_field(f.field());
    std::vector<Point> locs;
    for (const auto& cp : crit) locs.emplace_back(cp.u);

    // The -f critical data aligned with the generator order (same locations,
    // complementary indices and repelling axes).
    std::vector<ZCriticalPoint> crit_neg(crit.size());
    for (const auto& cp : critical_points_of_field(f, true, tol)) {
        int m = match_point(zm, Point(cp.u), locs, tol.basin_match);
        if (m < 0) throw Error("critical sets of f and -f do not align");
        crit_neg[static_cast<std::size_t>(m)] = cp;
    }

    OrbitContext fwd{zm, f.field(), tol, locs};
    OrbitContext bwd{zm, neg, tol, locs};

    auto orbit_parities = [&](const OrbitContext& ctx, const ZCriticalPoint& src,
                              const std::vector<ZCriticalPoint>& field_crit, int sphere_dim) {
        std::vector<int> par(static_cast<std::size_t>(ngen), 0);
        if (sphere_dim == 0)
            ray_orbit_parities(ctx, src, par);
        else
            circle_orbit_parities(ctx, src, field_crit, par);
        return par;
    };

    // Orbits between adjacent indices are counted on whichever side (f around
    // the source, or -f around the target) needs the smaller probe sphere.
    for (int lambda = 1; lambda <= d; ++lambda) {
        const int direct_dim = lambda - 1;
        const int dual_dim = d - lambda;
        if (std::min(direct_dim, dual_dim) > 1)
            throw Error("orbit counting beyond probe dimension 1 is not supported (dim Z > 4)");

        if (direct_dim <= dual_dim) {
            for (int si = 0; si < ngen; ++si) {
                if (crit[static_cast<std::size_t>(si)].index != lambda) continue;
                std::vector<int> par =
                    orbit_parities(fwd, crit[static_cast<std::size_t>(si)], crit, direct_dim);
                for (int tj = 0; tj < ngen; ++tj)
                    if (crit[static_cast<std::size_t>(tj)].index == lambda - 1 &&
                        par[static_cast<std::size_t>(tj)])
                        cx.differential.set(si, tj, 1);
            }
        } else {
            for (int tj = 0; tj < ngen; ++tj) {
                if (crit[static_cast<std::size_t>(tj)].index != lambda - 1) continue;
                std::vector<int> par =
                    orbit_parities(bwd, crit_neg[static_cast<std::size_t>(tj)], crit_neg, dual_dim);
                for (int si = 0; si < ngen; ++si)
                    if (crit[static_cast<std::size_t>(si)].index == lambda &&
                        par[static_cast<std::size_t>(si)])
                        cx.differential.set(si, tj, 1);
            }
        }
    }
    return cx;
}

std::vector<int> betti(const MorseComplexZ2& c) {
    if (!c.differential_squared_zero()) throw Error("differential does not square to zero");
    const int d = c.z_dim;
    const int ngen = static_cast<int>(c.generators.size());

    // Block rank of the differential restricted to index k -> k-1.
    auto block_rank = [&](int k) {
        std::vector<int> rows, cols;
        for (int i = 0; i < ngen; ++i) {
            if (c.generators[static_cast<std::size_t>(i)].index == k) rows.push_back(i);
            if (c.generators[static_cast<std::size_t>(i)].index == k - 1) cols.push_back(i);
        }
        GF2Matrix blk(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t b = 0; b < cols.size(); ++b)
                blk.set(static_cast<int>(a), static_cast<int>(b),
                        c.differential.at(rows[a], cols[b]));
        return blk.rank();
    };

    std::vector<int> out;
    for (int k = 0; k <= d; ++k) {
        int nk = c.count_of_index(k);
        int rk = block_rank(k);        // boundary out of degree k
        int rk1 = block_rank(k + 1);   // boundary into degree k
        out.push_back(nk - rk - rk1);
    }
    return out;
}

int cuplength(const SubmanifoldSpec& z, const ManifoldModel& m) {
    ManifoldModel zm = z.intrinsic_manifold(m);  // validates compactness
    return zm.dim();
}

namespace {

/// Wall conditions contributed by requiring a point to lie in the stable
/// (descent) or unstable (ascent) manifold of a critical point: one wrapped
/// deviation per repelling axis of the target under that flow direction.
struct WallSet {
    std::vector<int> axes;
    std::vector<double> walls;
    std::vector<double> periods;
};

WallSet walls_for(const ManifoldModel& zm, const ZCriticalPoint& target, bool ascent) {
    WallSet ws;
    for (int i = 0; i < zm.dim(); ++i) {
        double hd = target.hess_diag[static_cast<std::size_t>(i)];
        bool repelling = ascent ? hd > 0 : hd < 0;
        if (repelling) {
            ws.axes.push_back(i);
            ws.walls.push_back(target.u[static_cast<std::size_t>(i)]);
            ws.periods.push_back(zm.period(i));
        }
    }
    return ws;
}

const ZCriticalPoint& named_point(const std::vector<ZCriticalPoint>& pts,
                                  const std::vector<double>& u, const ManifoldModel& zm,
                                  double radius) {
    for (const auto& cp : pts)
        if (zm.distance(Point(cp.u), Point(u)) < radius) return cp;
    throw Error("named point is not a critical point of the given Morse function");
}

}  // namespace

PairingResult theta0_pairing(const ProblemDef& p, const std::vector<PairingClass>& a_classes,
                             const ZMorseFunction& f_star, const std::vector<double>& x_minus,
                             const std::vector<double>& x_plus, int grid) {
    const ManifoldModel zm = p.zset.intrinsic_manifold(p.manifold);
    const Tolerances& tol = p.tol;

    struct Slot {
        const ZMorseFunction* f;
        WallSet walls;
        std::vector<double> target;
        bool ascent;
    };
    std::vector<Slot> slots;
    std::vector<std::vector<ZCriticalPoint>> crit_cache;

    for (const auto& cls : a_classes) {
        crit_cache.push_back(cls.f.critical_points(tol));
        const auto& tgt = named_point(crit_cache.back(), cls.target_u, zm, tol.basin_match);
        slots.push_back({&cls.f, walls_for(zm, tgt, false), tgt.u, false});
    }
    std::vector<ZCriticalPoint> star_crit = f_star.critical_points(tol);
    const auto& sm = named_point(star_crit, x_minus, zm, tol.basin_match);
    const auto& sp = named_point(star_crit, x_plus, zm, tol.basin_match);
    slots.push_back({&f_star, walls_for(zm, sm, true), sm.u, true});
    slots.push_back({&f_star, walls_for(zm, sp, false), sp.u, false});

    int n_cond = 0;
    for (const auto& s : slots) n_cond += static_cast<int>(s.walls.axes.size());

    DevFn devs = [&](const std::vector<double>& u) {
        std::vector<double> out;
        for (const auto& s : slots)
            for (std::size_t w = 0; w < s.walls.axes.size(); ++w)
                out.push_back(zm.wrap_diff(s.walls.axes[w], u[static_cast<std::size_t>(s.walls.axes[w])],
                                           s.walls.walls[w]));
        return out;
    };

    ZeroCount zc = count_isolated_zeros(zm, devs, n_cond, grid, tol);

    // Verify each root by actual flow membership probes.
    for (const auto& root : zc.roots) {
        for (const auto& s : slots) {
            Point watch(s.target);
            ProbeOutcome probe = probe_gradient_flow(zm, s.f->field(), root, tol, s.ascent, &watch);
            bool member;
            if (s.walls.axes.empty()) {
                member = match_point(zm, probe.limit, {Point(s.target)}, tol.basin_match) == 0;
            } else {
                member = probe.min_dist_to_watch < tol.approach_tol;
            }
            if (!member)
                throw NonTransverseError("bisection root fails its flow membership probe");
        }
    }

    PairingResult out;
    out.parity = zc.parity;
    out.witnesses = zc.roots;
    return out;
}

int CohomologyProfile::euler_characteristic() const {
    int chi = 0;
    int sign = 1;
    for (int b : betti) {
        chi += sign * b;
        sign = -sign;
    }
    return chi;
}

CohomologyProfile catalog_profile(const SubmanifoldSpec& z, const ManifoldModel& m) {
    int d = cuplength(z, m);
    CohomologyProfile out;
    out.cuplength = d;
    out.source = "catalog closed form";
    // Betti numbers of T^d: binomial coefficients.
    std::vector<int> row{1};
    for (int k = 0; k < d; ++k) {
        std::vector<int> next(row.size() + 1, 0);
        for (std::size_t i = 0; i < row.size(); ++i) {
            next[i] += row[i];
            next[i + 1] += row[i];
        }
        row = std::move(next);
    }
    out.betti = row;
    return out;
}

CohomologyProfile numerical_profile(const ZMorseFunction& f, const ProblemDef& p) {
    MorseComplexZ2 cx = build_complex(f, p);
    CohomologyProfile out;
    out.betti = betti(cx);
    out.cuplength = cuplength(p.zset, p.manifold);
    out.source = "numerical complex";
    return out;
}

}  // namespace morse
