#include "morse/critical.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "morse/fields.hpp"
#include "morse/newton.hpp"
#include "morse/parallel.hpp"
#include "morse/topology.hpp"

namespace morse {

std::vector<CriticalPoint> CriticalSet::points() const {
    std::vector<CriticalPoint> out;
    for (std::size_t ci = 0; ci < components.size(); ++ci) {
        const auto& comp = components[ci];
        if (comp.degenerate) continue;
        CriticalPoint cp;
        cp.location = comp.reps.front();
        cp.value = comp.value;
        cp.hessian_spectrum = comp.hessian_spectrum;
        cp.basin_id = static_cast<int>(ci);
        int neg = 0;
        for (double ev : comp.hessian_spectrum)
            if (ev < 0) ++neg;
        cp.morse_index = neg;
        out.push_back(std::move(cp));
    }
    return out;
}

bool CriticalSet::has_degenerate() const {
    for (const auto& c : components)
        if (c.degenerate) return true;
    return false;
}

namespace {

bool lex_less(const Point& a, const Point& b) {
    for (std::size_t i = 0; i < a.c.size(); ++i) {
        if (a.c[i] < b.c[i]) return true;
        if (a.c[i] > b.c[i]) return false;
    }
    return false;
}

std::vector<double> spectrum_at(FieldWorkspace& ws, const Point& x) {
    int n = ws.dim();
    std::vector<double> g(static_cast<std::size_t>(n)), h(static_cast<std::size_t>(n * n));
    ws.hessian(x.c.data(), g.data(), h.data());
    Eigen::Map<Eigen::MatrixXd> H(h.data(), n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
    return ev;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i) { return parent[static_cast<std::size_t>(i)] == i ? i : parent[static_cast<std::size_t>(i)] = find(parent[static_cast<std::size_t>(i)]); }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

CriticalSet find_critical_points(const ScalarField& f, const ProblemDef& p) {
    return find_critical_points(f, p, p.ambient_seeds());
}

CriticalSet find_critical_points(const ScalarField& f, const ProblemDef& p,
                                 const std::vector<Point>& seeds, double connect_threshold) {
    const auto& m = p.manifold;
    const int n = m.dim();
    if (connect_threshold <= 0) connect_threshold = 2.0 * p.grid_spacing();

    std::vector<RootResult> roots(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        FieldWorkspace ws(f, n);
        roots[i] = find_gradient_root(ws, seeds[i].c, p.tol.newton_grad_tol, p.tol.newton_max_iter);
    });

    CriticalSet out;
    std::vector<Point> reps;
    for (const auto& r : roots) {
        if (!r.converged) {
            ++out.failed_seeds;
            continue;
        }
        Point cand = m.normalize(r.x);
        // Euclidean runaways (coercivity violations) are not roots on M.
        bool in_box = true;
        for (int i = 0; i < n; ++i)
            if (!m.is_toroidal(i) &&
                std::abs(cand.c[static_cast<std::size_t>(i)]) > 2 * p.tol.euclidean_box)
                in_box = false;
        if (!in_box) {
            ++out.failed_seeds;
            continue;
        }
        bool dup = false;
        for (const auto& q : reps)
            if (m.distance(q, cand) < p.tol.cluster_radius) {
                dup = true;
                break;
            }
        if (!dup) reps.push_back(std::move(cand));
    }
    std::sort(reps.begin(), reps.end(), lex_less);

    // Component detection on the geodesic connectivity graph.
    UnionFind uf(reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i)
        for (std::size_t j = i + 1; j < reps.size(); ++j)
            if (m.distance(reps[i], reps[j]) <= connect_threshold)
                uf.unite(static_cast<int>(i), static_cast<int>(j));

    std::vector<int> comp_of(reps.size(), -1);
    int n_comp = 0;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        int root = uf.find(static_cast<int>(i));
        if (comp_of[static_cast<std::size_t>(root)] < 0)
            comp_of[static_cast<std::size_t>(root)] = n_comp++;
        comp_of[i] = comp_of[static_cast<std::size_t>(root)];
    }

    out.components.resize(static_cast<std::size_t>(n_comp));
    FieldWorkspace ws(f, n);
    for (std::size_t i = 0; i < reps.size(); ++i)
        out.components[static_cast<std::size_t>(comp_of[i])].reps.push_back(reps[i]);
    for (auto& comp : out.components) {
        comp.value = ws.value(comp.reps.front().c.data());
        comp.hessian_spectrum = spectrum_at(ws, comp.reps.front());
        bool kernel = false;
        for (double ev : comp.hessian_spectrum)
            if (std::abs(ev) < p.tol.degenerate_eig) kernel = true;
        comp.degenerate = kernel || comp.reps.size() > 1;
        comp.distance_to_Z = p.zset.distance_to(m, comp.reps.front());
        for (const auto& r : comp.reps)
            comp.distance_to_Z = std::min(comp.distance_to_Z, p.zset.distance_to(m, r));
    }
    std::sort(out.components.begin(), out.components.end(),
              [](const CriticalComponent& a, const CriticalComponent& b) {
                  return lex_less(a.reps.front(), b.reps.front());
              });
    return out;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::HypothesisViolated: return "hypothesis_violated";
        case Verdict::BoundViolated: return "BOUND_VIOLATED";
    }
    return "?";
}

TheoremReport verify_cuplength_bound(const ProblemDef& p) {
    TheoremReport rep;

    ScalarField diff = ScalarField::difference(p.h, p.F);
    OscillationResult osc = oscillation(diff, p.manifold, p.tol);
    rep.norm_hF = osc.norm;
    rep.norm_certified = osc.certified;
    rep.window = osc.norm;

    SpectralGapResult gap = spectral_gap(p);
    rep.gap_infinite = gap.infinite;
    rep.gap = gap.infinite ? 0.0 : gap.value;
    rep.applicable = gap.infinite || rep.norm_hF < gap.value;

    rep.required = cuplength(p.zset, p.manifold) + 1;

    if (!rep.applicable) {
        rep.verdict = Verdict::HypothesisViolated;
        return rep;
    }

    CriticalSet crit = find_critical_points(p.h, p);
    rep.critical_points = crit.points();
    for (const auto& c : crit.components)
        if (c.degenerate) rep.degenerate_components.push_back(c);
    rep.found_total = static_cast<int>(rep.critical_points.size());
    for (const auto& cp : rep.critical_points)
        if (std::abs(cp.value) <= rep.norm_hF + p.tol.window_slack) ++rep.found_in_window;

    rep.verdict = rep.found_in_window >= rep.required ? Verdict::Pass : Verdict::BoundViolated;
    if (!osc.certified) {
        rep.advisory = true;
        rep.advisory_reason = "oscillation refinement not certified";
    }
    if (crit.has_degenerate()) {
        rep.advisory = true;
        if (!rep.advisory_reason.empty()) rep.advisory_reason += "; ";
        rep.advisory_reason +=
            "h has degenerate critical components; the count is reported over isolated points only";
    }
    return rep;
}

}  // namespace morse
