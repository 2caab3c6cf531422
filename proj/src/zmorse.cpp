#include "morse/zmorse.hpp"

#include <algorithm>
#include <cmath>

#include "morse/flow.hpp"
#include "morse/newton.hpp"

namespace morse {

namespace {

using NodePtr = std::shared_ptr<const ast::Node>;

NodePtr mk(ast::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<ast::Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr mk_const(double v) {
    auto n = std::make_shared<ast::Node>();
    n->kind = ast::Kind::Const;
    n->value = v;
    return n;
}

NodePtr mk_var(int i) {
    auto n = std::make_shared<ast::Node>();
    n->kind = ast::Kind::Var;
    n->var = i;
    return n;
}

NodePtr mk_pow(NodePtr a, int e) {
    auto n = std::make_shared<ast::Node>();
    n->kind = ast::Kind::Pow;
    n->ipow = e;
    n->a = std::move(a);
    return n;
}

NodePtr remap_vars(const NodePtr& n, const std::vector<int>& map) {
    if (!n) return nullptr;
    auto out = std::make_shared<ast::Node>(*n);
    if (n->kind == ast::Kind::Var) out->var = map[static_cast<std::size_t>(n->var)];
    out->a = remap_vars(n->a, map);
    out->b = remap_vars(n->b, map);
    return out;
}

NodePtr cosine_sum(const std::vector<double>& phases) {
    NodePtr sum;
    for (std::size_t j = 0; j < phases.size(); ++j) {
        NodePtr term = mk(ast::Kind::Cos,
                          mk(ast::Kind::Sub, mk_var(static_cast<int>(j)), mk_const(phases[j])));
        sum = sum ? mk(ast::Kind::Add, sum, term) : term;
    }
    return sum;
}

}  // namespace

ZMorseFunction::ZMorseFunction(ManifoldModel zmodel, std::vector<double> phases)
    : zm_(std::move(zmodel)), phases_(std::move(phases)) {
    if (static_cast<int>(phases_.size()) != zm_.dim())
        throw Error("one phase per Z axis required");
    if (zm_.euclidean_dims() != 0) throw Error("Morse functions on Z require a compact Z");
    std::string label = "sum_j cos(u_j - phi_j)";
    f_ = ScalarField::from_ast(cosine_sum(phases_), label);
}

ZMorseFunction ZMorseFunction::random(const ManifoldModel& zmodel, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> phases;
    for (int j = 0; j < zmodel.dim(); ++j) phases.push_back(uni(rng) * zmodel.period(j));
    return ZMorseFunction(zmodel, std::move(phases));
}

std::vector<ZCriticalPoint> ZMorseFunction::critical_points(const Tolerances& tol) const {
    const int d = zm_.dim();
    FieldWorkspace ws(f_, d);

    // Multi-start Newton over an 8-per-axis grid.
    std::vector<std::vector<double>> roots;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    const int g = 8;
    while (true) {
        std::vector<double> seed(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            seed[static_cast<std::size_t>(i)] =
                (idx[static_cast<std::size_t>(i)] + 0.29) / g * zm_.period(i);
        RootResult r = find_gradient_root(ws, seed, tol.newton_grad_tol, tol.newton_max_iter);
        if (r.converged) {
            Point cand = zm_.normalize(r.x);
            bool dup = false;
            for (const auto& q : roots)
                if (zm_.distance(Point(q), cand) < tol.cluster_radius) dup = true;
            if (!dup) roots.push_back(cand.c);
        }
        int i = 0;
        for (; i < d; ++i) {
            if (++idx[static_cast<std::size_t>(i)] < g) break;
            idx[static_cast<std::size_t>(i)] = 0;
        }
        if (i == d) break;
    }
    std::sort(roots.begin(), roots.end());

    std::vector<ZCriticalPoint> out;
    std::vector<double> grad(static_cast<std::size_t>(d)), hess(static_cast<std::size_t>(d * d));
    for (const auto& u : roots) {
        ZCriticalPoint cp;
        cp.u = u;
        cp.value = ws.hessian(u.data(), grad.data(), hess.data());
        for (int i = 0; i < d; ++i) {
            double hii = hess[static_cast<std::size_t>(i * d + i)];
            cp.hess_diag.push_back(hii);
            for (int j = 0; j < d; ++j)
                if (j != i && std::abs(hess[static_cast<std::size_t>(i * d + j)]) > 1e-8)
                    throw Error("Morse function on Z is not separable");
            if (std::abs(hii) < tol.degenerate_eig)
                throw Error("non-Morse function on Z: degenerate critical point");
            if (hii < 0) {
                ++cp.index;
                cp.repelling_axes.push_back(i);
            }
        }
        out.push_back(std::move(cp));
    }
    if (out.size() != (1u << d))
        throw Error("unexpected critical point count on Z: " + std::to_string(out.size()));
    return out;
}

const ZCriticalPoint& ZMorseFunction::point_of_index(const std::vector<ZCriticalPoint>& pts,
                                                     int index, int which) const {
    int seen = 0;
    for (const auto& cp : pts)
        if (cp.index == index && seen++ == which) return cp;
    throw Error("no critical point of index " + std::to_string(index));
}

ScalarField ZMorseFunction::ambient_extension(const ManifoldModel& m,
                                              const SubmanifoldSpec& z) const {
    std::vector<int> free = z.free_indices(m);
    if (static_cast<int>(free.size()) != zm_.dim())
        throw Error("Z model mismatch in ambient extension");
    std::vector<int> map(static_cast<std::size_t>(zm_.dim()));
    for (std::size_t k = 0; k < free.size(); ++k) map[k] = free[k];

    NodePtr root = remap_vars(f_.root(), map);
    const auto& pins = z.pinned_indices();
    const auto& vals = z.pinned_values();
    for (std::size_t k = 0; k < pins.size(); ++k) {
        NodePtr dx = mk(ast::Kind::Sub, mk_var(pins[k]), mk_const(vals[k]));
        NodePtr well = m.is_toroidal(pins[k])
                           ? mk(ast::Kind::Sub, mk_const(1.0), mk(ast::Kind::Cos, dx))
                           : mk_pow(dx, 2);
        root = mk(ast::Kind::Add, root, well);
    }
    return ScalarField::from_ast(root, "extension of " + f_.source());
}

ProbeOutcome probe_gradient_flow(const ManifoldModel& m, const ScalarField& f,
                                 const std::vector<double>& start, const Tolerances& tol,
                                 bool ascent, const Point* watch) {
    Tolerances ptol = tol;
    ptol.ode_rtol = std::max(tol.ode_rtol, 1e-9);  // probes need basins, not 10-digit paths
    Trajectory traj = integrate_gradient(m, f, start, tol.probe_time, ptol, ascent);

    ProbeOutcome out;
    out.converged = traj.converged;
    out.limit = m.normalize(traj.back().x);
    out.min_dist_to_watch = 1e308;
    if (watch)
        for (const auto& smp : traj.samples)
            out.min_dist_to_watch =
                std::min(out.min_dist_to_watch, m.distance(m.normalize(smp.x), *watch));

    out.tail_signs.assign(static_cast<std::size_t>(m.dim()), 0);
    for (int j = 0; j < m.dim(); ++j) {
        for (auto it = traj.samples.rbegin(); it != traj.samples.rend(); ++it) {
            double dev = m.wrap_diff(j, it->x[static_cast<std::size_t>(j)],
                                     out.limit[static_cast<std::size_t>(j)]);
            if (std::abs(dev) >= 1e-7) {
                out.tail_signs[static_cast<std::size_t>(j)] = dev > 0 ? 1 : -1;
                break;
            }
        }
    }
    return out;
}

int match_point(const ManifoldModel& m, const Point& x, const std::vector<Point>& candidates,
                double radius) {
    int best = -1;
    double best_d = radius;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        double d = m.distance(x, candidates[i]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace morse
