#include "morse/zero_count.hpp"

#include <algorithm>
#include <cmath>

namespace morse {

namespace {

constexpr double kNodeEps = 1e-9;      // grid node sitting on a wall
constexpr double kCoincide = 1e-6;     // secondary conditions at a root

bool short_crossing(double a, double b, double period) {
    if (a == 0.0 || b == 0.0) return true;
    return (a > 0) != (b > 0) && std::abs(a) + std::abs(b) < period / 4;
}

ZeroCount count_1d(const ManifoldModel& dom, const DevFn& devs, int n_cond, int grid,
                   const Tolerances& tol) {
    const double P = dom.period(0);
    std::vector<std::vector<double>> node_devs(static_cast<std::size_t>(grid));
    for (int i = 0; i < grid; ++i) {
        node_devs[static_cast<std::size_t>(i)] = devs({double(i) / grid * P});
        if (std::abs(node_devs[static_cast<std::size_t>(i)][0]) < kNodeEps)
            throw NonTransverseError("solution at a grid node; re-randomize phases");
    }

    ZeroCount out;
    for (int i = 0; i < grid; ++i) {
        int inext = (i + 1) % grid;
        double a = node_devs[static_cast<std::size_t>(i)][0];
        double b = node_devs[static_cast<std::size_t>(inext)][0];
        if (!short_crossing(a, b, P)) continue;

        double lo = double(i) / grid * P;
        double hi = double(i + 1) / grid * P;
        double dlo = a;
        while (hi - lo > tol.bisect_tol) {
            double mid = 0.5 * (lo + hi);
            double dm = devs({mid})[0];
            if ((dm > 0) == (dlo > 0)) {
                lo = mid;
                dlo = dm;
            } else {
                hi = mid;
            }
        }
        double root = 0.5 * (lo + hi);
        std::vector<double> d = devs({root});
        bool ok = true;
        for (int c = 1; c < n_cond; ++c)
            if (std::abs(d[static_cast<std::size_t>(c)]) > kCoincide) ok = false;
        if (!ok) continue;
        bool dup = false;
        for (const auto& rt : out.roots)
            if (std::abs(dom.wrap_diff(0, rt[0], root)) < 1e-8) dup = true;
        if (!dup) out.roots.push_back({root});
    }
    out.parity = static_cast<int>(out.roots.size()) % 2;
    return out;
}

struct Cell {
    double u0, v0, du, dv;
    std::vector<double> d00, d10, d01, d11;  // corner devs
};

bool cell_active(const Cell& c, int cond, double period) {
    double vals[4] = {c.d00[static_cast<std::size_t>(cond)], c.d10[static_cast<std::size_t>(cond)],
                      c.d01[static_cast<std::size_t>(cond)], c.d11[static_cast<std::size_t>(cond)]};
    bool pos = false, neg = false;
    for (double v : vals) {
        if (std::abs(v) > period / 4) return false;  // antipodal sheet of the wall
        if (v > 0) pos = true;
        else neg = true;
    }
    return pos && neg;
}

ZeroCount count_2d(const ManifoldModel& dom, const DevFn& devs, int n_cond, int grid,
                   const Tolerances& tol) {
    const double P0 = dom.period(0), P1 = dom.period(1);
    const double wall_period = std::min(P0, P1);

    auto eval = [&](double u, double v) { return devs({u, v}); };

    std::vector<std::vector<std::vector<double>>> node(
        static_cast<std::size_t>(grid + 1),
        std::vector<std::vector<double>>(static_cast<std::size_t>(grid + 1)));
    for (int i = 0; i <= grid; ++i)
        for (int j = 0; j <= grid; ++j) {
            node[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                eval(double(i % grid) / grid * P0, double(j % grid) / grid * P1);
            const auto& d = node[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (std::abs(d[0]) < kNodeEps && std::abs(d[1]) < kNodeEps)
                throw NonTransverseError("solution at a grid node; re-randomize phases");
        }

    std::vector<Cell> stack;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            Cell c;
            c.u0 = double(i) / grid * P0;
            c.v0 = double(j) / grid * P1;
            c.du = P0 / grid;
            c.dv = P1 / grid;
            c.d00 = node[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            c.d10 = node[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)];
            c.d01 = node[static_cast<std::size_t>(i)][static_cast<std::size_t>(j + 1)];
            c.d11 = node[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j + 1)];
            stack.push_back(std::move(c));
        }

    ZeroCount out;
    std::size_t budget = 2000000;
    while (!stack.empty()) {
        if (--budget == 0) throw Error("2d zero count exceeded its subdivision budget");
        Cell c = std::move(stack.back());
        stack.pop_back();
        if (!cell_active(c, 0, wall_period) || !cell_active(c, 1, wall_period)) continue;

        if (c.du < 1e-7 && c.dv < 1e-7) {
            double u = c.u0 + c.du / 2, v = c.v0 + c.dv / 2;
            std::vector<double> d = eval(u, v);
            bool ok = true;
            for (int cc = 0; cc < n_cond; ++cc)
                if (std::abs(d[static_cast<std::size_t>(cc)]) > kCoincide) ok = false;
            if (ok) {
                bool dup = false;
                for (const auto& rt : out.roots)
                    if (std::abs(dom.wrap_diff(0, rt[0], u)) < 1e-5 &&
                        std::abs(dom.wrap_diff(1, rt[1], v)) < 1e-5)
                        dup = true;
                if (!dup) out.roots.push_back({u, v});
            }
            continue;
        }

        // Subdivide into four; five new evaluations.
        double um = c.u0 + c.du / 2, vm = c.v0 + c.dv / 2;
        auto dm0 = eval(um, c.v0);
        auto d0m = eval(c.u0, vm);
        auto dmm = eval(um, vm);
        auto d1m = eval(c.u0 + c.du, vm);
        auto dm1 = eval(um, c.v0 + c.dv);
        double hu = c.du / 2, hv = c.dv / 2;
        stack.push_back({c.u0, c.v0, hu, hv, c.d00, dm0, d0m, dmm});
        stack.push_back({um, c.v0, hu, hv, dm0, c.d10, dmm, d1m});
        stack.push_back({c.u0, vm, hu, hv, d0m, dmm, c.d01, dm1});
        stack.push_back({um, vm, hu, hv, dmm, d1m, dm1, c.d11});
    }
    out.parity = static_cast<int>(out.roots.size()) % 2;
    return out;
}

}  // namespace

ZeroCount count_isolated_zeros(const ManifoldModel& domain, const DevFn& devs, int n_conditions,
                               int grid, const Tolerances& tol) {
    if (n_conditions < domain.dim()) {
        ZeroCount out;
        out.positive_dimensional = true;
        return out;  // mod-2 convention: non-0-dimensional sets count as 0
    }
    if (domain.dim() == 1) return count_1d(domain, devs, n_conditions, grid, tol);
    if (domain.dim() == 2) return count_2d(domain, devs, n_conditions, grid, tol);
    throw Error("zero counting supports parameter domains of dimension 1 or 2");
}

}  // namespace morse
