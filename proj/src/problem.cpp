#include "morse/problem.hpp"

#include <cmath>

namespace morse {

namespace {
struct KnobRef {
    const char* name;
    double Tolerances::* field;
};
constexpr KnobRef kDoubleKnobs[] = {
    {"ode_rtol", &Tolerances::ode_rtol},
    {"ode_atol", &Tolerances::ode_atol},
    {"ode_max_step", &Tolerances::ode_max_step},
    {"grad_converge", &Tolerances::grad_converge},
    {"newton_grad_tol", &Tolerances::newton_grad_tol},
    {"cluster_radius", &Tolerances::cluster_radius},
    {"degenerate_eig", &Tolerances::degenerate_eig},
    {"asymptotic_tol", &Tolerances::asymptotic_tol},
    {"lemma_slack", &Tolerances::lemma_slack},
    {"window_slack", &Tolerances::window_slack},
    {"zero_on_z_tol", &Tolerances::zero_on_z_tol},
    {"grad_on_z_tol", &Tolerances::grad_on_z_tol},
    {"euclidean_box", &Tolerances::euclidean_box},
    {"fd_step", &Tolerances::fd_step},
    {"tube_exclusion", &Tolerances::tube_exclusion},
    {"bisect_tol", &Tolerances::bisect_tol},
    {"approach_tol", &Tolerances::approach_tol},
    {"basin_match", &Tolerances::basin_match},
    {"probe_time", &Tolerances::probe_time},
    {"horizon_factor", &Tolerances::horizon_factor},
};
}  // namespace

double Tolerances::get(const std::string& key) const {
    for (const auto& k : kDoubleKnobs)
        if (key == k.name) return this->*(k.field);
    if (key == "osc_grid") return osc_grid;
    if (key == "converge_steps") return converge_steps;
    if (key == "newton_max_iter") return newton_max_iter;
    throw Error("unknown tolerance key '" + key + "'");
}

void Tolerances::set(const std::string& key, double v) {
    for (const auto& k : kDoubleKnobs)
        if (key == k.name) {
            this->*(k.field) = v;
            return;
        }
    if (key == "osc_grid") { osc_grid = static_cast<int>(v); return; }
    if (key == "converge_steps") { converge_steps = static_cast<int>(v); return; }
    if (key == "newton_max_iter") { newton_max_iter = static_cast<int>(v); return; }
    throw Error("unknown tolerance key '" + key + "'");
}

std::vector<std::pair<std::string, double>> Tolerances::items() const {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& k : kDoubleKnobs) out.emplace_back(k.name, this->*(k.field));
    out.emplace_back("osc_grid", osc_grid);
    out.emplace_back("converge_steps", converge_steps);
    out.emplace_back("newton_max_iter", newton_max_iter);
    return out;
}

ProblemDef::ProblemDef(ManifoldModel m, SubmanifoldSpec z, ScalarField F_, ScalarField h_,
                       Tolerances t, std::vector<int> seeds)
    : manifold(std::move(m)),
      zset(std::move(z)),
      F(std::move(F_)),
      h(std::move(h_)),
      tol(t),
      seed_grid(std::move(seeds)) {
    zset.validate(manifold);
    F.bind_check(manifold, tol.euclidean_box);
    h.bind_check(manifold, tol.euclidean_box);
    if (seed_grid.empty())
        seed_grid.assign(static_cast<std::size_t>(manifold.dim()), 16);
    if (static_cast<int>(seed_grid.size()) != manifold.dim())
        throw Error("seed_grid must have one entry per coordinate");
    for (int s : seed_grid)
        if (s < 2) throw Error("seed_grid entries must be at least 2");
    check_invariants();
}

void ProblemDef::check_invariants() const {
    FieldWorkspace wf(F, manifold.dim());
    std::vector<double> grad;
    // Dense-ish grid over Z's intrinsic coordinates.
    ManifoldModel zm = zset.intrinsic_manifold(manifold);
    int d = zm.dim();
    int per_axis = 17;
    std::vector<int> idx(static_cast<std::size_t>(std::max(d, 1)), 0);
    while (true) {
        std::vector<double> zc(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            zc[static_cast<std::size_t>(i)] =
                (idx[static_cast<std::size_t>(i)] + 0.13) / per_axis * zm.period(i);
        Point x = zset.embed(manifold, zc);
        double v = wf.gradient(x.c, grad);
        if (std::abs(v) > tol.zero_on_z_tol) {
            std::string msg = "F|_Z = " + std::to_string(v) + " != 0 at sample z = (";
            for (std::size_t i = 0; i < x.c.size(); ++i)
                msg += (i ? ", " : "") + std::to_string(x.c[i]);
            throw Error(msg + ")");
        }
        double g2 = 0;
        for (double gi : grad) g2 += gi * gi;
        if (std::sqrt(g2) > tol.grad_on_z_tol)
            throw Error("Z is not critical for F: |grad F| = " + std::to_string(std::sqrt(g2)) +
                        " at a sample of Z");
        if (d == 0) break;
        int i = 0;
        for (; i < d; ++i) {
            if (++idx[static_cast<std::size_t>(i)] < per_axis) break;
            idx[static_cast<std::size_t>(i)] = 0;
        }
        if (i == d) break;
    }
}

std::vector<Point> ProblemDef::ambient_seeds() const {
    int n = manifold.dim();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    std::vector<Point> out;
    while (true) {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            int cnt = seed_grid[static_cast<std::size_t>(i)];
            double t = (idx[static_cast<std::size_t>(i)] + 0.5) / cnt;
            x[static_cast<std::size_t>(i)] =
                manifold.is_toroidal(i) ? t * manifold.period(i)
                                        : (2 * t - 1) * tol.euclidean_box;
        }
        out.emplace_back(std::move(x));
        int i = 0;
        for (; i < n; ++i) {
            if (++idx[static_cast<std::size_t>(i)] < seed_grid[static_cast<std::size_t>(i)]) break;
            idx[static_cast<std::size_t>(i)] = 0;
        }
        if (i == n) break;
    }
    return out;
}

std::vector<Point> ProblemDef::z_seeds(int per_axis) const {
    ManifoldModel zm = zset.intrinsic_manifold(manifold);
    int d = zm.dim();
    std::vector<int> idx(static_cast<std::size_t>(std::max(d, 1)), 0);
    std::vector<Point> out;
    while (true) {
        std::vector<double> zc(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            zc[static_cast<std::size_t>(i)] =
                double(idx[static_cast<std::size_t>(i)]) / per_axis * zm.period(i);
        out.push_back(zset.embed(manifold, zc));
        if (d == 0) break;
        int i = 0;
        for (; i < d; ++i) {
            if (++idx[static_cast<std::size_t>(i)] < per_axis) break;
            idx[static_cast<std::size_t>(i)] = 0;
        }
        if (i == d) break;
    }
    return out;
}

double ProblemDef::grid_spacing() const {
    double sp = 0.0;
    for (int i = 0; i < manifold.dim(); ++i) {
        double span = manifold.is_toroidal(i) ? manifold.period(i) : 2 * tol.euclidean_box;
        sp = std::max(sp, span / seed_grid[static_cast<std::size_t>(i)]);
    }
    return sp;
}

}  // namespace morse
