#include "morse/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "morse/fields.hpp"

namespace morse {

// ---------------------------------------------------------------------------
// Bump family
// ---------------------------------------------------------------------------

BumpFamily::BumpFamily(int k_, double r_) : k(k_), r(r_) {
    if (k < 1) throw Error("bump family needs k >= 1");
    if (r < 0) throw Error("bump family needs r >= 0");
}

namespace {
inline double smoothstep5(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
inline double smoothstep5_d(double t) {
    double u = t * (1.0 - t);
    return 30.0 * u * u;
}
}  // namespace

BumpFamily::Eval BumpFamily::operator()(double s) const {
    const double A = std::min(r, 1.0);
    const double end = support_end();
    if (s <= -1.0 || s >= end) return {0.0, 0.0};
    if (s < 0.0) return {A * smoothstep5(s + 1.0), A * smoothstep5_d(s + 1.0)};
    if (s <= plateau_end()) return {A, 0.0};
    double t = end - s;  // in (0,1)
    return {A * smoothstep5(t), -A * smoothstep5_d(t)};
}

// ---------------------------------------------------------------------------
// Homotopy field
// ---------------------------------------------------------------------------

HomotopyValue homotopy_field(const ProblemDef& p, const BumpFamily& b, double s, const Point& x) {
    const int n = p.manifold.dim();
    FieldWorkspace wF(p.F, n), wh(p.h, n);
    HomotopyValue out;
    std::vector<double> gF(static_cast<std::size_t>(n)), gh(static_cast<std::size_t>(n));
    out.F = wF.gradient(x.c.data(), gF.data());
    out.h = wh.gradient(x.c.data(), gh.data());
    auto beta = b(s);
    out.G = beta.value * out.h + (1 - beta.value) * out.F;
    out.dG_ds = beta.deriv * (out.h - out.F);
    out.gradG.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.gradG[static_cast<std::size_t>(i)] =
            beta.value * gh[static_cast<std::size_t>(i)] + (1 - beta.value) * gF[static_cast<std::size_t>(i)];
    return out;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) core
// ---------------------------------------------------------------------------

namespace {

constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB4[7] = {5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

/// RHS contract: fill dy (same size as y) at (s, y) and report the squared
/// spatial gradient plus sample metadata for the leading stage.
struct StageInfo {
    double F = 0.0;
    double G = 0.0;
    double grad2 = 0.0;
};

// One stepper serves both flow entry points (homotopy and autonomous).
struct Stepper {
    const Tolerances& tol;
    std::size_t dim_x;  // leading state entries that are manifold coordinates

    // rhs(s, y, dy, info)
    template <typename Rhs, typename EarlyStopRegion>
    void run(Rhs&& rhs, EarlyStopRegion&& in_stop_region, std::vector<double> y, double s0,
             double s1, Trajectory& out) const {
        const std::size_t n = y.size();
        std::vector<double> k[7];
        for (auto& ki : k) ki.resize(n);
        std::vector<double> ytmp(n), ynew(n), yerr(n);
        StageInfo info0, info_new;

        double s = s0;
        rhs(s, y, k[0], info0);
        push_sample(out, s, y, info0);

        double hstep = std::min(tol.ode_max_step, std::max(1e-4, (s1 - s0) / 100));
        int calm = 0;

        while (s < s1) {
            hstep = std::min(hstep, s1 - s);
            if (hstep < 1e-14 * std::max(1.0, std::abs(s)))
                throw Error("step size underflow in flow integration at s = " + std::to_string(s));

            for (int st = 1; st < 7; ++st) {
                for (std::size_t i = 0; i < n; ++i) {
                    double acc = 0;
                    for (int j = 0; j < st; ++j) acc += kA[st][j] * k[j][i];
                    ytmp[i] = y[i] + hstep * acc;
                }
                StageInfo si;
                rhs(s + kC[st] * hstep, ytmp, k[st], si);
                if (st == 6) info_new = si;  // FSAL stage sits at the step end
            }
            // 5th-order solution is the stage-7 argument (b == a[6]).
            for (std::size_t i = 0; i < n; ++i) {
                double acc5 = 0, acc4 = 0;
                for (int j = 0; j < 6; ++j) acc5 += kA[6][j] * k[j][i];
                for (int j = 0; j < 7; ++j) acc4 += kB4[j] * k[j][i];
                ynew[i] = y[i] + hstep * acc5;
                yerr[i] = hstep * (acc5 - acc4);
            }
            double err = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double sc = tol.ode_atol + tol.ode_rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                double e = yerr[i] / sc;
                err += e * e;
            }
            err = std::sqrt(err / n);

            if (err <= 1.0) {
                s += hstep;
                y.swap(ynew);
                k[0].swap(k[6]);  // FSAL
                push_sample(out, s, y, info_new);

                double g = std::sqrt(info_new.grad2);
                if (g < tol.grad_converge && in_stop_region(s)) {
                    if (++calm >= tol.converge_steps) {
                        out.converged = true;
                        return;
                    }
                } else {
                    calm = 0;
                }
            }
            double f = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            hstep *= std::clamp(f, 0.2, 5.0);
            hstep = std::min(hstep, tol.ode_max_step);
        }
    }

    void push_sample(Trajectory& out, double s, const std::vector<double>& y,
                     const StageInfo& info) const {
        Trajectory::Sample smp;
        smp.s = s;
        smp.x.assign(y.begin(), y.begin() + static_cast<long>(dim_x));
        smp.F = info.F;
        smp.G = info.G;
        smp.grad2 = info.grad2;
        smp.energy_acc = y[dim_x];
        smp.ramp_acc = y[dim_x + 1];
        out.samples.push_back(std::move(smp));
    }
};

}  // namespace

Trajectory integrate(const ProblemDef& p, const BumpFamily& b, const Point& x0, double s0,
                     double s1) {
    if (!(s0 < s1)) throw Error("integrate requires s0 < s1");
    const int n = p.manifold.dim();
    if (static_cast<int>(x0.dim()) != n) throw Error("dimension mismatch");

    FieldWorkspace wF(p.F, n), wh(p.h, n);
    std::vector<double> gF(static_cast<std::size_t>(n)), gh(static_cast<std::size_t>(n));

    auto rhs = [&](double s, const std::vector<double>& y, std::vector<double>& dy,
                   StageInfo& info) {
        double F = wF.gradient(y.data(), gF.data());
        double h = wh.gradient(y.data(), gh.data());
        auto beta = b(s);
        double grad2 = 0;
        for (int i = 0; i < n; ++i) {
            double gi = beta.value * gh[static_cast<std::size_t>(i)] +
                        (1 - beta.value) * gF[static_cast<std::size_t>(i)];
            dy[static_cast<std::size_t>(i)] = -gi;
            grad2 += gi * gi;
        }
        dy[static_cast<std::size_t>(n)] = grad2;                       // energy density
        dy[static_cast<std::size_t>(n) + 1] = beta.deriv * (h - F);    // ramp contribution
        info.F = F;
        info.G = beta.value * h + (1 - beta.value) * F;
        info.grad2 = grad2;
    };

    Trajectory out;
    out.r = b.r;
    out.k = b.k;
    std::vector<double> y(x0.c);
    y.push_back(0.0);
    y.push_back(0.0);
    const double stop_from = b.support_end();
    Stepper{p.tol, static_cast<std::size_t>(n)}.run(
        rhs, [stop_from](double s) { return s > stop_from; }, std::move(y), s0, s1, out);
    return out;
}

Trajectory integrate_gradient(const ManifoldModel& m, const ScalarField& f,
                              const std::vector<double>& x0, double t_max,
                              const Tolerances& tol, bool ascent) {
    const int n = m.dim();
    if (static_cast<int>(x0.size()) != n) throw Error("dimension mismatch");
    FieldWorkspace wf(f, n);
    std::vector<double> g(static_cast<std::size_t>(n));
    const double sign = ascent ? 1.0 : -1.0;

    auto rhs = [&](double, const std::vector<double>& y, std::vector<double>& dy,
                   StageInfo& info) {
        double v = wf.gradient(y.data(), g.data());
        double grad2 = 0;
        for (int i = 0; i < n; ++i) {
            dy[static_cast<std::size_t>(i)] = sign * g[static_cast<std::size_t>(i)];
            grad2 += g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
        }
        dy[static_cast<std::size_t>(n)] = grad2;
        dy[static_cast<std::size_t>(n) + 1] = 0.0;
        info.F = v;
        info.G = v;
        info.grad2 = grad2;
    };

    Trajectory out;
    out.r = 0;
    out.k = 1;
    std::vector<double> y(x0);
    y.push_back(0.0);
    y.push_back(0.0);
    Stepper{tol, static_cast<std::size_t>(n)}.run(
        rhs, [](double) { return true; }, std::move(y), 0.0, t_max, out);
    return out;
}

std::vector<double> Trajectory::interpolate(double s, const ProblemDef& p,
                                            const BumpFamily& b) const {
    if (samples.size() < 2 || s < samples.front().s - 1e-12 || s > samples.back().s + 1e-12)
        throw Error("interpolation time outside the trajectory domain");
    s = std::clamp(s, samples.front().s, samples.back().s);
    std::size_t hi = 1;
    while (hi + 1 < samples.size() && samples[hi].s < s) ++hi;
    const auto& a = samples[hi - 1];
    const auto& c = samples[hi];
    double len = c.s - a.s;
    if (len <= 0) return a.x;
    double t = (s - a.s) / len;

    auto deriv_at = [&](const Trajectory::Sample& smp) {
        HomotopyValue v = homotopy_field(p, b, smp.s, Point(smp.x));
        std::vector<double> d(v.gradG.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = -v.gradG[i];
        return d;
    };
    std::vector<double> da = deriv_at(a), dc = deriv_at(c);

    double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    double h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t);
    double h11 = t * t * (t - 1);
    std::vector<double> out(a.x.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = h00 * a.x[i] + h10 * len * da[i] + h01 * c.x[i] + h11 * len * dc[i];
    return out;
}

double energy(const Trajectory& t) {
    if (t.samples.size() < 2) throw Error("energy requires at least two samples");
    return t.back().energy_acc - t.front().energy_acc;
}

WindowDiagnostics window_diagnostics(const ProblemDef& p, const Trajectory& t, double norm_hF) {
    WindowDiagnostics out;
    out.norm_hF = norm_hF;
    const double bound = norm_hF + p.tol.lemma_slack;
    for (const auto& smp : t.samples) {
        out.max_abs_G = std::max(out.max_abs_G, std::abs(smp.G));
        out.max_abs_F = std::max(out.max_abs_F, std::abs(smp.F));
        if (std::abs(smp.G) > bound)
            out.violations.push_back({smp.s, "G", std::abs(smp.G) - norm_hF});
        if (std::abs(smp.F) > bound)
            out.violations.push_back({smp.s, "F", std::abs(smp.F) - norm_hF});
    }
    out.energy = t.samples.size() >= 2 ? energy(t) : 0.0;
    if (out.energy > bound)
        out.violations.push_back({t.back().s, "E", out.energy - norm_hF});
    return out;
}

WindowDiagnostics window_diagnostics(const ProblemDef& p, const Trajectory& t) {
    OscillationResult osc = oscillation(ScalarField::difference(p.h, p.F), p.manifold, p.tol);
    return window_diagnostics(p, t, osc.norm);
}

ActionEnergyResult action_energy_constant(const ProblemDef& p, double tube_radius) {
    const auto& m = p.manifold;
    const auto pins = p.zset.pinned_indices();
    const int npin = static_cast<int>(pins.size());
    ManifoldModel zm = p.zset.intrinsic_manifold(m);
    const int d = zm.dim();

    FieldWorkspace wF(p.F, m.dim());
    std::vector<double> g(static_cast<std::size_t>(m.dim()));

    const int gz = 48;        // samples per Z axis
    const int gn = 33;        // samples per normal axis, endpoints included
    ActionEnergyResult out;

    std::vector<int> zi(static_cast<std::size_t>(std::max(d, 1)), 0);
    while (true) {
        std::vector<double> zc(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            zc[static_cast<std::size_t>(i)] = double(zi[static_cast<std::size_t>(i)]) / gz * zm.period(i);
        Point base = p.zset.embed(m, zc);

        std::vector<int> ni(static_cast<std::size_t>(npin), 0);
        while (true) {
            Point x = base;
            double r2 = 0;
            for (int a = 0; a < npin; ++a) {
                double off = (2.0 * ni[static_cast<std::size_t>(a)] / (gn - 1) - 1.0) * tube_radius;
                x.c[static_cast<std::size_t>(pins[static_cast<std::size_t>(a)])] += off;
                r2 += off * off;
            }
            if (r2 <= tube_radius * tube_radius && std::sqrt(r2) >= p.tol.tube_exclusion) {
                double F = wF.gradient(x.c.data(), g.data());
                double e = 0;
                for (double gi : g) e += gi * gi;
                if (e < 1e-24) {
                    if (std::abs(F) > 1e-12)
                        throw Error("tube of radius " + std::to_string(tube_radius) +
                                    " contains a critical point outside Z (|F| = " +
                                    std::to_string(std::abs(F)) + ")");
                } else {
                    double ratio = std::abs(F) / e;
                    if (ratio > out.C) {
                        out.C = ratio;
                        out.argmax = m.normalize(x);
                    }
                }
            }
            int a = 0;
            for (; a < npin; ++a) {
                if (++ni[static_cast<std::size_t>(a)] < gn) break;
                ni[static_cast<std::size_t>(a)] = 0;
            }
            if (a == npin) break;
        }

        if (d == 0) break;
        int i = 0;
        for (; i < d; ++i) {
            if (++zi[static_cast<std::size_t>(i)] < gz) break;
            zi[static_cast<std::size_t>(i)] = 0;
        }
        if (i == d) break;
    }
    return out;
}

ExponentialRateResult exponential_rate(const ProblemDef& p, const Trajectory& t,
                                       double tube_radius) {
    if (t.samples.size() < 4) throw Error("tail too short for a decay fit");
    const auto& m = p.manifold;
    Point limit = m.normalize(t.back().x);

    double total_move = m.distance(m.normalize(t.front().x), limit);
    if (total_move < 1e-12) throw Error("no decay: constant trajectory");

    const double d_lo = 1e-8;
    const double d_hi = std::min(0.1, tube_radius / 2);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int npts = 0;
    for (const auto& smp : t.samples) {
        double dist = m.distance(m.normalize(smp.x), limit);
        if (dist < d_lo || dist > d_hi) continue;
        double lx = smp.s, ly = std::log(dist);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++npts;
    }
    if (npts < 6) throw Error("tail too short for a decay fit");
    double denom = npts * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw Error("tail too short for a decay fit");
    double slope = (npts * sxy - sx * sy) / denom;

    ExponentialRateResult out;
    out.fitted_B = -slope;
    out.tail_points = npts;
    ActionEnergyResult ae = action_energy_constant(p, tube_radius);
    out.predicted_bound = 1.0 / (2.0 * std::sqrt(ae.C));
    out.satisfies_bound = out.fitted_B >= out.predicted_bound - 1e-3;
    return out;
}

double integration_horizon(const ProblemDef& p, const BumpFamily& b) {
    MorseBottReport mb = morse_bott_verify(p);
    double lam = std::max(mb.min_abs_transverse, 1e-3);
    return b.support_end() + p.tol.horizon_factor / lam;
}

void write_trajectory_csv(const Trajectory& t, std::ostream& os) {
    os << "s";
    for (std::size_t i = 0; i < t.samples.front().x.size(); ++i) os << ",x" << i;
    os << ",F,G,grad_norm2\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    for (const auto& smp : t.samples) {
        put(smp.s);
        for (double xi : smp.x) {
            os << ',';
            put(xi);
        }
        os << ',';
        put(smp.F);
        os << ',';
        put(smp.G);
        os << ',';
        put(smp.grad2);
        os << '\n';
    }
}

}  // namespace morse
