#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "morse/problem.hpp"

namespace morse {

/// The plateau bump family driving the continuation homotopy.
///
/// Realized as quintic smoothstep ramps on [-1,0] and [(k+1)r, (k+1)r+1] with
/// the plateau height scaled by min(r,1), so that beta_r == 1 on the plateau
/// for r >= 1, beta_r' == 0 there for r <= 1, and beta_r -> 0 as r -> 0.  The
/// ramps are C^2 with closed-form slope bound 15/8 < 2.
struct BumpFamily {
    int k = 1;       // number of evaluation slots
    double r = 0.0;  // plateau scale, >= 0

    BumpFamily(int k_, double r_);

    double plateau_end() const { return (k + 1) * r; }
    double support_end() const { return (k + 1) * r + 1.0; }

    struct Eval {
        double value;
        double deriv;
    };
    Eval operator()(double s) const;
};

/// A discretized flow line in cover coordinates, one sample per accepted
/// integrator step.  energy_acc and ramp_acc are quadrature states integrated
/// alongside the flow:
///   energy_acc(s) = int |grad G|^2,   ramp_acc(s) = int beta_r'(t) (h-F).
struct Trajectory {
    struct Sample {
        double s;
        std::vector<double> x;  // cover coordinates (not normalized)
        double F;
        double G;
        double grad2;       // |grad G|^2
        double energy_acc;
        double ramp_acc;
    };

    double r = 0.0;
    int k = 1;
    std::vector<Sample> samples;
    bool converged = false;  // early-stopped on a sustained tiny gradient

    const Sample& front() const { return samples.front(); }
    const Sample& back() const { return samples.back(); }

    /// Cubic Hermite interpolation of the state at time s (derivatives are
    /// re-derived from the flow equation at the bracketing samples).
    std::vector<double> interpolate(double s, const ProblemDef& p, const BumpFamily& b) const;
};

/// G_{r,s}(x) = beta_r(s) h(x) + (1 - beta_r(s)) F(x) and its spatial
/// gradient; d/ds G is beta_r'(s) (h - F)(x).
struct HomotopyValue {
    double G;
    std::vector<double> gradG;
    double F;
    double h;
    double dG_ds;
};
HomotopyValue homotopy_field(const ProblemDef& p, const BumpFamily& b, double s, const Point& x);

/// Integrates gamma' = -grad G_{r,s}(gamma) with an embedded Dormand-Prince
/// 5(4) pair at per-step tolerance tol.ode_rtol.  Stops early (converged flag)
/// when |grad G| stays below tol.grad_converge for tol.converge_steps accepted
/// steps in the final autonomous region s > (k+1)r + 1.
Trajectory integrate(const ProblemDef& p, const BumpFamily& b, const Point& x0, double s0,
                     double s1);

/// Autonomous gradient flow of a single field (descent, or ascent when
/// ascent = true), same integrator; used by membership probes and the Morse
/// complex construction.
Trajectory integrate_gradient(const ManifoldModel& m, const ScalarField& f,
                              const std::vector<double>& x0, double t_max,
                              const Tolerances& tol, bool ascent = false);

/// E(gamma) = int |gamma'|^2 over the sample grid (the flow equation
/// substitutes gamma' = -grad G; the quadrature rides along the integration).
double energy(const Trajectory& t);

struct WindowViolation {
    double s;
    std::string quantity;
    double excess;
};

/// Lemma diagnostics along a trajectory with Z-asymptotics on both ends:
/// max |G_{r,s}(gamma)|, max |F(gamma)| and E(gamma) must all stay within
/// ||h - F|| (+ lemma_slack).
struct WindowDiagnostics {
    double max_abs_G = 0.0;
    double max_abs_F = 0.0;
    double energy = 0.0;
    double norm_hF = 0.0;
    std::vector<WindowViolation> violations;
};
WindowDiagnostics window_diagnostics(const ProblemDef& p, const Trajectory& t, double norm_hF);
WindowDiagnostics window_diagnostics(const ProblemDef& p, const Trajectory& t);

/// The action-energy constant: C = max |F| / <grad F, grad F> over a dense
/// sample of the tube of the given radius around Z (points closer to Z than
/// tol.tube_exclusion are skipped).  Throws if the tube contains a critical
/// point outside Z.
struct ActionEnergyResult {
    double C = 0.0;
    Point argmax;
};
ActionEnergyResult action_energy_constant(const ProblemDef& p, double tube_radius);

/// Least-squares decay rate of log d(limit, gamma(s)) over the trajectory
/// tail, compared against the predicted lower bound 1/(2 sqrt(C)).
struct ExponentialRateResult {
    double fitted_B = 0.0;
    double predicted_bound = 0.0;
    bool satisfies_bound = false;
    int tail_points = 0;
};
ExponentialRateResult exponential_rate(const ProblemDef& p, const Trajectory& t,
                                       double tube_radius);

/// Integration horizon for Z-asymptotic shooting: the homotopy support plus a
/// tail sized from the smallest transverse Hessian eigenvalue.
double integration_horizon(const ProblemDef& p, const BumpFamily& b);

/// CSV dump: header `s,x0,...,xn,F,G,grad_norm2`, one row per accepted step,
/// 17 significant digits.
void write_trajectory_csv(const Trajectory& t, std::ostream& os);

}  // namespace morse
