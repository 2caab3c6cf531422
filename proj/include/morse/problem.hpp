#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "morse/expr.hpp"
#include "morse/geometry.hpp"

namespace morse {

/// Solver tolerance bundle.  Every knob is overridable from problem files and
/// from the CLI via --set key=value.
struct Tolerances {
    double ode_rtol = 1e-10;
    double ode_atol = 1e-12;
    double ode_max_step = 1.0;
    double grad_converge = 1e-10;     // |grad G| for flow convergence detection
    int converge_steps = 5;           // consecutive accepted steps below grad_converge
    double newton_grad_tol = 1e-11;
    int newton_max_iter = 120;
    double cluster_radius = 1e-4;
    double degenerate_eig = 1e-6;
    double asymptotic_tol = 1e-8;     // distance-to-Z at trajectory ends
    double lemma_slack = 1e-6;        // slack on the |G|, |F|, E bounds
    double window_slack = 1e-9;       // slack on critical-value window membership
    double zero_on_z_tol = 1e-8;      // |F| on Z at load time
    double grad_on_z_tol = 1e-8;      // |grad F| on Z at load time
    int osc_grid = 64;                // oscillation grid per axis
    double euclidean_box = 10.0;      // sampling half-width for Euclidean axes
    double fd_step = 1e-5;
    double tube_exclusion = 1e-6;     // distance-to-Z cutoff in action-energy sampling
    double bisect_tol = 1e-12;        // parameter bisection for constrained counts
    double approach_tol = 1e-3;       // witness must pass this close to its target
    double basin_match = 1e-4;        // flow limit matched to nearest critical point
    double probe_time = 400.0;        // time budget for membership probe flows
    double horizon_factor = 40.0;     // tail horizon = factor / min transverse eigenvalue

    double get(const std::string& key) const;
    void set(const std::string& key, double v);
    std::vector<std::pair<std::string, double>> items() const;
};

/// The verification instance (M, Z, F, h) plus solver configuration.
///
/// Invariants checked at load time: F vanishes on Z and Z consists of critical
/// points of F, both within the stated tolerances.
struct ProblemDef {
    ManifoldModel manifold;
    SubmanifoldSpec zset;
    ScalarField F;
    ScalarField h;
    Tolerances tol;
    std::vector<int> seed_grid;  // per-axis sample counts for multi-start solves

    ProblemDef(ManifoldModel m, SubmanifoldSpec z, ScalarField F_, ScalarField h_,
               Tolerances t = {}, std::vector<int> seeds = {});

    /// Re-check the Morse-Bott normalization invariants; throws with a
    /// diagnostic sample on failure.
    void check_invariants() const;

    /// Ambient seed points: toroidal axes sampled uniformly over a period,
    /// Euclidean axes over [-euclidean_box, euclidean_box].
    std::vector<Point> ambient_seeds() const;

    /// Seed points on Z (full-dimensional, pinned coordinates exact).
    std::vector<Point> z_seeds(int per_axis) const;

    double grid_spacing() const;
};

}  // namespace morse
