#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "morse/problem.hpp"

namespace morse {

/// Raised when a randomized configuration fails a genericity check (a
/// solution sitting on a grid cell boundary, a probe failing to identify its
/// target).  Callers re-randomize phases and retry.
struct NonTransverseError : Error {
    using Error::Error;
};

/// A critical point of a Morse function on Z, intrinsic coordinates.
struct ZCriticalPoint {
    std::vector<double> u;
    int index = 0;                    // number of negative Hessian eigenvalues
    double value = 0.0;
    std::vector<double> hess_diag;
    std::vector<int> repelling_axes;  // axes with negative Hessian (descent flow)
};

/// Morse functions on the subtorus Z, fixed to the family
/// sum_j cos(u_j - phi_j) with seeded random phases: generic, guaranteed
/// Morse, and with a coordinate-aligned stable/unstable structure that the
/// membership machinery relies on.
class ZMorseFunction {
public:
    ZMorseFunction(ManifoldModel zmodel, std::vector<double> phases);

    static ZMorseFunction random(const ManifoldModel& zmodel, std::mt19937_64& rng);

    const ScalarField& field() const { return f_; }
    const ManifoldModel& zmodel() const { return zm_; }
    const std::vector<double>& phases() const { return phases_; }

    /// Multi-start Newton enumeration of Crit f on Z with Hessian indices.
    /// Throws when any critical point is degenerate (non-Morse input).
    std::vector<ZCriticalPoint> critical_points(const Tolerances& tol) const;

    const ZCriticalPoint& point_of_index(const std::vector<ZCriticalPoint>& pts, int index,
                                         int which = 0) const;

    /// Extension f-bar to the ambient manifold: f on the free coordinates plus
    /// a tube well in the pinned ones (1 - cos for toroidal pins, squared
    /// distance for Euclidean pins), so Crit f on Z sits inside Crit f-bar
    /// with positive definite normal Hessian.
    ScalarField ambient_extension(const ManifoldModel& m, const SubmanifoldSpec& z) const;

private:
    ManifoldModel zm_;
    std::vector<double> phases_;
    ScalarField f_;
};

/// Outcome of a gradient-flow membership probe.
struct ProbeOutcome {
    Point limit;                 // normalized limit point
    bool converged = false;
    double min_dist_to_watch = 0.0;  // min distance along the path to `watch`
    std::vector<int> tail_signs;     // approach side per axis: -1, 0, +1
};

/// Flow -grad f (or +grad f) from `start` until the gradient norm drops below
/// tol.grad_converge; reads the approach side per coordinate off the tail.
ProbeOutcome probe_gradient_flow(const ManifoldModel& m, const ScalarField& f,
                                 const std::vector<double>& start, const Tolerances& tol,
                                 bool ascent = false, const Point* watch = nullptr);

/// Index of the nearest point within tol.basin_match, or -1.
int match_point(const ManifoldModel& m, const Point& x, const std::vector<Point>& candidates,
                double radius);

}  // namespace morse
