#pragma once

#include <optional>
#include <string>
#include <vector>

#include "morse/problem.hpp"

namespace morse {

/// An isolated, nondegenerate critical point of a field.
struct CriticalPoint {
    Point location;                       // normalized representative
    double value = 0.0;
    std::optional<int> morse_index;       // nullopt when degenerate
    std::vector<double> hessian_spectrum; // ascending
    int basin_id = -1;                    // component the point belongs to
};

/// A connected component of the critical set, detected from the geodesic
/// connectivity graph of converged Newton roots (threshold 2x grid spacing).
struct CriticalComponent {
    std::vector<Point> reps;   // deduplicated representatives, lexicographic
    double value = 0.0;        // field value (constant along the component)
    std::vector<double> hessian_spectrum;  // at the first representative
    bool degenerate = false;   // continuum, or kernel eigenvalue at a rep
    double distance_to_Z = 0.0;
};

struct CriticalSet {
    std::vector<CriticalComponent> components;
    int failed_seeds = 0;      // Newton non-convergence count (non-fatal)

    /// The isolated Morse points, one CriticalPoint per nondegenerate
    /// singleton component.
    std::vector<CriticalPoint> points() const;
    bool has_degenerate() const;
};

/// Multi-start damped Newton on grad f from the problem's seed grid, with
/// cluster deduplication and component detection.
CriticalSet find_critical_points(const ScalarField& f, const ProblemDef& p);

/// Same search from an explicit seed list (used for grid-refinement tests).
CriticalSet find_critical_points(const ScalarField& f, const ProblemDef& p,
                                 const std::vector<Point>& seeds,
                                 double connect_threshold = -1);

enum class Verdict { Pass, HypothesisViolated, BoundViolated };

std::string to_string(Verdict v);

/// Outcome of the cuplength lower-bound verification.
struct TheoremReport {
    double norm_hF = 0.0;
    bool norm_certified = true;
    double gap = 0.0;          // ignored when gap_infinite
    bool gap_infinite = false;
    bool applicable = false;   // norm_hF < gap
    int required = 0;          // cuplength(Z) + 1
    int found_total = 0;
    int found_in_window = 0;
    double window = 0.0;       // the interval is [-window, window]
    Verdict verdict = Verdict::HypothesisViolated;
    bool advisory = false;     // degenerate critical sets or uncertified norm
    std::string advisory_reason;
    std::vector<CriticalPoint> critical_points;        // all isolated points of h
    std::vector<CriticalComponent> degenerate_components;
};

/// Top-level Morse-Bott cuplength verification: computes ||h - F||, the
/// spectral gap, cuplength(Z), enumerates Crit h and counts critical values
/// inside the closed window [-||h-F||, ||h-F||] (with +window_slack so
/// floating-point boundary cases cannot flip verdicts).
TheoremReport verify_cuplength_bound(const ProblemDef& p);

}  // namespace morse
