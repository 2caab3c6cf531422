#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "morse/flow.hpp"
#include "morse/topology.hpp"

namespace morse {

/// A solved element of the continuation moduli space: a flow line of the
/// homotopy functional with both asymptotic ends on Z.  The catalog pins Z as
/// the minimum set of F, so backward asymptotics reduce to gamma(-1) = z0 and
/// the whole space fibers over Z through the shoot parameter.
struct ModuliElement {
    double r = 0.0;
    Trajectory trajectory;
    Point backward_limit;
    Point forward_limit;
    Point shoot_param;  // z0, ambient coordinates
    WindowDiagnostics diagnostics;
};

struct ModuliRejection {
    Point seed;
    std::string reason;
};

struct ModuliBatch {
    std::vector<ModuliElement> accepted;
    std::vector<ModuliRejection> rejected;
    double norm_hF = 0.0;
};

/// Shoots gamma(-1) = z0 forward across the homotopy window and the F-tail
/// for every seed; accepts elements whose forward limit lands on Z and whose
/// trajectory passes the window diagnostics with no violations.
ModuliBatch solve_moduli(const ProblemDef& p, const BumpFamily& b,
                         const std::vector<Point>& z_seeds);

/// The evaluation map: interpolated trajectory samples at s = r, 2r, ..., kr.
std::vector<Point> evaluate_points(const ProblemDef& p, const BumpFamily& b,
                                   const ModuliElement& e, int k);

/// One cochain-slot constraint for the constrained moduli space: the
/// evaluation point at s = i*r must lie in the stable manifold of `target`
/// under the ambient extension of f.
struct MorseConstraint {
    ZMorseFunction f;
    std::vector<double> target_u;  // intrinsic coordinates of the named point
};

/// Endpoint conditions through f_star: gamma(-inf) in W^u(x_minus),
/// gamma(+inf) in W^s(x_plus).
struct StarConstraint {
    ZMorseFunction f;
    std::vector<double> x_minus_u;
    std::vector<double> x_plus_u;
};

struct ModuliWitness {
    std::vector<double> z_u;  // intrinsic shoot parameter
    Trajectory trajectory;
};

struct ConstrainedCount {
    int parity = 0;
    std::vector<ModuliWitness> witnesses;
};

/// Counts (mod 2) the isolated shoot parameters solving every constraint, by
/// sign-change bisection over a Z grid; witnesses carry their trajectories.
/// Throws NonTransverseError when a solution sits on a cell boundary.
ConstrainedCount constrained_count(const ProblemDef& p, const BumpFamily& b,
                                   const std::vector<MorseConstraint>& constraints,
                                   const StarConstraint& star, int grid = 64);

/// One extracted limit point of the breaking chain.
struct ChainPoint {
    Point location;      // polished critical point of h (ambient, normalized)
    double h_value = 0.0;
    double grad_norm = 0.0;
    double window_s = 0.0;   // where along the witness it was extracted
    Point raw_location;      // the windowed argmin before polishing
};

/// The r -> infinity breaking structure: y0+, y1-, y1+, ..., y_{k+1}- with
/// non-increasing h-values; strictness is recorded per consecutive link.
struct BreakingChain {
    std::vector<double> r_sequence;
    std::vector<ChainPoint> limit_points;
    std::vector<bool> strict;
    std::vector<std::vector<double>> per_r_values;  // h-values of the chain at each r
};

/// Follows a constrained witness along the r-sequence and extracts the chain
/// at the largest r: windowed |grad h| minima around s = j*r, polished onto
/// genuine critical points of h (interior pairs by h-flow in the matching
/// direction, endpoint windows by damped Newton).
BreakingChain breaking_analysis(const ProblemDef& p, int k, const std::vector<double>& r_sequence,
                                std::uint64_t rng_seed);

}  // namespace morse
