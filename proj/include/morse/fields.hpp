#pragma once

#include <cstdint>
#include <vector>

#include "morse/problem.hpp"

namespace morse {

struct FdCheckResult {
    double max_grad_rel_err = 0.0;
    double max_hess_rel_err = 0.0;
};

/// Worst relative error of the forward-mode gradient and Hessian against
/// central differences over random points (step tol.fd_step).  Relative error
/// uses denominator max(1, |reference|).
FdCheckResult fd_check(const ScalarField& f, const ManifoldModel& m, int samples,
                       std::uint64_t seed, const Tolerances& tol = {});

struct OscillationResult {
    double norm = 0.0;  // sup - inf
    double sup = 0.0;
    double inf = 0.0;
    Point arg_sup;
    Point arg_inf;
    bool certified = true;  // refinement converged away from the sampling box edge
};

/// Oscillation seminorm ||f|| = sup f - inf f via a dense grid (tol.osc_grid
/// per axis) followed by local refinement of both extrema.
OscillationResult oscillation(const ScalarField& f, const ManifoldModel& m,
                              const Tolerances& tol = {});

struct SpectralGapResult {
    bool infinite = false;
    double value = 0.0;
    int critical_components = 0;  // components of Crit F away from Z
    int failed_seeds = 0;
    bool degenerate_warning = false;
};

/// Spectral gap of F with respect to Z: the infimum of |F| over critical
/// components other than Z, infinite when none exist.
SpectralGapResult spectral_gap(const ProblemDef& p);

struct MorseBottReport {
    bool pass = false;
    std::vector<double> transverse_eigenvalues;  // at the first sample, ascending
    double min_abs_transverse = 0.0;
    double max_tangential = 0.0;  // largest |entry| of tangential/mixed blocks
    Point worst_sample;
    std::string message;
};

/// Checks ker Hess_z F = T_z Z along a sample of Z: the normal-normal block
/// must be definite away from 0 and the tangential blocks must vanish.
MorseBottReport morse_bott_verify(const ProblemDef& p, int samples_per_axis = 13);

}  // namespace morse
