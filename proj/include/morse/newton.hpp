#pragma once

#include <vector>

#include "morse/expr.hpp"
#include "morse/geometry.hpp"

namespace morse {

struct RootResult {
    std::vector<double> x;  // cover coordinates
    double grad_norm = 0.0;
    int iters = 0;
    bool converged = false;
};

/// Damped Newton (Levenberg-Marquardt on |grad f|^2) for roots of grad f.
/// Handles the singular Hessians that arise along Morse-Bott continua: the
/// damping keeps kernel directions untouched so seeds stay spread along a
/// critical submanifold.
RootResult find_gradient_root(FieldWorkspace& ws, const std::vector<double>& seed,
                              double grad_tol, int max_iter);

}  // namespace morse
