#pragma once

#include <functional>
#include <vector>

#include "morse/zmorse.hpp"

namespace morse {

/// Counts isolated common zeros of a set of wrapped deviation functions over
/// a parameter torus of dimension 1 or 2.
///
/// devs(u) returns one wrapped deviation per condition (each in
/// (-period/2, period/2] of its own wall axis).  The first dim(domain)
/// conditions locate candidate zeros; any remaining conditions must also
/// vanish there for the candidate to count.  Fewer conditions than the domain
/// dimension means the solution set is positive-dimensional, which counts as
/// parity 0 by the mod-2 convention for non-0-dimensional sets.
struct ZeroCount {
    int parity = 0;
    std::vector<std::vector<double>> roots;
    bool positive_dimensional = false;
};

using DevFn = std::function<std::vector<double>(const std::vector<double>&)>;

ZeroCount count_isolated_zeros(const ManifoldModel& domain, const DevFn& devs, int n_conditions,
                               int grid, const Tolerances& tol);

}  // namespace morse
