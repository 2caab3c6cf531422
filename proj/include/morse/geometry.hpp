#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace morse {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A chart representative of a point on T^p x R^q.  The first p entries are
/// toroidal and, once normalized, lie in [0, period_i).
struct Point {
    std::vector<double> c;

    Point() = default;
    explicit Point(std::vector<double> coords) : c(std::move(coords)) {}

    std::size_t dim() const { return c.size(); }
    double operator[](std::size_t i) const { return c[i]; }
    double& operator[](std::size_t i) { return c[i]; }
};

/// Flat product manifold T^p x R^q with per-axis torus periods.
/// All quantitative work in this library happens on these models: the metric,
/// normal bundles of coordinate subtori, and tubular neighborhoods are exact.
class ManifoldModel {
public:
    ManifoldModel(int torus_dims, int euclidean_dims, std::vector<double> periods);

    int torus_dims() const { return p_; }
    int euclidean_dims() const { return q_; }
    int dim() const { return p_ + q_; }
    bool is_toroidal(int i) const { return i < p_; }
    double period(int i) const { return periods_[static_cast<std::size_t>(i)]; }

    /// Reduce toroidal entries mod period into [0, period); Euclidean entries
    /// pass through.  Errors on dimension mismatch.
    Point normalize(const std::vector<double>& raw) const;
    Point normalize(const Point& x) const { return normalize(x.c); }

    /// Shortest signed representative of (a - b) along axis i; for toroidal
    /// axes this is the wraparound difference in (-period/2, period/2].
    double wrap_diff(int i, double a, double b) const;

    /// Flat product metric distance with shortest toroidal wraparound.
    double distance(const Point& a, const Point& b) const;

private:
    int p_;
    int q_;
    std::vector<double> periods_;

    void check_dim(std::size_t n) const;
};

/// A coordinate subtorus Z = {x : x_j = v_j for j in pinned}.  Compactness of
/// Z requires every free axis to be toroidal; this is checked on construction
/// against the manifold.
class SubmanifoldSpec {
public:
    SubmanifoldSpec(std::vector<int> pinned_indices, std::vector<double> pinned_values);

    const std::vector<int>& pinned_indices() const { return pinned_; }
    const std::vector<double>& pinned_values() const { return values_; }
    bool is_pinned(int i) const;
    double pinned_value(int axis) const;

    /// Indices of the free (intrinsic) coordinates, ascending.
    std::vector<int> free_indices(const ManifoldModel& m) const;
    int codim() const { return static_cast<int>(pinned_.size()); }
    int dim(const ManifoldModel& m) const { return m.dim() - codim(); }

    void validate(const ManifoldModel& m) const;

    /// Distance from x to the nearest point of Z (componentwise wraparound
    /// over the pinned axes; exact on flat models).
    double distance_to(const ManifoldModel& m, const Point& x) const;

    /// The intrinsic model of Z itself: a torus built from the free axes.
    ManifoldModel intrinsic_manifold(const ManifoldModel& m) const;

    /// Embed intrinsic coordinates of Z into the ambient model.
    Point embed(const ManifoldModel& m, const std::vector<double>& z_coords) const;

    /// Drop pinned coordinates of an ambient point.
    std::vector<double> project(const ManifoldModel& m, const Point& x) const;

private:
    std::vector<int> pinned_;
    std::vector<double> values_;
};

}  // namespace morse
