#include "morse/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace morse {

ManifoldModel::ManifoldModel(int torus_dims, int euclidean_dims, std::vector<double> periods)
    : p_(torus_dims), q_(euclidean_dims), periods_(std::move(periods)) {
    if (p_ < 0 || q_ < 0 || p_ + q_ < 1)
        throw Error("manifold must have at least one dimension");
    if (static_cast<int>(periods_.size()) != p_)
        throw Error("expected one period per torus dimension");
    for (double per : periods_)
        if (!(per > 0.0)) throw Error("periods must be positive");
}

void ManifoldModel::check_dim(std::size_t n) const {
    if (static_cast<int>(n) != dim())
        throw Error("dimension mismatch: expected " + std::to_string(dim()) +
                    " coordinates, got " + std::to_string(n));
}

Point ManifoldModel::normalize(const std::vector<double>& raw) const {
    check_dim(raw.size());
    Point out(raw);
    for (int i = 0; i < p_; ++i) {
        double per = periods_[static_cast<std::size_t>(i)];
        double v = std::fmod(out.c[static_cast<std::size_t>(i)], per);
        if (v < 0.0) v += per;
        if (v >= per) v = 0.0;  // fmod rounding at the seam
        out.c[static_cast<std::size_t>(i)] = v;
    }
    return out;
}

double ManifoldModel::wrap_diff(int i, double a, double b) const {
    double d = a - b;
    if (!is_toroidal(i)) return d;
    double per = periods_[static_cast<std::size_t>(i)];
    d = std::fmod(d, per);
    if (d > per / 2) d -= per;
    if (d <= -per / 2) d += per;
    return d;
}

double ManifoldModel::distance(const Point& a, const Point& b) const {
    check_dim(a.dim());
    check_dim(b.dim());
    double s2 = 0.0;
    for (int i = 0; i < dim(); ++i) {
        double d = wrap_diff(i, a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)]);
        s2 += d * d;
    }
    return std::sqrt(s2);
}

SubmanifoldSpec::SubmanifoldSpec(std::vector<int> pinned_indices, std::vector<double> pinned_values)
    : pinned_(std::move(pinned_indices)), values_(std::move(pinned_values)) {
    if (pinned_.size() != values_.size())
        throw Error("pinned indices and values must have equal length");
    std::vector<int> sorted = pinned_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw Error("duplicate pinned index");
}

bool SubmanifoldSpec::is_pinned(int i) const {
    return std::find(pinned_.begin(), pinned_.end(), i) != pinned_.end();
}

double SubmanifoldSpec::pinned_value(int axis) const {
    for (std::size_t k = 0; k < pinned_.size(); ++k)
        if (pinned_[k] == axis) return values_[k];
    throw Error("axis is not pinned");
}

std::vector<int> SubmanifoldSpec::free_indices(const ManifoldModel& m) const {
    std::vector<int> free;
    for (int i = 0; i < m.dim(); ++i)
        if (!is_pinned(i)) free.push_back(i);
    return free;
}

void SubmanifoldSpec::validate(const ManifoldModel& m) const {
    for (int j : pinned_)
        if (j < 0 || j >= m.dim()) throw Error("pinned index out of range");
    // Compactness: every free axis must be toroidal.
    for (int i : free_indices(m))
        if (!m.is_toroidal(i))
            throw Error("Z is not compact: free Euclidean axis " + std::to_string(i));
}

double SubmanifoldSpec::distance_to(const ManifoldModel& m, const Point& x) const {
    if (static_cast<int>(x.dim()) != m.dim()) throw Error("dimension mismatch");
    double s2 = 0.0;
    for (std::size_t k = 0; k < pinned_.size(); ++k) {
        double d = m.wrap_diff(pinned_[k], x[static_cast<std::size_t>(pinned_[k])], values_[k]);
        s2 += d * d;
    }
    return std::sqrt(s2);
}

ManifoldModel SubmanifoldSpec::intrinsic_manifold(const ManifoldModel& m) const {
    validate(m);
    std::vector<double> periods;
    for (int i : free_indices(m)) periods.push_back(m.period(i));
    return ManifoldModel(static_cast<int>(periods.size()), 0, periods);
}

Point SubmanifoldSpec::embed(const ManifoldModel& m, const std::vector<double>& z_coords) const {
    std::vector<int> free = free_indices(m);
    if (z_coords.size() != free.size()) throw Error("dimension mismatch");
    std::vector<double> out(static_cast<std::size_t>(m.dim()), 0.0);
    for (std::size_t k = 0; k < pinned_.size(); ++k)
        out[static_cast<std::size_t>(pinned_[k])] = values_[k];
    for (std::size_t k = 0; k < free.size(); ++k)
        out[static_cast<std::size_t>(free[k])] = z_coords[k];
    return Point(out);
}

std::vector<double> SubmanifoldSpec::project(const ManifoldModel& m, const Point& x) const {
    std::vector<double> out;
    for (int i : free_indices(m)) out.push_back(x[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace morse
