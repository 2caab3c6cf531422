#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "morse/zmorse.hpp"

namespace morse {

/// Dense matrix over the two-element field.
class GF2Matrix {
public:
    GF2Matrix() = default;
    GF2Matrix(int rows, int cols) : r_(rows), c_(cols), a_(static_cast<std::size_t>(rows * cols), 0) {}

    int rows() const { return r_; }
    int cols() const { return c_; }
    std::uint8_t at(int i, int j) const { return a_[static_cast<std::size_t>(i * c_ + j)]; }
    void set(int i, int j, std::uint8_t v) { a_[static_cast<std::size_t>(i * c_ + j)] = v & 1; }

    GF2Matrix multiply(const GF2Matrix& other) const;
    bool is_zero() const;
    int rank() const;

private:
    int r_ = 0, c_ = 0;
    std::vector<std::uint8_t> a_;
};

/// Mod-2 Morse chain complex of a Morse function on Z.  The differential
/// lowers index by one; entry (i, j) is the parity of connecting orbits from
/// generator i down to generator j.
struct MorseComplexZ2 {
    struct Generator {
        std::vector<double> u;  // intrinsic coordinates on Z
        int index = 0;
        double value = 0.0;
    };
    std::vector<Generator> generators;  // sorted by (index, coordinates)
    GF2Matrix differential;             // generators x generators
    int z_dim = 0;

    bool differential_squared_zero() const { return differential.multiply(differential).is_zero(); }
    int count_of_index(int k) const;
    void dump(std::ostream& os) const;
};

/// Builds the complex by flow counting: critical points from multi-start
/// Newton, orbit parities from descent probes launched off small spheres in
/// unstable directions.  Orbit counts between indices (k, k-1) run on
/// whichever of f / -f offers a probe domain of dimension at most 1 (the
/// connecting orbits are shared, time-reversed).
MorseComplexZ2 build_complex(const ZMorseFunction& f, const ProblemDef& p);

/// Mod-2 Betti numbers by rank-nullity over the index-graded blocks.
std::vector<int> betti(const MorseComplexZ2& c);

/// Catalog closed form: cuplength of the subtorus T^d is d.
int cuplength(const SubmanifoldSpec& z, const ManifoldModel& m);

/// One cohomology-class slot of the pairing: a Morse function on Z together
/// with a named critical point representing the class.
struct PairingClass {
    ZMorseFunction f;
    std::vector<double> target_u;
};

struct PairingResult {
    int parity = 0;
    std::vector<std::vector<double>> witnesses;
};

/// The R = 0 cohomology operation: counts (mod 2) points of Z lying in every
/// named stable manifold of the a-classes, the unstable manifold of x_minus
/// and the stable manifold of x_plus under f_star.  Membership is decided by
/// flow convergence; isolated solutions come from grid bisection on Z.
PairingResult theta0_pairing(const ProblemDef& p, const std::vector<PairingClass>& a_classes,
                             const ZMorseFunction& f_star, const std::vector<double>& x_minus,
                             const std::vector<double>& x_plus, int grid = 64);

struct CohomologyProfile {
    std::vector<int> betti;
    int cuplength = 0;
    std::string source;  // "catalog closed form" | "numerical complex"
    int euler_characteristic() const;
};

CohomologyProfile catalog_profile(const SubmanifoldSpec& z, const ManifoldModel& m);
CohomologyProfile numerical_profile(const ZMorseFunction& f, const ProblemDef& p);

}  // namespace morse
