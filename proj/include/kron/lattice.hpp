#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kron/dd.hpp"
#include "kron/params.hpp"
#include "kron/resonance.hpp"

namespace kron {

/// Determinant-one lattice basis; columns generate the lattice.
///
/// Entries are kept in double-double precision: Cartan-flow images are skewed
/// by factors up to e^{30+}, and recovering their O(1)-sized region vectors
/// requires the cancellations k alpha + l beta + m to survive.
struct UnimodularLattice {
    int dim = 0;
    std::vector<dd> B; // row-major dim x dim

    dd at(int i, int j) const { return B[static_cast<size_t>(i) * dim + j]; }
    dd& at(int i, int j) { return B[static_cast<size_t>(i) * dim + j]; }

    static UnimodularLattice identity(int dim);
    double det() const;

    /// CSV, row-major, 16 significant digits.
    void writeCsv(std::ostream& out) const;
};

/// Cartan direction (t_1..t_d), componentwise nonnegative.
struct FlowTime {
    std::vector<double> t;
    void validate() const;
};

/// Cusp region of the flow picture (d = 2):
///   x in I = (1,e],  y in J = [-e,-1) u (1,e],  xyz in K = [-kappa, kappa],
/// with kappa = 1/(eps M^2), M = floor(ln N).  kappaBand optionally restricts
/// the xyz test to a signed sub-interval of K for partition tests.
struct RegionSpec {
    long long M = 0;
    double kappa = 0.0;
    std::optional<std::pair<double, double>> kappaBand;

    static RegionSpec fromEpsilonM(double epsilon, long long M);
};

/// Lambda(xi): shear in the top-left d x d block, alpha in the last row.
UnimodularLattice lambda_matrix(const SampleXi& xi);

/// Left-multiplication by diag(e^{-t_1}, ..., e^{-t_d}, e^{sum t_i}).
UnimodularLattice cartan_flow(const FlowTime& t, const UnimodularLattice& L);

struct RegionVector {
    std::array<long long, 3> coeff; // integer coordinates in the given basis
    double x = 0.0, y = 0.0, z = 0.0;
    double xyz = 0.0;
};

struct RegionCount {
    long long count = 0;
    std::vector<RegionVector> vectors; // sorted by coeff
};

/// All primitive lattice vectors in the cusp region (exact enumeration:
/// LLL-reduce, then Fincke-Pohst over the bounding ellipsoid with margins;
/// final membership decided by the exact half-open predicates).
RegionCount count_region_vectors(const UnimodularLattice& L, const RegionSpec& region);

/// Per region vector: (M^2 xyz, b z mod 2).
std::vector<std::pair<double, double>> psi_marks(const UnimodularLattice& L, double b,
                                                 const RegionSpec& region);

/// Number of grid cells flow_scan visits for (N, delta).
long long flow_grid_cell_count(long long N, double delta);

/// Lattice-flow backend of enumerate_resonant_set (d = 2): scans the integer
/// Cartan grid, recovers candidate frequencies from cusp visits, then filters
/// through the exact Z(xi,N) membership shared with the brute-force route.
PointProcessSample flow_scan(const SampleXi& xi, long long N, double epsilon, double delta);

/// Exact Haar sample on SL_2(R)/SL_2(Z) via the modular fundamental domain.
UnimodularLattice sl2_haar_sample(Rng& rng);

/// Approximately Haar-distributed 3-dimensional lattice g_T h Lambda(xi):
/// random unipotent word pushed by a random Cartan time.  Accuracy is
/// assessed empirically by the Rogers moment tests, not certified.
UnimodularLattice approx_haar_sample(Rng& rng, int dim);

using LatticeSampler = std::function<UnimodularLattice(Rng&)>;

/// Indicator box test function, a product of closed intervals.
struct BoxTestFn {
    std::vector<std::pair<double, double>> intervals;

    int dim() const { return static_cast<int>(intervals.size()); }
    double volume() const;
    double symmetricOverlapVolume() const; // vol(box intersect -box)
    bool contains(const std::vector<dd>& v) const;
};

struct MomentEstimate {
    double estimate = 0.0;
    double stderrEst = 0.0;
    double prediction = 0.0;
    double zscore() const;
};

struct RogersReport {
    long long samples = 0;
    MomentEstimate meanF;            // vs c1 int f
    MomentEstimate meanFsq;          // vs c1 int f^2 + c1 int f(x)f(-x) + c2 (int f)^2
    std::optional<MomentEstimate> meanFbar; // vs c2 int f1 int f2
    std::string toJson() const;
};

/// Monte Carlo first/second-moment check of the Rogers identities.
RogersReport rogers_mc(const LatticeSampler& sampler, const BoxTestFn& f1,
                       const std::optional<BoxTestFn>& f2, long long samples, Rng& rng);

struct MultiplicityReport {
    long long samples = 0;
    long long M = 0;
    MomentEstimate meanPhi;       // vs c1 4/(eps M^2)
    MomentEstimate meanPhiSqExc;  // E[Phi^2 - Phi] vs c2 (4 kappa)^2
    double probMultiple = 0.0;    // P(Phi > 1)
    double probMultipleStderr = 0.0;
    std::string toJson() const;
};

/// Monte Carlo multiple-solution statistics of the cusp counter.
MultiplicityReport multiple_solution_stats(const LatticeSampler& sampler,
                                           const RegionSpec& region, long long samples,
                                           Rng& rng);

} // namespace kron
