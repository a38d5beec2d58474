#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kron/rng.hpp"

namespace kron {

/// Parameter space of the randomized-box experiment.
///
/// side_ranges[i] = (v_i, w_i) bounds the box half-sides, 0 < v_i < w_i < 1/2.
/// eta bounds the shear matrix entries around the identity; eta < 1/(4d) keeps
/// the sampler's rejection rate bounded and |kbar_i| comparable with |k_i|.
/// eta == 0 is admitted as the degenerate no-shear configuration.
struct ExperimentConfig {
    int d = 1;
    std::vector<std::pair<double, double>> sideRanges; // (v_i, w_i)
    double eta = 0.1;
    double epsilon = 0.5; // resonance cutoff
    double delta = 0.2;   // exponent margin in (0,1)
    std::uint64_t seed = 0;

    void validate() const; // throws ConfigError naming the violated bound

    /// Load from a JSON file with keys
    /// dimension, side_ranges, eta, epsilon, delta, seed.
    static ExperimentConfig fromJsonFile(const std::string& path);
    std::string toJson() const;
};

/// d x d matrix in G_eta with det == 1, row-major.
struct ShearMatrix {
    int d = 0;
    std::vector<double> a; // row-major, size d*d

    static ShearMatrix identity(int d);

    double at(int i, int j) const { return a[static_cast<size_t>(i) * d + j]; }
    double& at(int i, int j) { return a[static_cast<size_t>(i) * d + j]; }

    std::vector<double> apply(const std::vector<double>& v) const;  // M v
    std::vector<double> solve(std::vector<double> rhs) const;       // M^{-1} rhs
    double det() const;
};

/// One random parameter tuple xi = (u, M, alpha, x).
/// alpha and x are canonical lifts in [0,1)^d and are never re-reduced;
/// every lift-sensitive quantity goes through signed_nearest_distance.
struct SampleXi {
    std::vector<double> u;     // box half-sides
    ShearMatrix shear;
    std::vector<double> alpha; // frequency, canonical lift in [0,1)
    std::vector<double> x;     // base point, canonical lift in [0,1)

    int d() const { return static_cast<int>(u.size()); }
};

/// Integer frequency with its shear image.
struct FreqVector {
    std::vector<long long> k;
    std::vector<double> kbar;
};

/// Draw xi deterministically from (config.seed, sampleIndex).
SampleXi sample_xi(const ExperimentConfig& config, std::uint64_t sampleIndex);

/// kbar_i = sum_j a_ij k_j.
std::vector<double> dual_frequency(const ShearMatrix& shear, const std::vector<long long>& k);

struct SignedDistance {
    double theta; // t + m in (-1/2, 1/2]
    long long m;  // nearest-integer witness
};

/// Signed distance of t to the nearest integer; tie at 1/2 resolves to +1/2.
SignedDistance signed_nearest_distance(double t);

namespace stream_tag {
constexpr std::uint64_t sides = 0;
constexpr std::uint64_t shear = 1;
constexpr std::uint64_t alpha = 2;
constexpr std::uint64_t base = 3;
constexpr std::uint64_t haar = 4;
constexpr std::uint64_t mc = 5;
} // namespace stream_tag

/// Shear sampler used by sample_xi, exposed for lattice-side samplers.
ShearMatrix sample_shear(int d, double eta, Rng& rng);

} // namespace kron
