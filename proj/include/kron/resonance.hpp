#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kron/params.hpp"

namespace kron {

/// One small denominator k with its dual, normalized denominator and marks.
///
/// theta is the signed distance of (k,alpha) to the nearest integer, m the
/// witness; Theta = (ln N)^d (prod kbar_i) theta.  Marks are the lift-invariant
/// quantities: parityMark = N theta mod 2, sideMarks_i = {kbar_i u_i},
/// phaseMark = {(k,x) + (N-1) theta / 2}.  Gamma sums the contribution of all
/// multiples of k through the series phi.
struct ResonantTerm {
    std::vector<long long> k;
    std::vector<double> kbar;
    long long m = 0;
    double theta = 0.0;
    double Theta = 0.0;
    double parityMark = 0.0;            // in [0,2)
    std::vector<double> sideMarks;      // each in [0,1)
    double phaseMark = 0.0;             // in [0,1)
    double Gamma = 0.0;
};

/// The finite resonant point set of one sample xi at time N.
struct PointProcessSample {
    std::vector<ResonantTerm> terms; // sorted lexicographically by k
    long long N = 0;
    int d = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    double logNd = 0.0; // (ln N)^d
};

/// Single Fourier term U_k of the box indicator, evaluated through the signed
/// nearest distance so the Dirichlet factor stays stable near resonance.
double fourier_term(const SampleXi& xi, long long N, const std::vector<long long>& k);

enum class TruncationStage { D1, D2, D3, D4, D5 };

/// Partial sums D1..D5 over the truncation-chain index sets.  Diagnostic use
/// at small N only; stages D1-D3 refuse N > 1e5 and any stage refuses an
/// enumeration cube beyond ~2.5e8 candidates.
double truncated_sum(const SampleXi& xi, long long N, TruncationStage stage, double epsilon,
                     double delta);

/// Frequencies of the given stage's index set (for nesting/diagnostic tests).
std::vector<std::vector<long long>> truncation_stage_set(const SampleXi& xi, long long N,
                                                         TruncationStage stage, double epsilon,
                                                         double delta);

/// Exact Z(xi,N) membership + full term construction for one frequency.
/// Both enumeration routes (brute force and lattice flow) go through this, so
/// agreeing on the set implies agreeing on every field.
std::optional<ResonantTerm> resonant_term_if_member(const SampleXi& xi, long long N,
                                                    const std::vector<long long>& k,
                                                    double epsilon, double delta);

enum class EnumMode { bruteforce, latticeflow };

/// All k with kbar_1 > 0, |kbar_i| >= 1, prod|kbar_i| < N^{1-delta},
/// prod|kbar_i| |theta| <= 1/(eps (ln N)^d) and gcd(k_1..k_d, m) = 1.
/// bruteforce scans the frequency cube (N <= 1e4); latticeflow delegates to
/// the Cartan-flow scan of the lattice module (d = 2).
PointProcessSample enumerate_resonant_set(const SampleXi& xi, long long N, EnumMode mode,
                                          double epsilon, double delta);

/// phi(eta_1..eta_d, eta_{d+1}, eta_{d+2})
///   = sum_j [prod_i sin(2 pi j eta_i)] sin(pi j eta_{d+1}) cos(2 pi j eta_{d+2}) / j^{d+1}.
/// For d <= 2 the series is evaluated in closed form through the Fourier
/// expansions of the Bernoulli polynomials (the tail-bound truncation level
/// (d*tol)^{-1/d} is ~1e10 for d = 1 at the default tolerance); for d >= 3 a
/// truncated summation at that level is used.
double phi_series(const std::vector<double>& eta, double tolerance = 1e-10);

/// D7 = (ln N)^d (2/pi^{d+1}) sum Gamma_k / Theta_k.
double resonant_discrepancy(const PointProcessSample& sample);

/// A-splitness of the term times t_i = ln|kbar_i| (d = 2).
bool check_splitness(const PointProcessSample& sample, double A);

/// One row per term: k, kbar, theta, Theta, parityMark, sideMarks, phaseMark, Gamma.
void write_csv(const PointProcessSample& sample, std::ostream& out);
std::string to_json_summary(const PointProcessSample& sample);

} // namespace kron
