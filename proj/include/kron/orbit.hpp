#pragma once

#include <vector>

#include "kron/params.hpp"

namespace kron {

/// Linear-flow segment on the torus: t -> x + v t, t in [0, T].
struct ContinuousLineSpec {
    std::vector<double> v; // flow direction, nonzero
    std::vector<double> x; // start point, lift in [0,1)^d
    double T = 0.0;        // time horizon, > 0

    void validate() const;
};

/// True iff p (lift in [0,1)^d) lies in the closed sheared box M C_u on the torus.
bool box_contains(const SampleXi& xi, const std::vector<double>& p);

/// #{1 <= m <= N : x + m alpha mod 1 in M C_u} - 2^d (prod u_i) N.
/// The visit count is accumulated in exact integer arithmetic.
double discrepancy_direct(const SampleXi& xi, long long N);

/// Same with half-sides u_i / N^gamma; gamma = 0 reproduces discrepancy_direct
/// bitwise.  Requires 0 <= gamma < 1/d.
double discrepancy_smallbox(const SampleXi& xi, long long N, double gamma);

/// Continuous-time discrepancy for the one-sided box A (prod_j (0,u_j)):
/// int_0^T chi(x + v t mod 1 in C) dt - T prod_j u_j, computed exactly as a
/// sum of slab-intersection intervals over integer translates.
double discrepancy_continuous_box(const ContinuousLineSpec& spec, const ShearMatrix& shear,
                                  const std::vector<double>& u);

/// Continuous-time discrepancy for the ball B(0,r) in T^3 (exact chord times).
double discrepancy_continuous_ball(const ContinuousLineSpec& spec, double r);

} // namespace kron
