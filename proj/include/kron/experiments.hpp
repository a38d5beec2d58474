#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kron/lattice.hpp"
#include "kron/params.hpp"
#include "kron/stats.hpp"

namespace kron {

enum class ExperimentKind {
    cauchy_limit,
    poisson_process,
    lattice_consistency,
    rogers,
    multiplicity,
    smallbox,
    continuous,
    gamma_constant,
};

const char* to_string(ExperimentKind kind);

/// Reasonable defaults for a dimension: wide side ranges, eta below 1/(4d).
ExperimentConfig default_config(int d);

struct ExperimentPlan {
    ExperimentKind kind = ExperimentKind::cauchy_limit;
    ExperimentConfig config;
    std::vector<long long> nList;
    long long sampleCount = 1;
    int workers = 1;
    std::string outputDir; // empty: no files written
    double gamma = 0.0;            // smallbox only
    std::vector<double> tList;     // continuous only
    std::vector<long long> mList;  // multiplicity only

    void validate() const;
    std::string canonicalJson() const;
    std::uint64_t planHash() const;
};

// --- per-kind reports; runners also write CSV/JSON artifacts when outputDir is set

struct CauchyPerN {
    long long N = 0;
    double ks = 0.0;       // KS of D/(rho ((1-d gamma) ln N)^d) against standard Cauchy
    double rhoRatio = 0.0; // fitted scale / rho(d)
};

struct CauchyReport {
    std::vector<CauchyPerN> perN;
    double gamma = 0.0;
    /// KS non-increasing along the N-list within +slack?
    bool ksMonotone(double slack) const;
};

struct PoissonReport {
    PoissonTestReport counts;
    MarkTestReport marks;
    double splitFraction = 0.0; // fraction of samples sqrt(ln N)-split
    long long termTotal = 0;
    double predictedMean = 0.0;
    // Theta-marginal Cauchy reconstruction: D7/((ln N)^d (1-delta)^d) vs Cauchy(rho(d))
    double cauchyKs = 0.0;
    double rhoRatio = 0.0;
};

struct ConsistencyReport {
    long long samples = 0;
    long long mismatches = 0;
};

struct RogersRunReport {
    std::vector<RogersReport> sl2Boxes;
    RogersReport sl2Pair;       // disjoint-box second test function
    RogersReport dim3;
    double dim3RelErr = 0.0;    // |E[F] - c1 vol| / (c1 vol)
};

struct MultiplicityRunReport {
    std::vector<MultiplicityReport> perM;
};

struct ContinuousReport {
    std::vector<double> tList;
    std::vector<double> ksConsecutive; // two-sample KS between consecutive T
    std::vector<double> p99;           // 99th percentile of |D| per T
};

struct GammaConstReport {
    struct PerD {
        int d = 0;
        double rhoIdentityErr = 0.0; // |rho(d) - reconstruction|
        double gammaMean = 0.0;      // Monte Carlo E|Gamma| over uniform marks
        double gammaTarget = 0.0;    // zeta(d+1) (2/pi)^{d+2}
        double phiOracleMaxErr = 0.0;
    };
    std::vector<PerD> perD;
};

CauchyReport run_cauchy_limit(const ExperimentPlan& plan);
PoissonReport run_poisson_process(const ExperimentPlan& plan);
ConsistencyReport run_lattice_consistency(const ExperimentPlan& plan);
RogersRunReport run_rogers(const ExperimentPlan& plan);
MultiplicityRunReport run_multiplicity(const ExperimentPlan& plan);
ContinuousReport run_continuous(const ExperimentPlan& plan);
GammaConstReport run_gamma_constant(const ExperimentPlan& plan);

/// Dispatch on plan.kind; returns process exit code (0 iff the kind's
/// configured assertions pass) and prints a one-line summary per assertion.
int run_experiment(const ExperimentPlan& plan);

} // namespace kron
