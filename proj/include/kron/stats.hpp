#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kron/rng.hpp"

namespace kron {

/// Sorted sample container with CDF/quantile/KS queries.
struct EmpiricalDistribution {
    std::vector<double> samples; // ascending
    explicit EmpiricalDistribution(std::vector<double> xs);

    int n() const { return static_cast<int>(samples.size()); }
    double cdf(double x) const;
    /// Linearly interpolated order-statistic quantile, p in [0,1].
    double quantile(double p) const;
    /// CSV rows "value,Fhat".
    void writeCsv(std::ostream& out) const;
};

/// Standard Cauchy CDF, arctan(z)/pi + 1/2.
double cauchy_cdf(double z);

/// Limit scale rho(d) = (1/d!)(2/pi)^{2d+2}.
double rho_constant(int d);

/// Two-sided KS distance sup |Fhat - cdf| via the order-statistic formula.
double ks_statistic(const EmpiricalDistribution& emp, const std::function<double(double)>& cdf);

/// Two-sample KS distance between empirical CDFs.
double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// Asymptotic one-sample KS critical value at significance alpha (e.g. 0.01).
double ks_critical(int n, double alpha);

/// Half the interquartile range; equals the scale for a centered Cauchy.
double cauchy_scale_fit(const EmpiricalDistribution& emp);

struct PoissonTestReport {
    std::vector<long long> binCounts; // raw histogram of per-sample counts
    double meanHat = 0.0;
    double varHat = 0.0;
    double chiSq = 0.0;
    int dof = 0;
    double pValue = 0.0;
    double intensityPrediction = 0.0;
    std::string toJson() const;
};

/// Chi-square of the observed count histogram against Poisson(predictedMean);
/// bins with expectation < 5 are pooled.  Throws DegenerateTestError when
/// fewer than two effective bins remain.
PoissonTestReport poisson_count_test(const std::vector<long long>& countsPerSample,
                                     double predictedMean);

struct MarkColumn {
    std::string name;
    double period = 1.0; // marks live on [0, period)
    std::vector<double> values;
};

struct MarkTestReport {
    struct PerMark {
        std::string name;
        double ks = 0.0;
        double ksCritical1pct = 0.0;
        bool uniformOk = false;
        double thetaPermutationP = 1.0; // permutation test of dCov(|Theta|, mark)
    };
    std::vector<PerMark> marks;
    std::vector<std::vector<double>> pairwiseDcov; // dependence screen among marks
    std::string toJson() const;
};

/// KS-uniformity per mark coordinate plus independence screens: pairwise
/// distance covariance among the marks and a 200-permutation test of each
/// mark against |Theta|.  Long inputs are subsampled to `dcovCap` points for
/// the O(n^2) statistics.
MarkTestReport uniformity_and_independence(const std::vector<MarkColumn>& marks,
                                           const std::vector<double>& absTheta, Rng& rng,
                                           int permutations = 200, int dcovCap = 1024);

} // namespace kron
