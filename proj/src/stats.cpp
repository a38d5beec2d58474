#include "kron/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "kron/errors.hpp"

namespace kron {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> xs) : samples(std::move(xs)) {
    if (samples.empty()) throw ArgumentError("EmpiricalDistribution: need at least one sample");
    std::sort(samples.begin(), samples.end());
}

double EmpiricalDistribution::cdf(double x) const {
    auto it = std::upper_bound(samples.begin(), samples.end(), x);
    return static_cast<double>(it - samples.begin()) / static_cast<double>(samples.size());
}

double EmpiricalDistribution::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("quantile: p must lie in [0,1]");
    const int m = n();
    if (m == 1) return samples[0];
    double h = p * (m - 1);
    int i = static_cast<int>(std::floor(h));
    if (i >= m - 1) return samples[m - 1];
    return samples[i] + (h - i) * (samples[i + 1] - samples[i]);
}

void EmpiricalDistribution::writeCsv(std::ostream& out) const {
    const int m = n();
    out << "value,Fhat\n";
    char buf[64];
    for (int i = 0; i < m; ++i) {
        std::snprintf(buf, sizeof(buf), "%.16g,%.16g\n", samples[i],
                      static_cast<double>(i + 1) / m);
        out << buf;
    }
}

double cauchy_cdf(double z) { return std::atan(z) / M_PI + 0.5; }

double rho_constant(int d) {
    if (d < 1) throw ArgumentError("rho_constant: d must be >= 1");
    double fact = 1.0;
    for (int i = 2; i <= d; ++i) fact *= i;
    return std::pow(2.0 / M_PI, 2 * d + 2) / fact;
}

double ks_statistic(const EmpiricalDistribution& emp, const std::function<double(double)>& cdf) {
    const int m = emp.n();
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        double F = cdf(emp.samples[i]);
        worst = std::max(worst, std::fabs(static_cast<double>(i + 1) / m - F));
        worst = std::max(worst, std::fabs(F - static_cast<double>(i) / m));
    }
    return worst;
}

double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    const auto& xs = a.samples;
    const auto& ys = b.samples;
    size_t i = 0, j = 0;
    double worst = 0.0;
    while (i < xs.size() && j < ys.size()) {
        double v = std::min(xs[i], ys[j]);
        while (i < xs.size() && xs[i] <= v) ++i;
        while (j < ys.size() && ys[j] <= v) ++j;
        worst = std::max(worst, std::fabs(static_cast<double>(i) / xs.size() -
                                          static_cast<double>(j) / ys.size()));
    }
    return worst;
}

double ks_critical(int n, double alpha) {
    // inverse of the Kolmogorov tail 2 exp(-2 n c^2) ~ alpha (one-term asymptotic)
    double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c / std::sqrt(static_cast<double>(n));
}

double cauchy_scale_fit(const EmpiricalDistribution& emp) {
    return 0.5 * (emp.quantile(0.75) - emp.quantile(0.25));
}

namespace {
double poisson_pmf(long long k, double mu) {
    return std::exp(-mu + k * std::log(mu) - std::lgamma(static_cast<double>(k) + 1.0));
}
} // namespace

PoissonTestReport poisson_count_test(const std::vector<long long>& countsPerSample,
                                     double predictedMean) {
    if (!(predictedMean > 0.0)) throw ArgumentError("poisson_count_test: predictedMean must be > 0");
    if (countsPerSample.empty()) throw ArgumentError("poisson_count_test: no counts");

    PoissonTestReport rep;
    rep.intensityPrediction = predictedMean;
    long long kmax = 0;
    double sum = 0.0;
    for (long long c : countsPerSample) {
        kmax = std::max(kmax, c);
        sum += static_cast<double>(c);
    }
    const double n = static_cast<double>(countsPerSample.size());
    rep.meanHat = sum / n;
    double ss = 0.0;
    for (long long c : countsPerSample) ss += (c - rep.meanHat) * (c - rep.meanHat);
    rep.varHat = countsPerSample.size() > 1 ? ss / (n - 1.0) : 0.0;

    rep.binCounts.assign(static_cast<size_t>(kmax) + 1, 0);
    for (long long c : countsPerSample) ++rep.binCounts[static_cast<size_t>(c)];

    // the chi-square histogram must also cover the bulk of the predicted law,
    // even where nothing was observed
    size_t bins = std::max<size_t>(
        rep.binCounts.size(),
        static_cast<size_t>(std::ceil(predictedMean + 6.0 * std::sqrt(predictedMean))) + 1);
    std::vector<long long> observed(rep.binCounts);
    observed.resize(bins, 0);

    // expected counts; final bin absorbs the upper tail
    std::vector<double> expected(bins);
    double cum = 0.0;
    for (size_t k = 0; k + 1 < expected.size(); ++k) {
        expected[k] = n * poisson_pmf(static_cast<long long>(k), predictedMean);
        cum += expected[k];
    }
    expected.back() = std::max(n - cum, 0.0);

    // pool bins with expectation < 5, sweeping from the right
    std::vector<double> obs, exp;
    double oAcc = 0.0, eAcc = 0.0;
    for (size_t k = expected.size(); k-- > 0;) {
        oAcc += static_cast<double>(observed[k]);
        eAcc += expected[k];
        if (eAcc >= 5.0 || k == 0) {
            obs.push_back(oAcc);
            exp.push_back(eAcc);
            oAcc = eAcc = 0.0;
        }
    }
    if (exp.size() >= 2 && exp.back() < 5.0) { // leftmost pooled bin may still be light
        exp[exp.size() - 2] += exp.back();
        obs[obs.size() - 2] += obs.back();
        exp.pop_back();
        obs.pop_back();
    }
    if (obs.size() < 2) throw DegenerateTestError("poisson_count_test: fewer than 2 effective bins");

    double chi = 0.0;
    for (size_t i = 0; i < obs.size(); ++i) {
        double d = obs[i] - exp[i];
        chi += d * d / exp[i];
    }
    rep.chiSq = chi;
    rep.dof = static_cast<int>(obs.size()) - 1;
    rep.pValue = boost::math::gamma_q(0.5 * rep.dof, 0.5 * chi);
    return rep;
}

std::string PoissonTestReport::toJson() const {
    nlohmann::json j;
    j["bin_counts"] = binCounts;
    j["mean_hat"] = meanHat;
    j["var_hat"] = varHat;
    j["chi_sq"] = chiSq;
    j["dof"] = dof;
    j["p_value"] = pValue;
    j["intensity_prediction"] = intensityPrediction;
    return j.dump(2);
}

namespace {

double ks_uniform(std::vector<double> v, double period) {
    std::sort(v.begin(), v.end());
    const int m = static_cast<int>(v.size());
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        double F = v[i] / period;
        worst = std::max(worst, std::fabs(static_cast<double>(i + 1) / m - F));
        worst = std::max(worst, std::fabs(F - static_cast<double>(i) / m));
    }
    return worst;
}

// Distance covariance (biased V-statistic), O(n^2).
double dcov(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    std::vector<double> arow(n, 0.0), brow(n, 0.0);
    double agrand = 0.0, bgrand = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double sa = 0.0, sb = 0.0;
        for (size_t j = 0; j < n; ++j) {
            sa += std::fabs(x[i] - x[j]);
            sb += std::fabs(y[i] - y[j]);
        }
        arow[i] = sa / n;
        brow[i] = sb / n;
        agrand += sa;
        bgrand += sb;
    }
    agrand /= static_cast<double>(n) * n;
    bgrand /= static_cast<double>(n) * n;
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            double A = std::fabs(x[i] - x[j]) - arow[i] - arow[j] + agrand;
            double B = std::fabs(y[i] - y[j]) - brow[i] - brow[j] + bgrand;
            acc += A * B;
        }
    return std::sqrt(std::max(acc, 0.0) / (static_cast<double>(n) * n));
}

std::vector<size_t> subsample_idx(size_t n, size_t cap, Rng& rng) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    if (n <= cap) return idx;
    for (size_t i = 0; i < cap; ++i) {
        size_t j = i + static_cast<size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(cap);
    return idx;
}

} // namespace

MarkTestReport uniformity_and_independence(const std::vector<MarkColumn>& marks,
                                           const std::vector<double>& absTheta, Rng& rng,
                                           int permutations, int dcovCap) {
    if (marks.empty()) throw ArgumentError("uniformity_and_independence: no mark columns");
    const size_t n = marks.front().values.size();
    for (const auto& m : marks)
        if (m.values.size() != n)
            throw ArgumentError("uniformity_and_independence: ragged mark columns");
    if (n < 100) throw ArgumentError("uniformity_and_independence: need >= 100 pooled marks");

    MarkTestReport rep;
    auto idx = subsample_idx(n, static_cast<size_t>(dcovCap), rng);
    std::vector<std::vector<double>> sub(marks.size());
    for (size_t c = 0; c < marks.size(); ++c) {
        sub[c].reserve(idx.size());
        for (size_t i : idx) sub[c].push_back(marks[c].values[i]);
    }
    std::vector<double> subTheta;
    subTheta.reserve(idx.size());
    for (size_t i : idx) subTheta.push_back(absTheta[i]);

    for (size_t c = 0; c < marks.size(); ++c) {
        MarkTestReport::PerMark pm;
        pm.name = marks[c].name;
        pm.ks = ks_uniform(marks[c].values, marks[c].period);
        pm.ksCritical1pct = ks_critical(static_cast<int>(n), 0.01);
        pm.uniformOk = pm.ks <= pm.ksCritical1pct;

        if (!subTheta.empty() && subTheta.size() == sub[c].size()) {
            double observed = dcov(subTheta, sub[c]);
            int geq = 0;
            std::vector<double> perm = sub[c];
            for (int p = 0; p < permutations; ++p) {
                for (size_t i = perm.size(); i > 1; --i)
                    std::swap(perm[i - 1], perm[rng.below(i)]);
                if (dcov(subTheta, perm) >= observed) ++geq;
            }
            pm.thetaPermutationP = (1.0 + geq) / (1.0 + permutations);
        }
        rep.marks.push_back(std::move(pm));
    }

    rep.pairwiseDcov.assign(marks.size(), std::vector<double>(marks.size(), 0.0));
    for (size_t a = 0; a < marks.size(); ++a)
        for (size_t b = a + 1; b < marks.size(); ++b)
            rep.pairwiseDcov[a][b] = rep.pairwiseDcov[b][a] = dcov(sub[a], sub[b]);
    return rep;
}

std::string MarkTestReport::toJson() const {
    nlohmann::json j;
    for (const auto& m : marks) {
        nlohmann::json jm;
        jm["name"] = m.name;
        jm["ks"] = m.ks;
        jm["ks_critical_1pct"] = m.ksCritical1pct;
        jm["uniform_ok"] = m.uniformOk;
        jm["theta_permutation_p"] = m.thetaPermutationP;
        j["marks"].push_back(jm);
    }
    j["pairwise_dcov"] = pairwiseDcov;
    return j.dump(2);
}

} // namespace kron
