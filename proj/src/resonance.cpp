#include "kron/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "kron/dd.hpp"
#include "kron/errors.hpp"
#include "kron/lattice.hpp"

namespace kron {

namespace {

dd dot_int(const std::vector<long long>& k, const std::vector<double>& v) {
    dd s(0.0);
    for (size_t i = 0; i < k.size(); ++i)
        s = s + dd_mul(static_cast<double>(k[i]), v[i]);
    return s;
}

std::vector<dd> dual_frequency_dd(const ShearMatrix& shear, const std::vector<long long>& k) {
    std::vector<dd> kbar(shear.d, dd(0.0));
    for (int i = 0; i < shear.d; ++i) {
        dd s(0.0);
        for (int j = 0; j < shear.d; ++j)
            s = s + dd_mul(shear.at(i, j), static_cast<double>(k[j]));
        kbar[i] = s;
    }
    return kbar;
}

struct SignedDd {
    dd theta;
    long long m;
};

SignedDd signed_nearest_dd(dd s) {
    double mf = std::floor(0.5 - s.hi);
    dd theta = s + dd(mf);
    if (theta > dd(0.5)) {
        mf -= 1.0;
        theta = s + dd(mf);
    } else if (theta <= dd(-0.5)) {
        mf += 1.0;
        theta = s + dd(mf);
    }
    return {theta, static_cast<long long>(mf)};
}

double frac01(double x) {
    double f = x - std::floor(x);
    return f >= 1.0 ? 0.0 : f;
}

/// sum_{j>=1} cos(2 pi j x)/j^2 = pi^2 B_2({x})
double cosine_series_2(double x) {
    double t = frac01(x);
    return M_PI * M_PI * (t * t - t + 1.0 / 6.0);
}

/// sum_{j>=1} sin(2 pi j x)/j^3 = (2 pi^3 / 3) B_3({x})
double sine_series_3(double x) {
    double t = frac01(x);
    return (2.0 * M_PI * M_PI * M_PI / 3.0) * (t * t * t - 1.5 * t * t + 0.5 * t);
}

double mod2_from_dd(dd v) {
    dd half = v * dd(0.5);
    double r = 2.0 * static_cast<double>(dd_frac(half));
    if (r >= 2.0) r = 0.0;
    if (r < 0.0) r += 2.0;
    return r;
}

// Stable core of U_k given precomputed resonance data.
double u_term_core(const SampleXi& xi, long long N, const std::vector<dd>& kbar, dd theta,
                   const std::vector<long long>& k) {
    const int d = xi.d();
    double amp = std::pow(M_PI, -d);
    for (int i = 0; i < d; ++i) {
        double kb = static_cast<double>(kbar[i]);
        if (std::fabs(kb) < 1e-9) {
            amp *= 2.0 * M_PI * xi.u[i];
        } else {
            dd arg = kbar[i] * dd(xi.u[i]);
            amp *= std::sin(2.0 * M_PI * static_cast<double>(dd_frac(arg))) / kb;
        }
    }
    const double th = static_cast<double>(theta);
    // sin(pi N theta) via N theta mod 2 to keep the argument reduced
    dd nt = theta * dd(static_cast<double>(N));
    double dir = std::sin(M_PI * mod2_from_dd(nt)) / std::sin(M_PI * th);
    dd parg = dot_int(k, xi.x) + theta * dd(0.5 * static_cast<double>(N - 1));
    double cosf = std::cos(2.0 * M_PI * static_cast<double>(dd_frac(parg)));
    return amp * dir * cosf;
}

} // namespace

double fourier_term(const SampleXi& xi, long long N, const std::vector<long long>& k) {
    const int d = xi.d();
    if (static_cast<int>(k.size()) != d) throw ArgumentError("fourier_term: k dimension mismatch");
    if (std::all_of(k.begin(), k.end(), [](long long c) { return c == 0; }))
        throw ArgumentError("fourier_term: k must be nonzero");
    if (N < 1) throw ArgumentError("fourier_term: N must be >= 1");
    auto kbar = dual_frequency_dd(xi.shear, k);
    auto sn = signed_nearest_dd(dot_int(k, xi.alpha));
    if (std::fabs(static_cast<double>(sn.theta)) < 1e-14)
        throw ResonantSingularityError("fourier_term: (k,alpha) is within 1e-14 of an integer");
    return u_term_core(xi, N, kbar, sn.theta, k);
}

std::optional<ResonantTerm> resonant_term_if_member(const SampleXi& xi, long long N,
                                                    const std::vector<long long>& k,
                                                    double epsilon, double delta) {
    const int d = xi.d();
    if (static_cast<int>(k.size()) != d)
        throw ArgumentError("resonant_term_if_member: k dimension mismatch");
    auto kbar = dual_frequency_dd(xi.shear, k);
    if (!(kbar[0] > dd(0.0))) return std::nullopt;
    dd prod(1.0);
    for (int i = 0; i < d; ++i) {
        if (dd_abs(kbar[i]) < dd(1.0)) return std::nullopt;
        prod = prod * kbar[i];
    }
    const double pmax = std::pow(static_cast<double>(N), 1.0 - delta);
    if (!(dd_abs(prod) < dd(pmax))) return std::nullopt;

    auto sn = signed_nearest_dd(dot_int(k, xi.alpha));
    const double logNd = std::pow(std::log(static_cast<double>(N)), d);
    const double cut = 1.0 / (epsilon * logNd);
    dd pt = prod * sn.theta;
    if (!(dd_abs(pt) <= dd(cut))) return std::nullopt;

    long long g = std::llabs(sn.m);
    for (long long c : k) g = std::gcd(g, std::llabs(c));
    if (g != 1) return std::nullopt;

    ResonantTerm term;
    term.k = k;
    term.kbar.resize(d);
    for (int i = 0; i < d; ++i) term.kbar[i] = static_cast<double>(kbar[i]);
    term.m = sn.m;
    term.theta = static_cast<double>(sn.theta);
    term.Theta = logNd * static_cast<double>(pt);
    term.parityMark = mod2_from_dd(sn.theta * dd(static_cast<double>(N)));
    term.sideMarks.resize(d);
    for (int i = 0; i < d; ++i)
        term.sideMarks[i] = static_cast<double>(dd_frac(kbar[i] * dd(xi.u[i])));
    dd parg = dot_int(k, xi.x) + sn.theta * dd(0.5 * static_cast<double>(N - 1));
    term.phaseMark = static_cast<double>(dd_frac(parg));

    std::vector<double> eta = term.sideMarks;
    eta.push_back(term.parityMark);
    eta.push_back(term.phaseMark);
    term.Gamma = phi_series(eta, 1e-10);
    return term;
}

double phi_series(const std::vector<double>& eta, double tolerance) {
    if (!(tolerance > 0.0)) throw ArgumentError("phi_series: tolerance must be positive");
    const int d = static_cast<int>(eta.size()) - 2;
    if (d < 1) throw ArgumentError("phi_series: eta must have at least 3 entries");

    if (d == 1) {
        double a = frac01(eta[0]), b = frac01(eta[1] / 2.0), c = frac01(eta[2]);
        return 0.25 * (cosine_series_2(a - b - c) + cosine_series_2(a - b + c) -
                       cosine_series_2(a + b - c) - cosine_series_2(a + b + c));
    }
    if (d == 2) {
        double a = frac01(eta[0]), b = frac01(eta[1]), p = frac01(eta[2] / 2.0),
               c = frac01(eta[3]);
        return 0.125 * (sine_series_3(p + a - b + c) + sine_series_3(p + a - b - c) +
                        sine_series_3(p - a + b + c) + sine_series_3(p - a + b - c) -
                        sine_series_3(p + a + b + c) - sine_series_3(p + a + b - c) -
                        sine_series_3(p - a - b + c) - sine_series_3(p - a - b - c));
    }

    // d >= 3: truncate where the tail bound sum_{j>J} j^{-(d+1)} <= J^{-d}/d drops
    // below the tolerance
    double jReq = std::ceil(std::pow(d * tolerance, -1.0 / d));
    if (!(jReq < 5e7)) throw ResourceError("phi_series: tolerance too small for summation");
    const long long J = static_cast<long long>(jReq);
    std::vector<double> ph(d + 2);
    for (int i = 0; i < d; ++i) ph[i] = frac01(eta[i]);
    ph[d] = frac01(eta[d] / 2.0);
    ph[d + 1] = frac01(eta[d + 1]);
    double sum = 0.0;
    for (long long j = 1; j <= J; ++j) {
        double term = 1.0;
        for (int i = 0; i <= d; ++i)
            term *= std::sin(2.0 * M_PI * frac01(static_cast<double>(j) * ph[i]));
        term *= std::cos(2.0 * M_PI * frac01(static_cast<double>(j) * ph[d + 1]));
        sum += term / std::pow(static_cast<double>(j), d + 1);
    }
    return sum;
}

namespace {

struct StageDomain {
    long long bound; // cube half-width
};

long long inv_row_bound(const ShearMatrix& shear, double scale) {
    // ||M^{-1}||_inf via explicit columns of the inverse
    std::vector<double> rowAbs(shear.d, 0.0);
    for (int c = 0; c < shear.d; ++c) {
        std::vector<double> e(shear.d, 0.0);
        e[c] = 1.0;
        auto col = shear.solve(e);
        for (int r = 0; r < shear.d; ++r) rowAbs[r] += std::fabs(col[r]);
    }
    double m = *std::max_element(rowAbs.begin(), rowAbs.end());
    return static_cast<long long>(std::ceil(m * scale)) + 1;
}

StageDomain stage_domain(const SampleXi& xi, long long N, TruncationStage stage, double delta) {
    switch (stage) {
        case TruncationStage::D1:
        case TruncationStage::D2:
            return {N};
        case TruncationStage::D3:
        case TruncationStage::D4:
            return {inv_row_bound(xi.shear, static_cast<double>(N))};
        case TruncationStage::D5:
            return {inv_row_bound(xi.shear, std::pow(static_cast<double>(N), 1.0 - delta))};
    }
    return {N};
}

template <typename Fn>
void for_each_cube(int d, long long B, Fn&& fn) {
    std::vector<long long> k(d, -B);
    while (true) {
        bool allZero = std::all_of(k.begin(), k.end(), [](long long c) { return c == 0; });
        if (!allZero) fn(k);
        int pos = 0;
        while (pos < d && k[pos] == B) k[pos++] = -B;
        if (pos == d) break;
        ++k[pos];
    }
}

bool stage_accepts(const SampleXi& xi, long long N, TruncationStage stage, double epsilon,
                   double delta, const std::vector<long long>& k, std::vector<dd>& kbarOut,
                   dd& thetaOut) {
    const int d = xi.d();
    kbarOut = dual_frequency_dd(xi.shear, k);
    if (stage == TruncationStage::D1) {
        for (long long c : k)
            if (std::llabs(c) > N) return false;
        return true;
    }
    for (int i = 0; i < d; ++i)
        if (dd_abs(kbarOut[i]) < dd(1.0)) return false;
    if (stage == TruncationStage::D2) {
        for (long long c : k)
            if (std::llabs(c) > N) return false;
        return true;
    }
    dd prod(1.0);
    for (int i = 0; i < d; ++i) prod = prod * kbarOut[i];
    if (!(dd_abs(prod) <= dd(static_cast<double>(N)))) return false;
    if (stage == TruncationStage::D3) return true;
    auto sn = signed_nearest_dd(dot_int(k, xi.alpha));
    thetaOut = sn.theta;
    const double cut = 1.0 / (epsilon * std::pow(std::log(static_cast<double>(N)), d));
    if (!(dd_abs(prod * sn.theta) <= dd(cut))) return false;
    if (stage == TruncationStage::D4) return true;
    return dd_abs(prod) < dd(std::pow(static_cast<double>(N), 1.0 - delta));
}

void check_stage_cost(const SampleXi& xi, long long N, TruncationStage stage, double delta) {
    if (N < 16) throw ArgumentError("truncated_sum: N must be >= 16 so ln N > e");
    if ((stage == TruncationStage::D1 || stage == TruncationStage::D2 ||
         stage == TruncationStage::D3) &&
        N > 100000)
        throw ResourceError("truncated_sum: stages D1-D3 are limited to N <= 1e5");
    StageDomain dom = stage_domain(xi, N, stage, delta);
    double cells = std::pow(2.0 * static_cast<double>(dom.bound) + 1.0, xi.d());
    if (cells > 2.5e8)
        throw ResourceError("truncated_sum: enumeration cube exceeds the diagnostic budget");
}

} // namespace

double truncated_sum(const SampleXi& xi, long long N, TruncationStage stage, double epsilon,
                     double delta) {
    check_stage_cost(xi, N, stage, delta);
    StageDomain dom = stage_domain(xi, N, stage, delta);
    double sum = 0.0;
    std::vector<dd> kbar;
    dd theta;
    for_each_cube(xi.d(), dom.bound, [&](const std::vector<long long>& k) {
        if (!stage_accepts(xi, N, stage, epsilon, delta, k, kbar, theta)) return;
        auto sn = signed_nearest_dd(dot_int(k, xi.alpha));
        if (std::fabs(static_cast<double>(sn.theta)) < 1e-14)
            throw ResonantSingularityError("truncated_sum: (k,alpha) is an exact integer");
        sum += u_term_core(xi, N, kbar, sn.theta, k);
    });
    return sum;
}

std::vector<std::vector<long long>> truncation_stage_set(const SampleXi& xi, long long N,
                                                         TruncationStage stage, double epsilon,
                                                         double delta) {
    check_stage_cost(xi, N, stage, delta);
    StageDomain dom = stage_domain(xi, N, stage, delta);
    std::vector<std::vector<long long>> out;
    std::vector<dd> kbar;
    dd theta;
    for_each_cube(xi.d(), dom.bound, [&](const std::vector<long long>& k) {
        if (stage_accepts(xi, N, stage, epsilon, delta, k, kbar, theta)) out.push_back(k);
    });
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Superset prescreen in plain double arithmetic; exact membership is decided
// by resonant_term_if_member afterwards.
void bruteforce_candidates(const SampleXi& xi, long long N, double epsilon, double delta,
                           std::vector<std::vector<long long>>& out) {
    const int d = xi.d();
    const double pmax = std::pow(static_cast<double>(N), 1.0 - delta) * (1.0 + 1e-6);
    const double cut =
        (1.0 + 1e-6) / (epsilon * std::pow(std::log(static_cast<double>(N)), d));
    const double one = 1.0 - 1e-6;
    const long long B = inv_row_bound(xi.shear, std::pow(static_cast<double>(N), 1.0 - delta));

    if (d == 1) {
        const double a = xi.shear.at(0, 0), al = xi.alpha[0];
        for (long long k = 1; k <= B; ++k) { // kbar = a k > 0 needs k > 0 (a ~ 1)
            double kb = a * static_cast<double>(k);
            if (kb < one || kb >= pmax) continue;
            double s = static_cast<double>(k) * al;
            double th = s - std::nearbyint(s);
            if (std::fabs(kb * th) <= cut) out.push_back({k});
        }
        return;
    }
    if (d == 2) {
        const double a00 = xi.shear.at(0, 0), a01 = xi.shear.at(0, 1);
        const double a10 = xi.shear.at(1, 0), a11 = xi.shear.at(1, 1);
        const double al0 = xi.alpha[0], al1 = xi.alpha[1];
        for (long long k = -B; k <= B; ++k) {
            const double k0 = static_cast<double>(k);
            const double b0 = a00 * k0, b1 = a10 * k0, s0 = k0 * al0;
            for (long long l = -B; l <= B; ++l) {
                const double l0 = static_cast<double>(l);
                double kb1 = std::fma(a01, l0, b0);
                if (kb1 < one) continue; // kbar_1 > 0 and >= 1
                double kb2 = std::fma(a11, l0, b1);
                double p = kb1 * std::fabs(kb2);
                if (std::fabs(kb2) < one || p >= pmax) continue;
                double s = std::fma(l0, al1, s0);
                double th = s - std::nearbyint(s);
                if (p * std::fabs(th) <= cut) out.push_back({k, l});
            }
        }
        return;
    }
    for_each_cube(d, B, [&](const std::vector<long long>& k) {
        auto kbar = dual_frequency(xi.shear, k);
        if (kbar[0] < one) return;
        double p = 1.0;
        for (double kb : kbar) {
            if (std::fabs(kb) < one) return;
            p *= std::fabs(kb);
        }
        if (p >= pmax) return;
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += static_cast<double>(k[i]) * xi.alpha[i];
        double th = s - std::nearbyint(s);
        if (p * std::fabs(th) <= cut) out.push_back(k);
    });
}

} // namespace

PointProcessSample enumerate_resonant_set(const SampleXi& xi, long long N, EnumMode mode,
                                          double epsilon, double delta) {
    if (N < 16) throw ArgumentError("enumerate_resonant_set: N must be >= 16");
    if (mode == EnumMode::latticeflow) return flow_scan(xi, N, epsilon, delta);
    if (N > 10000)
        throw ResourceError("enumerate_resonant_set: bruteforce mode requires N <= 1e4");

    PointProcessSample sample;
    sample.N = N;
    sample.d = xi.d();
    sample.epsilon = epsilon;
    sample.delta = delta;
    sample.logNd = std::pow(std::log(static_cast<double>(N)), xi.d());

    std::vector<std::vector<long long>> candidates;
    bruteforce_candidates(xi, N, epsilon, delta, candidates);
    for (const auto& k : candidates) {
        if (auto term = resonant_term_if_member(xi, N, k, epsilon, delta))
            sample.terms.push_back(std::move(*term));
    }
    std::sort(sample.terms.begin(), sample.terms.end(),
              [](const ResonantTerm& a, const ResonantTerm& b) { return a.k < b.k; });
    return sample;
}

double resonant_discrepancy(const PointProcessSample& sample) {
    double sum = 0.0;
    for (const auto& term : sample.terms) {
        if (term.Theta == 0.0) {
            std::ostringstream msg;
            msg << "resonant_discrepancy: exact rational resonance at k = (";
            for (size_t i = 0; i < term.k.size(); ++i)
                msg << term.k[i] << (i + 1 < term.k.size() ? "," : ")");
            throw SingularTermError(msg.str());
        }
        sum += term.Gamma / term.Theta;
    }
    return sample.logNd * (2.0 / std::pow(M_PI, sample.d + 1)) * sum;
}

bool check_splitness(const PointProcessSample& sample, double A) {
    if (sample.d != 2) throw ArgumentError("check_splitness: defined for d = 2");
    std::vector<std::pair<double, double>> ts;
    for (const auto& term : sample.terms)
        ts.emplace_back(std::log(std::fabs(term.kbar[0])), std::log(std::fabs(term.kbar[1])));
    for (const auto& [t1, t2] : ts)
        if (!(t1 > A && t2 > A)) return false;
    for (size_t i = 0; i < ts.size(); ++i)
        for (size_t j = i + 1; j < ts.size(); ++j) {
            if (std::fabs(ts[i].first - ts[j].first) < A) return false;
            if (std::fabs(ts[i].second - ts[j].second) < A) return false;
            if (std::fabs(std::max(ts[i].first, ts[i].second) -
                          std::max(ts[j].first, ts[j].second)) < A)
                return false;
        }
    return true;
}

void write_csv(const PointProcessSample& sample, std::ostream& out) {
    const int d = sample.d;
    for (int i = 0; i < d; ++i) out << "k_" << i << ",";
    for (int i = 0; i < d; ++i) out << "kbar_" << i << ",";
    out << "theta,Theta,parity_mark,";
    for (int i = 0; i < d; ++i) out << "side_mark_" << i << ",";
    out << "phase_mark,gamma\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof(buf), "%.16g%c", v, sep);
        out << buf;
    };
    for (const auto& t : sample.terms) {
        for (int i = 0; i < d; ++i) out << t.k[i] << ",";
        for (int i = 0; i < d; ++i) put(t.kbar[i], ',');
        put(t.theta, ',');
        put(t.Theta, ',');
        put(t.parityMark, ',');
        for (int i = 0; i < d; ++i) put(t.sideMarks[i], ',');
        put(t.phaseMark, ',');
        put(t.Gamma, '\n');
    }
}

std::string to_json_summary(const PointProcessSample& sample) {
    nlohmann::json j;
    j["N"] = sample.N;
    j["d"] = sample.d;
    j["epsilon"] = sample.epsilon;
    j["delta"] = sample.delta;
    j["log_n_d"] = sample.logNd;
    j["term_count"] = sample.terms.size();
    double s = 0.0;
    for (const auto& t : sample.terms)
        if (t.Theta != 0.0) s += t.Gamma / t.Theta;
    j["sum_gamma_over_theta"] = s;
    j["resonant_discrepancy"] = sample.terms.empty() ? 0.0 : resonant_discrepancy(sample);
    return j.dump(2);
}

} // namespace kron
