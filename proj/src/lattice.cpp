#include "kron/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kron/errors.hpp"

namespace kron {

UnimodularLattice UnimodularLattice::identity(int dim) {
    UnimodularLattice L;
    L.dim = dim;
    L.B.assign(static_cast<size_t>(dim) * dim, dd(0.0));
    for (int i = 0; i < dim; ++i) L.at(i, i) = dd(1.0);
    return L;
}

double UnimodularLattice::det() const {
    std::vector<dd> m = B;
    auto at = [&](int i, int j) -> dd& { return m[static_cast<size_t>(i) * dim + j]; };
    dd det(1.0);
    for (int c = 0; c < dim; ++c) {
        int p = c;
        for (int r = c + 1; r < dim; ++r)
            if (std::fabs(at(r, c).hi) > std::fabs(at(p, c).hi)) p = r;
        if (p != c) {
            for (int j = 0; j < dim; ++j) std::swap(at(c, j), at(p, j));
            det = -det;
        }
        if (at(c, c).hi == 0.0) return 0.0;
        det = det * at(c, c);
        for (int r = c + 1; r < dim; ++r) {
            dd f = at(r, c) / at(c, c);
            for (int j = c; j < dim; ++j) at(r, j) = at(r, j) - f * at(c, j);
        }
    }
    return static_cast<double>(det);
}

void UnimodularLattice::writeCsv(std::ostream& out) const {
    char buf[64];
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            std::snprintf(buf, sizeof(buf), "%.16g%c", static_cast<double>(at(i, j)),
                          j + 1 == dim ? '\n' : ',');
            out << buf;
        }
}

void FlowTime::validate() const {
    for (double c : t)
        if (!(c >= 0.0)) throw ArgumentError("FlowTime: components must be nonnegative");
}

RegionSpec RegionSpec::fromEpsilonM(double epsilon, long long M) {
    if (!(epsilon > 0.0) || M < 1) throw ArgumentError("RegionSpec: need epsilon > 0, M >= 1");
    RegionSpec r;
    r.M = M;
    r.kappa = 1.0 / (epsilon * static_cast<double>(M) * static_cast<double>(M));
    return r;
}

UnimodularLattice lambda_matrix(const SampleXi& xi) {
    const int d = xi.d();
    UnimodularLattice L;
    L.dim = d + 1;
    L.B.assign(static_cast<size_t>(d + 1) * (d + 1), dd(0.0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) L.at(i, j) = dd(xi.shear.at(i, j));
    for (int j = 0; j < d; ++j) L.at(d, j) = dd(xi.alpha[j]);
    L.at(d, d) = dd(1.0);
    return L;
}

UnimodularLattice cartan_flow(const FlowTime& t, const UnimodularLattice& L) {
    if (static_cast<int>(t.t.size()) != L.dim - 1)
        throw ArgumentError("cartan_flow: FlowTime must have dim-1 components");
    t.validate();
    UnimodularLattice out = L;
    double sum = 0.0;
    for (int i = 0; i < L.dim - 1; ++i) {
        double s = std::exp(-t.t[i]);
        for (int j = 0; j < L.dim; ++j) out.at(i, j) = out.at(i, j) * dd(s);
        sum += t.t[i];
    }
    double s = std::exp(sum);
    for (int j = 0; j < L.dim; ++j) out.at(L.dim - 1, j) = out.at(L.dim - 1, j) * dd(s);
    return out;
}

// ---------------------------------------------------------------------------
// LLL + Fincke-Pohst enumeration (n <= 3, dd arithmetic, int64 transform)
// ---------------------------------------------------------------------------

namespace {

using Col = std::array<dd, 3>;

dd col_dot(const Col& a, const Col& b, int n) {
    dd s(0.0);
    for (int i = 0; i < n; ++i) s = s + a[i] * b[i];
    return s;
}

struct Gso {
    std::array<Col, 3> bstar{};
    std::array<dd, 3> b2{};
    std::array<std::array<dd, 3>, 3> mu{}; // mu[i][j], j < i
};

struct Reducer {
    int n;
    std::array<Col, 3> cols{};
    std::array<std::array<long long, 3>, 3> U{}; // cols = original * U (column j)

    void computeGso(Gso& g) const {
        for (int j = 0; j < n; ++j) {
            g.bstar[j] = cols[j];
            for (int i = 0; i < j; ++i) {
                dd m = col_dot(cols[j], g.bstar[i], n) / g.b2[i];
                g.mu[j][i] = m;
                for (int c = 0; c < n; ++c) g.bstar[j][c] = g.bstar[j][c] - m * g.bstar[i][c];
            }
            g.b2[j] = col_dot(g.bstar[j], g.bstar[j], n);
            if (!(g.b2[j].hi > 0.0))
                throw ConditioningError("lattice basis is numerically degenerate");
        }
    }

    void subtractCol(int k, int j, double q) {
        for (int c = 0; c < n; ++c) cols[k][c] = cols[k][c] - dd(q) * cols[j][c];
        for (int r = 0; r < n; ++r) {
            __int128 v = static_cast<__int128>(U[r][k]) -
                         static_cast<__int128>(static_cast<long long>(q)) * U[r][j];
            if (v > (static_cast<__int128>(1) << 62) || v < -(static_cast<__int128>(1) << 62))
                throw ConditioningError("LLL transform overflow; basis too skewed");
            U[r][k] = static_cast<long long>(v);
        }
    }

    void reduce() {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) U[i][j] = (i == j) ? 1 : 0;
        Gso g;
        int k = 1, iters = 0;
        while (k < n) {
            if (++iters > 20000) throw ConditioningError("LLL failed to terminate");
            computeGso(g);
            for (int j = k - 1; j >= 0; --j) {
                double q = dd_round(g.mu[k][j]);
                if (q != 0.0) {
                    subtractCol(k, j, q);
                    computeGso(g); // mu[k][i] for i < j depends on the update
                }
            }
            double muk = static_cast<double>(g.mu[k][k - 1]);
            if (static_cast<double>(g.b2[k]) >=
                (0.9 - muk * muk) * static_cast<double>(g.b2[k - 1])) {
                ++k;
            } else {
                std::swap(cols[k], cols[k - 1]);
                for (int r = 0; r < n; ++r) std::swap(U[r][k], U[r][k - 1]);
                k = std::max(1, k - 1);
            }
        }
    }
};

// All integer coefficient vectors (w.r.t. the ORIGINAL basis columns) whose
// lattice point lies in the axis box [lo,hi] (inflated by a small margin).
std::vector<std::array<long long, 3>> enumerate_in_box(const std::vector<dd>& B, int n,
                                                       const double* lo, const double* hi) {
    std::array<double, 3> h{}, ctr{};
    for (int i = 0; i < n; ++i) {
        h[i] = 0.5 * (hi[i] - lo[i]);
        ctr[i] = 0.5 * (hi[i] + lo[i]);
        if (h[i] < 0.0) return {};
        if (h[i] == 0.0) return {}; // measure-zero slab; no real-valued lattice hits it a.s.
    }

    Reducer red;
    red.n = n;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i)
            red.cols[j][i] = B[static_cast<size_t>(i) * n + j] / dd(h[i]);
        for (int i = n; i < 3; ++i) red.cols[j][i] = dd(0.0);
    }
    red.reduce();

    Gso g;
    red.computeGso(g);

    // target in GSO coordinates
    Col t{};
    for (int i = 0; i < n; ++i) t[i] = dd(ctr[i] / h[i]);
    std::array<double, 3> tau{};
    for (int j = 0; j < n; ++j)
        tau[j] = static_cast<double>(col_dot(t, g.bstar[j], n) / g.b2[j]);

    std::array<double, 3> b2{};
    std::array<std::array<double, 3>, 3> mu{};
    for (int j = 0; j < n; ++j) {
        b2[j] = static_cast<double>(g.b2[j]);
        for (int i = 0; i < j; ++i) mu[j][i] = static_cast<double>(g.mu[j][i]);
    }

    const double r2 = static_cast<double>(n) * (1.0 + 1e-9) + 1e-12;
    std::vector<std::array<long long, 3>> out;
    std::array<long long, 3> y{};

    // depth-first over levels n-1 .. 0
    auto emit = [&]() {
        std::array<long long, 3> coeff{};
        for (int r = 0; r < n; ++r) {
            __int128 v = 0;
            for (int j = 0; j < n; ++j)
                v += static_cast<__int128>(red.U[r][j]) * y[j];
            if (v > (static_cast<__int128>(1) << 62) || v < -(static_cast<__int128>(1) << 62))
                throw ConditioningError("enumeration coefficient overflow");
            coeff[r] = static_cast<long long>(v);
        }
        // exact box membership with a relative slack; callers apply the
        // precise half-open predicates afterwards
        for (int i = 0; i < n; ++i) {
            dd v(0.0);
            for (int j = 0; j < n; ++j)
                v = v + B[static_cast<size_t>(i) * n + j] * dd_from_i64(coeff[j]);
            double slack = 1e-9 * std::max({1.0, std::fabs(lo[i]), std::fabs(hi[i])});
            if (static_cast<double>(v) < lo[i] - slack || static_cast<double>(v) > hi[i] + slack)
                return;
        }
        out.push_back(coeff);
    };

    std::function<void(int, double)> walk = [&](int level, double used) {
        if (level < 0) {
            emit();
            return;
        }
        double c = tau[level];
        for (int kk = level + 1; kk < n; ++kk) c -= static_cast<double>(y[kk]) * mu[kk][level];
        double room = (r2 - used) / b2[level];
        if (room < 0.0) return;
        double w = std::sqrt(room) + 1e-9;
        long long yLo = static_cast<long long>(std::ceil(c - w));
        long long yHi = static_cast<long long>(std::floor(c + w));
        for (long long v = yLo; v <= yHi; ++v) {
            y[level] = v;
            double dlev = (static_cast<double>(v) - c);
            walk(level - 1, used + dlev * dlev * b2[level]);
        }
    };
    walk(n - 1, 0.0);
    return out;
}

constexpr double kE = 2.718281828459045235; // region boundary e

} // namespace

RegionCount count_region_vectors(const UnimodularLattice& L, const RegionSpec& region) {
    if (L.dim != 3) throw ArgumentError("count_region_vectors: region is defined for dim 3");
    double zBound = region.kappa;
    if (region.kappaBand)
        zBound = std::max(std::fabs(region.kappaBand->first), std::fabs(region.kappaBand->second));
    const double lo[3] = {1.0, -kE, -zBound};
    const double hi[3] = {kE, kE, zBound};
    auto coeffs = enumerate_in_box(L.B, 3, lo, hi);

    RegionCount rc;
    for (const auto& c : coeffs) {
        if (c[0] == 0 && c[1] == 0 && c[2] == 0) continue;
        long long g = std::gcd(std::gcd(std::llabs(c[0]), std::llabs(c[1])), std::llabs(c[2]));
        if (g != 1) continue;
        dd v[3];
        for (int i = 0; i < 3; ++i) {
            v[i] = dd(0.0);
            for (int j = 0; j < 3; ++j) v[i] = v[i] + L.at(i, j) * dd_from_i64(c[j]);
        }
        if (!(v[0] > dd(1.0) && v[0] <= dd(kE))) continue;     // x in I = (1, e]
        dd ay = dd_abs(v[1]);
        if (!(ay > dd(1.0) && ay <= dd(kE))) continue;          // |y| in (1, e]
        dd xyz = v[0] * v[1] * v[2];
        if (region.kappaBand) {
            if (!(xyz >= dd(region.kappaBand->first) && xyz <= dd(region.kappaBand->second)))
                continue;
        } else if (!(dd_abs(xyz) <= dd(region.kappa))) {
            continue;
        }
        RegionVector rv;
        rv.coeff = c;
        rv.x = static_cast<double>(v[0]);
        rv.y = static_cast<double>(v[1]);
        rv.z = static_cast<double>(v[2]);
        rv.xyz = static_cast<double>(xyz);
        rc.vectors.push_back(rv);
    }
    std::sort(rc.vectors.begin(), rc.vectors.end(),
              [](const RegionVector& a, const RegionVector& b) { return a.coeff < b.coeff; });
    rc.count = static_cast<long long>(rc.vectors.size());
    return rc;
}

std::vector<std::pair<double, double>> psi_marks(const UnimodularLattice& L, double b,
                                                 const RegionSpec& region) {
    auto rc = count_region_vectors(L, region);
    std::vector<std::pair<double, double>> out;
    const double m2 = static_cast<double>(region.M) * static_cast<double>(region.M);
    for (const auto& v : rc.vectors) {
        double parity = std::fmod(b * v.z, 2.0);
        if (parity < 0.0) parity += 2.0;
        out.emplace_back(m2 * v.xyz, parity);
    }
    return out;
}

namespace {
long long flow_smax(long long N, double delta) {
    return static_cast<long long>(std::ceil((1.0 - delta) * std::log(static_cast<double>(N)))) - 1;
}
} // namespace

long long flow_grid_cell_count(long long N, double delta) {
    long long s = flow_smax(N, delta);
    if (s < 0) return 0;
    return (s + 1) * (s + 2) / 2;
}

PointProcessSample flow_scan(const SampleXi& xi, long long N, double epsilon, double delta) {
    if (xi.d() != 2) throw ArgumentError("flow_scan: implemented for d = 2");
    if (N < 16) throw ArgumentError("flow_scan: N must be >= 16");

    PointProcessSample sample;
    sample.N = N;
    sample.d = 2;
    sample.epsilon = epsilon;
    sample.delta = delta;
    sample.logNd = std::pow(std::log(static_cast<double>(N)), 2);

    const long long smax = flow_smax(N, delta);
    if (smax < 0) return sample;

    const long long M = static_cast<long long>(std::floor(std::log(static_cast<double>(N))));
    // The paper's K-interval 1/(eps M^2) contains the exact Z cut 1/(eps ln^2 N),
    // so scanning with it cannot lose members; the exact filter prunes the rest.
    RegionSpec region = RegionSpec::fromEpsilonM(epsilon, std::max<long long>(M, 1));

    UnimodularLattice base = lambda_matrix(xi);
    std::set<std::pair<long long, long long>> candidates;
    FlowTime t;
    t.t.assign(2, 0.0);
    for (long long t1 = 0; t1 <= smax; ++t1) {
        for (long long t2 = 0; t2 + t1 <= smax; ++t2) {
            t.t[0] = static_cast<double>(t1);
            t.t[1] = static_cast<double>(t2);
            auto rc = count_region_vectors(cartan_flow(t, base), region);
            for (const auto& v : rc.vectors) candidates.insert({v.coeff[0], v.coeff[1]});
        }
    }

    for (const auto& [k, l] : candidates) {
        if (auto term = resonant_term_if_member(xi, N, {k, l}, epsilon, delta))
            sample.terms.push_back(std::move(*term));
    }
    for (size_t i = 1; i < sample.terms.size(); ++i)
        if (sample.terms[i].k == sample.terms[i - 1].k)
            throw InternalConsistencyError("flow_scan: duplicate frequency recovered");
    return sample;
}

UnimodularLattice sl2_haar_sample(Rng& rng) {
    // z = x + i y in the modular fundamental domain with density prop. to y^{-2};
    // proposal: x uniform, y = y0/U (the exact y-marginal on y >= y0), then
    // reject below the unit circle.  The Iwasawa K-fiber is a uniform rotation:
    // without it the ensemble covers only SO(2)\SL_2/SL_2(Z) and the Siegel
    // averages over non-rotation-invariant test sets come out wrong.
    const double y0 = std::sqrt(3.0) / 2.0;
    for (int it = 0; it < 1000000; ++it) {
        double x = rng.uniform(-0.5, 0.5);
        double u = rng.nextUnit();
        double phi = rng.uniform(0.0, 2.0 * M_PI);
        if (u == 0.0) continue;
        double y = y0 / u;
        if (x * x + y * y < 1.0) continue;
        UnimodularLattice L;
        L.dim = 2;
        L.B.assign(4, dd(0.0));
        double sy = std::sqrt(y);
        double c = std::cos(phi), s = std::sin(phi);
        // rows of R_phi * [[1/sy, x/sy],[0, sy]]
        L.at(0, 0) = dd(c / sy);
        L.at(0, 1) = dd(c * x / sy - s * sy);
        L.at(1, 0) = dd(s / sy);
        L.at(1, 1) = dd(s * x / sy + c * sy);
        return L;
    }
    throw SamplingError("sl2_haar_sample: rejection cap exceeded");
}

namespace {

// Re-present the same lattice with LLL-reduced basis columns.
UnimodularLattice lll_rebase(const UnimodularLattice& L) {
    Reducer red;
    red.n = L.dim;
    for (int j = 0; j < L.dim; ++j) {
        for (int i = 0; i < L.dim; ++i) red.cols[j][i] = L.at(i, j);
        for (int i = L.dim; i < 3; ++i) red.cols[j][i] = dd(0.0);
    }
    red.reduce();
    UnimodularLattice out;
    out.dim = L.dim;
    out.B.assign(L.B.size(), dd(0.0));
    for (int i = 0; i < L.dim; ++i)
        for (int j = 0; j < L.dim; ++j) {
            dd v(0.0);
            for (int c = 0; c < L.dim; ++c)
                v = v + L.at(i, c) * dd_from_i64(red.U[c][j]);
            out.at(i, j) = v;
        }
    if (out.det() < 0.0) // det(U) may be -1; keep the basis positively oriented
        for (int i = 0; i < L.dim; ++i) out.at(i, L.dim - 1) = -out.at(i, L.dim - 1);
    return out;
}

} // namespace

UnimodularLattice approx_haar_sample(Rng& rng, int dim) {
    if (dim != 3) throw ArgumentError("approx_haar_sample: implemented for dim 3");
    SampleXi xi;
    xi.u = {0.2, 0.2}; // unused by Lambda
    xi.shear = sample_shear(2, 0.1, rng);
    xi.alpha = {rng.nextUnit(), rng.nextUnit()};
    xi.x = {0.0, 0.0};
    UnimodularLattice L = lambda_matrix(xi);

    // random unipotent word h = prod E_{ij}(u), then Cartan push g_T
    static constexpr int word[6][2] = {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}};
    for (const auto& ij : word) {
        double u = rng.nextUnit();
        for (int c = 0; c < 3; ++c)
            L.at(ij[0], c) = L.at(ij[0], c) + dd(u) * L.at(ij[1], c);
    }
    // T range [12,18]: deep enough that the translate is equidistributed to
    // well below the test tolerances while the basis arithmetic stays exact.
    // The push is applied in stages with an LLL re-presentation in between:
    // one monolithic g_T skews the raw basis by e^{T_1+T_2+max T}, past what
    // Gram-Schmidt can cancel, while the staged basis stays mild.
    double t1 = rng.uniform(12.0, 18.0), t2 = rng.uniform(12.0, 18.0);
    const int stages = 4;
    FlowTime t;
    t.t = {t1 / stages, t2 / stages};
    for (int s = 0; s < stages; ++s) L = lll_rebase(cartan_flow(t, L));
    return L;
}

double BoxTestFn::volume() const {
    double v = 1.0;
    for (auto [a, b] : intervals) v *= (b - a);
    return v;
}

double BoxTestFn::symmetricOverlapVolume() const {
    double v = 1.0;
    for (auto [a, b] : intervals) {
        double lo = std::max(a, -b), hi = std::min(b, -a);
        v *= std::max(0.0, hi - lo);
    }
    return v;
}

bool BoxTestFn::contains(const std::vector<dd>& v) const {
    for (size_t i = 0; i < intervals.size(); ++i)
        if (!(v[i] >= dd(intervals[i].first) && v[i] <= dd(intervals[i].second))) return false;
    return true;
}

double MomentEstimate::zscore() const {
    return stderrEst > 0.0 ? (estimate - prediction) / stderrEst
                           : (estimate == prediction ? 0.0 : INFINITY);
}

namespace {

// primitive lattice points inside the box, as coefficient vectors
std::vector<std::array<long long, 3>> prime_points_in_box(const UnimodularLattice& L,
                                                          const BoxTestFn& f) {
    std::vector<double> lo(L.dim), hi(L.dim);
    for (int i = 0; i < L.dim; ++i) {
        lo[i] = f.intervals[i].first;
        hi[i] = f.intervals[i].second;
    }
    auto coeffs = enumerate_in_box(L.B, L.dim, lo.data(), hi.data());
    std::vector<std::array<long long, 3>> out;
    std::vector<dd> v(L.dim);
    for (const auto& c : coeffs) {
        long long g = 0;
        bool zero = true;
        for (int j = 0; j < L.dim; ++j) {
            g = std::gcd(g, std::llabs(c[j]));
            zero = zero && c[j] == 0;
        }
        if (zero || g != 1) continue;
        for (int i = 0; i < L.dim; ++i) {
            v[i] = dd(0.0);
            for (int j = 0; j < L.dim; ++j) v[i] = v[i] + L.at(i, j) * dd_from_i64(c[j]);
        }
        if (f.contains(v)) out.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

MomentEstimate moments(double sum, double sumSq, long long n, double prediction) {
    MomentEstimate m;
    m.estimate = sum / static_cast<double>(n);
    double var = std::max(sumSq / static_cast<double>(n) - m.estimate * m.estimate, 0.0);
    m.stderrEst = std::sqrt(var / static_cast<double>(n));
    m.prediction = prediction;
    return m;
}

nlohmann::json moment_json(const MomentEstimate& m) {
    return {{"estimate", m.estimate},
            {"stderr", m.stderrEst},
            {"prediction", m.prediction},
            {"z_score", m.zscore()}};
}

} // namespace

RogersReport rogers_mc(const LatticeSampler& sampler, const BoxTestFn& f1,
                       const std::optional<BoxTestFn>& f2, long long samples, Rng& rng) {
    if (samples < 1) throw ArgumentError("rogers_mc: need at least one sample");
    if (f1.volume() == 0.0 || (f2 && f2->volume() == 0.0))
        throw ArgumentError("rogers_mc: zero-volume test function");

    double sF = 0.0, sF2 = 0.0, sF4 = 0.0, sBar = 0.0, sBar2 = 0.0;
    int dim = 0;
    for (long long i = 0; i < samples; ++i) {
        UnimodularLattice L = sampler(rng);
        if (dim == 0) {
            dim = L.dim;
            if (f1.dim() != dim || (f2 && f2->dim() != dim))
                throw ArgumentError("rogers_mc: test function dimension mismatch");
        }
        auto c1 = prime_points_in_box(L, f1);
        double F = static_cast<double>(c1.size());
        sF += F;
        sF2 += F * F;
        sF4 += F * F * F * F;
        if (f2) {
            auto c2 = prime_points_in_box(L, *f2);
            std::set<std::array<long long, 3>> s2(c2.begin(), c2.end());
            long long both = 0, anti = 0;
            for (const auto& c : c1) {
                if (s2.count(c)) ++both;
                std::array<long long, 3> neg{-c[0], -c[1], -c[2]};
                if (s2.count(neg)) ++anti;
            }
            double fbar = F * static_cast<double>(c2.size()) - static_cast<double>(both) -
                          static_cast<double>(anti);
            sBar += fbar;
            sBar2 += fbar * fbar;
        }
    }

    const double c1const = 1.0 / std::riemann_zeta(static_cast<double>(dim));
    const double c2const = c1const * c1const;
    RogersReport rep;
    rep.samples = samples;
    rep.meanF = moments(sF, sF2, samples, c1const * f1.volume());
    rep.meanFsq = moments(sF2, sF4, samples,
                          c1const * f1.volume() + c1const * f1.symmetricOverlapVolume() +
                              c2const * f1.volume() * f1.volume());
    if (f2)
        rep.meanFbar = moments(sBar, sBar2, samples, c2const * f1.volume() * f2->volume());
    return rep;
}

std::string RogersReport::toJson() const {
    nlohmann::json j;
    j["samples"] = samples;
    j["mean_F"] = moment_json(meanF);
    j["mean_F_sq"] = moment_json(meanFsq);
    if (meanFbar) j["mean_F_bar"] = moment_json(*meanFbar);
    return j.dump(2);
}

MultiplicityReport multiple_solution_stats(const LatticeSampler& sampler,
                                           const RegionSpec& region, long long samples,
                                           Rng& rng) {
    if (samples < 1) throw ArgumentError("multiple_solution_stats: need at least one sample");
    double sPhi = 0.0, sPhi2 = 0.0, sExc = 0.0, sExc2 = 0.0;
    long long multiple = 0;
    for (long long i = 0; i < samples; ++i) {
        UnimodularLattice L = sampler(rng);
        auto rc = count_region_vectors(L, region);
        double phi = static_cast<double>(rc.count);
        sPhi += phi;
        sPhi2 += phi * phi;
        double exc = phi * phi - phi;
        sExc += exc;
        sExc2 += exc * exc;
        if (rc.count > 1) ++multiple;
    }
    const double c1const = 1.0 / std::riemann_zeta(3.0);
    const double vol = 4.0 * region.kappa;
    MultiplicityReport rep;
    rep.samples = samples;
    rep.M = region.M;
    rep.meanPhi = moments(sPhi, sPhi2, samples, c1const * vol);
    rep.meanPhiSqExc = moments(sExc, sExc2, samples, c1const * c1const * vol * vol);
    rep.probMultiple = static_cast<double>(multiple) / static_cast<double>(samples);
    rep.probMultipleStderr =
        std::sqrt(std::max(rep.probMultiple * (1.0 - rep.probMultiple), 0.0) /
                  static_cast<double>(samples));
    return rep;
}

std::string MultiplicityReport::toJson() const {
    nlohmann::json j;
    j["samples"] = samples;
    j["M"] = M;
    j["mean_phi"] = moment_json(meanPhi);
    j["excess_second_moment"] = moment_json(meanPhiSqExc);
    j["prob_multiple"] = probMultiple;
    j["prob_multiple_stderr"] = probMultipleStderr;
    return j.dump(2);
}

} // namespace kron
