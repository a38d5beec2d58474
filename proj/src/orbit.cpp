#include "kron/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kron/errors.hpp"

namespace kron {

namespace {

// Membership tester with the shear inverse precomputed.  The translate search
// range {-1,0,1}^d is enough: u_i < 1/2 and eta < 1/(4d) keep the sheared box
// inside a coordinate slab of half-width < 1.
struct BoxTester {
    int d;
    bool identityShear;
    std::vector<double> inv; // row-major inverse of the shear
    std::vector<double> u;

    BoxTester(const SampleXi& xi, const std::vector<double>& halfSides)
        : d(xi.d()), u(halfSides) {
        identityShear = true;
        for (int i = 0; i < d && identityShear; ++i)
            for (int j = 0; j < d; ++j)
                if (xi.shear.at(i, j) != (i == j ? 1.0 : 0.0)) {
                    identityShear = false;
                    break;
                }
        if (!identityShear) {
            inv.resize(static_cast<size_t>(d) * d);
            // invert column by column
            for (int c = 0; c < d; ++c) {
                std::vector<double> e(d, 0.0);
                e[c] = 1.0;
                auto col = xi.shear.solve(e);
                for (int r = 0; r < d; ++r) inv[static_cast<size_t>(r) * d + c] = col[r];
            }
        }
    }

    bool contains(const double* p) const {
        if (identityShear) {
            for (int i = 0; i < d; ++i) {
                double dist = std::min(p[i], 1.0 - p[i]); // distance to nearest integer
                if (dist > u[i]) return false;
            }
            return true;
        }
        // odometer over shifts n in {-1,0,1}^d
        std::vector<int> n(d, -1);
        while (true) {
            bool inside = true;
            for (int i = 0; i < d && inside; ++i) {
                double c = 0.0;
                for (int j = 0; j < d; ++j)
                    c += inv[static_cast<size_t>(i) * d + j] * (p[j] + n[j]);
                if (std::fabs(c) > u[i]) inside = false;
            }
            if (inside) return true;
            int pos = 0;
            while (pos < d && n[pos] == 1) n[pos++] = -1;
            if (pos == d) return false;
            ++n[pos];
        }
    }
};

double discrepancy_with_sides(const SampleXi& xi, long long N, const std::vector<double>& sides) {
    if (N < 1) throw ArgumentError("discrepancy: N must be >= 1");
    const int d = xi.d();
    BoxTester tester(xi, sides);
    std::vector<double> p = xi.x;
    long long count = 0;
    for (long long m = 1; m <= N; ++m) {
        for (int i = 0; i < d; ++i) {
            p[i] += xi.alpha[i];
            if (p[i] >= 1.0) p[i] -= 1.0;
        }
        if (tester.contains(p.data())) ++count;
    }
    double vol = 1.0;
    for (int i = 0; i < d; ++i) vol *= 2.0 * sides[i];
    return static_cast<double>(count) - vol * static_cast<double>(N);
}

} // namespace

bool box_contains(const SampleXi& xi, const std::vector<double>& p) {
    if (static_cast<int>(p.size()) != xi.d())
        throw ArgumentError("box_contains: point dimension mismatch");
    return BoxTester(xi, xi.u).contains(p.data());
}

double discrepancy_direct(const SampleXi& xi, long long N) {
    return discrepancy_with_sides(xi, N, xi.u);
}

double discrepancy_smallbox(const SampleXi& xi, long long N, double gamma) {
    const int d = xi.d();
    if (!(gamma >= 0.0 && gamma < 1.0 / d))
        throw ArgumentError("discrepancy_smallbox: gamma must lie in [0, 1/d)");
    std::vector<double> sides = xi.u;
    const double scale = std::pow(static_cast<double>(N), gamma);
    for (double& s : sides) s /= scale;
    return discrepancy_with_sides(xi, N, sides);
}

void ContinuousLineSpec::validate() const {
    if (v.empty() || v.size() != x.size())
        throw ArgumentError("ContinuousLineSpec: v and x must be nonempty and of equal dimension");
    double norm = 0.0;
    for (double c : v) norm += c * c;
    if (norm == 0.0) throw ArgumentError("ContinuousLineSpec: flow direction is zero");
    if (!(T > 0.0)) throw ArgumentError("ContinuousLineSpec: T must be positive");
}

namespace {

// Walks the segment cell by cell (DDA); `visit` receives each maximal time
// window [ta,tb] together with the integer cell floor(x + v t).
template <typename Visit>
void walk_cells(const ContinuousLineSpec& spec, Visit&& visit) {
    const int d = static_cast<int>(spec.v.size());
    std::vector<long long> cell(d);
    for (int i = 0; i < d; ++i) cell[i] = static_cast<long long>(std::floor(spec.x[i]));
    std::vector<double> nextCross(d);
    auto crossing = [&](int i) {
        if (spec.v[i] > 0.0) return (static_cast<double>(cell[i]) + 1.0 - spec.x[i]) / spec.v[i];
        if (spec.v[i] < 0.0) return (static_cast<double>(cell[i]) - spec.x[i]) / spec.v[i];
        return std::numeric_limits<double>::infinity();
    };
    for (int i = 0; i < d; ++i) nextCross[i] = crossing(i);
    double t = 0.0;
    while (t < spec.T) {
        double tNext = spec.T;
        for (int i = 0; i < d; ++i) tNext = std::min(tNext, nextCross[i]);
        if (tNext > t) visit(t, tNext, cell);
        if (tNext >= spec.T) break;
        for (int i = 0; i < d; ++i)
            if (nextCross[i] <= tNext) {
                cell[i] += spec.v[i] > 0.0 ? 1 : -1;
                nextCross[i] = crossing(i);
            }
        t = tNext;
    }
}

} // namespace

double discrepancy_continuous_box(const ContinuousLineSpec& spec, const ShearMatrix& shear,
                                  const std::vector<double>& u) {
    spec.validate();
    const int d = static_cast<int>(spec.v.size());
    if (shear.d != d || static_cast<int>(u.size()) != d)
        throw ArgumentError("discrepancy_continuous_box: dimension mismatch");

    // A-frame data: w(t) = A^{-1}(x - n) + (A^{-1}v) t must satisfy 0 < w_j < u_j.
    std::vector<double> ax(d), av(d);
    std::vector<std::vector<double>> invCol(d);
    {
        std::vector<double> e(d, 0.0);
        for (int c = 0; c < d; ++c) {
            std::fill(e.begin(), e.end(), 0.0);
            e[c] = 1.0;
            invCol[c] = shear.solve(e);
        }
        ax = shear.solve(spec.x);
        av = shear.solve(spec.v);
    }
    constexpr double kParallelTol = 1e-12;
    constexpr double kBindingTol = 1e-9;

    double total = 0.0;
    std::vector<double> w0(d);
    walk_cells(spec, [&](double ta, double tb, const std::vector<long long>& cell) {
        std::vector<int> off(d, -1);
        while (true) {
            for (int j = 0; j < d; ++j) {
                double s = ax[j];
                for (int i = 0; i < d; ++i)
                    s -= invCol[i][j] * static_cast<double>(cell[i] + off[i]);
                w0[j] = s;
            }
            double lo = ta, hi = tb;
            for (int j = 0; j < d && lo < hi; ++j) {
                if (std::fabs(av[j]) < kParallelTol) {
                    // an exact face hit is decidable (open box: outside); only a
                    // near-but-not-exact hit is ill-conditioned
                    double gap = std::min(std::fabs(w0[j]), std::fabs(u[j] - w0[j]));
                    if (gap != 0.0 && gap < kBindingTol)
                        throw DegenerateDirectionError(
                            "flow direction parallel to a binding box face");
                    if (!(0.0 < w0[j] && w0[j] < u[j])) hi = lo; // slab never entered
                } else {
                    double t0 = (0.0 - w0[j]) / av[j];
                    double t1 = (u[j] - w0[j]) / av[j];
                    if (t0 > t1) std::swap(t0, t1);
                    lo = std::max(lo, t0);
                    hi = std::min(hi, t1);
                }
            }
            if (hi > lo) total += hi - lo;
            int pos = 0;
            while (pos < d && off[pos] == 1) off[pos++] = -1;
            if (pos == d) break;
            ++off[pos];
        }
    });
    double vol = 1.0;
    for (int j = 0; j < d; ++j) vol *= u[j];
    return total - spec.T * vol;
}

double discrepancy_continuous_ball(const ContinuousLineSpec& spec, double r) {
    spec.validate();
    if (spec.v.size() != 3) throw ArgumentError("discrepancy_continuous_ball: requires d = 3");
    if (!(0.0 < r && r < 0.5))
        throw ArgumentError("discrepancy_continuous_ball: radius must lie in (0, 1/2)");

    double vv = 0.0;
    for (double c : spec.v) vv += c * c;

    double total = 0.0;
    walk_cells(spec, [&](double ta, double tb, const std::vector<long long>& cell) {
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    double rx = spec.x[0] - static_cast<double>(cell[0] + dx);
                    double ry = spec.x[1] - static_cast<double>(cell[1] + dy);
                    double rz = spec.x[2] - static_cast<double>(cell[2] + dz);
                    // |x + v t - n|^2 <= r^2, quadratic in t
                    double b = 2.0 * (rx * spec.v[0] + ry * spec.v[1] + rz * spec.v[2]);
                    double c = rx * rx + ry * ry + rz * rz - r * r;
                    double disc = b * b - 4.0 * vv * c;
                    if (disc <= 0.0) continue;
                    double sq = std::sqrt(disc);
                    double lo = std::max(ta, (-b - sq) / (2.0 * vv));
                    double hi = std::min(tb, (-b + sq) / (2.0 * vv));
                    if (hi > lo) total += hi - lo;
                }
    });
    return total - spec.T * (4.0 / 3.0) * M_PI * r * r * r;
}

} // namespace kron
