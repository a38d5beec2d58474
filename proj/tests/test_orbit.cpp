#include <doctest.h>

#include <cmath>

#include "kron/errors.hpp"
#include "kron/orbit.hpp"

using namespace kron;

namespace {

SampleXi make_xi(std::vector<double> u, std::vector<double> alpha, std::vector<double> x,
                 ShearMatrix shear = {}) {
    SampleXi xi;
    xi.u = std::move(u);
    xi.alpha = std::move(alpha);
    xi.x = std::move(x);
    xi.shear = shear.d == 0 ? ShearMatrix::identity(static_cast<int>(xi.u.size()))
                            : std::move(shear);
    return xi;
}

ExperimentConfig cfg(int d, std::uint64_t seed) {
    ExperimentConfig c;
    c.d = d;
    c.sideRanges.assign(d, {0.05, 0.45});
    c.eta = 0.9 / (4.0 * d);
    c.epsilon = 0.5;
    c.delta = 0.2;
    c.seed = seed;
    return c;
}

// independent membership oracle: exhaustive shifts, inverse by Cramer (d = 2)
bool oracle_contains2(const SampleXi& xi, double p0, double p1) {
    double a = xi.shear.at(0, 0), b = xi.shear.at(0, 1);
    double c = xi.shear.at(1, 0), d = xi.shear.at(1, 1);
    double det = a * d - b * c;
    for (int n0 = -2; n0 <= 2; ++n0)
        for (int n1 = -2; n1 <= 2; ++n1) {
            double q0 = p0 + n0, q1 = p1 + n1;
            double c0 = (d * q0 - b * q1) / det;
            double c1 = (-c * q0 + a * q1) / det;
            if (std::fabs(c0) <= xi.u[0] && std::fabs(c1) <= xi.u[1]) return true;
        }
    return false;
}

double oracle_boundary_gap2(const SampleXi& xi, double p0, double p1) {
    double a = xi.shear.at(0, 0), b = xi.shear.at(0, 1);
    double c = xi.shear.at(1, 0), d = xi.shear.at(1, 1);
    double det = a * d - b * c;
    double best = 1e9;
    for (int n0 = -2; n0 <= 2; ++n0)
        for (int n1 = -2; n1 <= 2; ++n1) {
            double q0 = p0 + n0, q1 = p1 + n1;
            double c0 = (d * q0 - b * q1) / det;
            double c1 = (-c * q0 + a * q1) / det;
            best = std::min(best, std::fabs(std::fabs(c0) - xi.u[0]));
            best = std::min(best, std::fabs(std::fabs(c1) - xi.u[1]));
        }
    return best;
}

// independent orbit counter over an explicit index range
long long oracle_count2(const SampleXi& xi, long long mFirst, long long mLast) {
    long long count = 0;
    for (long long m = mFirst; m <= mLast; ++m) {
        double p0 = std::fmod(xi.x[0] + m * xi.alpha[0], 1.0);
        double p1 = std::fmod(xi.x[1] + m * xi.alpha[1], 1.0);
        if (oracle_contains2(xi, p0, p1)) ++count;
    }
    return count;
}

} // namespace

TEST_CASE("box_contains handles wraparound and rejects far points") {
    SampleXi xi = make_xi({0.3}, {0.1}, {0.0});
    CHECK(box_contains(xi, {0.9}));  // lift 0.9 - 1 = -0.1
    CHECK_FALSE(box_contains(xi, {0.5}));
    CHECK(box_contains(xi, {0.3})); // closed box boundary counts as inside
    CHECK_THROWS_AS(box_contains(xi, {0.1, 0.2}), ArgumentError);
}

TEST_CASE("box_contains agrees with the exhaustive-shift oracle") {
    auto c = cfg(2, 314);
    Rng rng = Rng::stream(3, 1, 4);
    for (int rep = 0; rep < 20; ++rep) {
        SampleXi xi = sample_xi(c, rep);
        for (int i = 0; i < 50; ++i) {
            double p0 = rng.nextUnit(), p1 = rng.nextUnit();
            bool lib = box_contains(xi, {p0, p1});
            bool ora = oracle_contains2(xi, p0, p1);
            if (lib != ora) CHECK(oracle_boundary_gap2(xi, p0, p1) < 1e-9);
        }
    }
}

TEST_CASE("discrepancy_direct hand examples") {
    SampleXi xi = make_xi({0.3}, {0.5}, {0.0});
    CHECK(discrepancy_direct(xi, 4) == doctest::Approx(-0.4).epsilon(1e-12));

    // fixed orbit at the center point
    SampleXi fixed = make_xi({0.2, 0.3}, {0.0, 0.0}, {0.0, 0.0});
    double vol = 4.0 * 0.2 * 0.3;
    CHECK(discrepancy_direct(fixed, 25) == doctest::Approx(25.0 * (1.0 - vol)).epsilon(1e-12));

    CHECK_THROWS_AS(discrepancy_direct(xi, 0), ArgumentError);
}

TEST_CASE("discrepancy_direct equals the independent counting oracle") {
    SampleXi xi = make_xi({0.25, 0.25}, {1.0 / 3.0, 0.2}, {0.0, 0.0});
    double got = discrepancy_direct(xi, 15);
    double expect = oracle_count2(xi, 1, 15) - 4.0 * 0.25 * 0.25 * 15;
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));

    auto c = cfg(2, 2718);
    for (int rep = 0; rep < 25; ++rep) {
        SampleXi r = sample_xi(c, rep);
        long long N = 100 + 37 * rep;
        double vol = 4.0 * r.u[0] * r.u[1];
        CHECK(discrepancy_direct(r, N) ==
              doctest::Approx(oracle_count2(r, 1, N) - vol * N).epsilon(1e-9));
    }
}

TEST_CASE("visit count is integral and the index-shift identity holds") {
    auto c = cfg(2, 5050);
    for (int rep = 0; rep < 20; ++rep) {
        SampleXi xi = sample_xi(c, rep);
        long long N = 200 + rep;
        double vol = 4.0 * xi.u[0] * xi.u[1];
        double D = discrepancy_direct(xi, N);
        double countReal = D + vol * N;
        long long count = std::llround(countReal);
        CHECK(std::fabs(countReal - count) < 1e-6);
        CHECK(count >= 0);
        CHECK(count <= N);

        // range 0..N-1 vs 1..N differs by the two endpoint indicators
        long long c0 = oracle_count2(xi, 0, N - 1);
        long long c1 = oracle_count2(xi, 1, N);
        double pN0 = std::fmod(xi.x[0] + N * xi.alpha[0], 1.0);
        double pN1 = std::fmod(xi.x[1] + N * xi.alpha[1], 1.0);
        long long expectDiff = (oracle_contains2(xi, xi.x[0], xi.x[1]) ? 1 : 0) -
                               (oracle_contains2(xi, pN0, pN1) ? 1 : 0);
        CHECK(c0 - c1 == expectDiff);
        CHECK(count == c1);

        // shifting the base point by alpha re-indexes the orbit
        SampleXi shifted = xi;
        shifted.x[0] = std::fmod(xi.x[0] + xi.alpha[0], 1.0);
        shifted.x[1] = std::fmod(xi.x[1] + xi.alpha[1], 1.0);
        CHECK(oracle_count2(shifted, 0, N - 1) == c1);
    }
}

TEST_CASE("smallbox: gamma 0 is bitwise identical; hand case; domain errors") {
    auto c = cfg(1, 606);
    for (int rep = 0; rep < 100; ++rep) {
        SampleXi xi = sample_xi(c, rep);
        long long N = 50 + rep * 7;
        CHECK(discrepancy_smallbox(xi, N, 0.0) == discrepancy_direct(xi, N));
    }

    SampleXi xi = make_xi({0.3}, {0.5}, {0.0});
    // N = 4, gamma = 1/2: box [-0.15, 0.15], visits at m = 2, 4
    CHECK(discrepancy_smallbox(xi, 4, 0.5) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK_THROWS_AS(discrepancy_smallbox(xi, 4, 1.0), ArgumentError);

    SampleXi xi2 = make_xi({0.3, 0.3}, {0.5, 0.1}, {0.0, 0.0});
    CHECK_THROWS_AS(discrepancy_smallbox(xi2, 4, 0.5), ArgumentError); // gamma >= 1/d
}

TEST_CASE("continuous box: hand geometry with the open-box convention") {
    ContinuousLineSpec spec;
    spec.v = {1.0, 0.0};
    spec.x = {0.0, 0.0};
    spec.T = 7.0;
    auto shear = ShearMatrix::identity(2);
    std::vector<double> u = {0.5, 0.3};
    // the line runs along the open box's face: zero time inside
    CHECK(discrepancy_continuous_box(spec, shear, u) ==
          doctest::Approx(-7.0 * 0.15).epsilon(1e-12));

    // interior line: y = 0.1 inside (0, 0.3); x in (0, 0.5) half the period
    spec.x = {0.0, 0.1};
    CHECK(discrepancy_continuous_box(spec, shear, u) ==
          doctest::Approx(7.0 * 0.5 - 7.0 * 0.15).epsilon(1e-9));

    spec.T = 1e-9;
    CHECK(std::fabs(discrepancy_continuous_box(spec, shear, u)) < 1e-8);

    spec.T = 0.0;
    CHECK_THROWS_AS(discrepancy_continuous_box(spec, shear, u), ArgumentError);
    spec.T = 1.0;
    spec.v = {0.0, 0.0};
    CHECK_THROWS_AS(discrepancy_continuous_box(spec, shear, u), ArgumentError);

    // near-but-not-exact face-parallel line is ill-conditioned
    spec.v = {1.0, 0.0};
    spec.x = {0.0, 1e-11};
    CHECK_THROWS_AS(discrepancy_continuous_box(spec, shear, u), DegenerateDirectionError);
}

namespace {

double riemann_box(const ContinuousLineSpec& spec, const SampleXi& xi, double step) {
    // midpoint rule; membership through the open sheared box via Cramer
    double a = xi.shear.at(0, 0), b = xi.shear.at(0, 1);
    double c = xi.shear.at(1, 0), d = xi.shear.at(1, 1);
    double det = a * d - b * c;
    long long steps = static_cast<long long>(spec.T / step);
    long long inside = 0;
    for (long long i = 0; i < steps; ++i) {
        double t = (i + 0.5) * step;
        double p0 = std::fmod(spec.x[0] + spec.v[0] * t, 1.0);
        double p1 = std::fmod(spec.x[1] + spec.v[1] * t, 1.0);
        if (p0 < 0) p0 += 1.0;
        if (p1 < 0) p1 += 1.0;
        bool in = false;
        for (int n0 = -1; n0 <= 1 && !in; ++n0)
            for (int n1 = -1; n1 <= 1 && !in; ++n1) {
                double q0 = p0 + n0, q1 = p1 + n1;
                double c0 = (d * q0 - b * q1) / det;
                double c1 = (-c * q0 + a * q1) / det;
                if (0.0 < c0 && c0 < xi.u[0] && 0.0 < c1 && c1 < xi.u[1]) in = true;
            }
        if (in) ++inside;
    }
    double vol = xi.u[0] * xi.u[1];
    return inside * step - steps * step * vol;
}

} // namespace

TEST_CASE("continuous box matches the quadrature oracle") {
    auto c = cfg(2, 777);
    // the long example instance
    {
        SampleXi xi = sample_xi(c, 0);
        Rng rng = Rng::stream(7, 7, 0);
        ContinuousLineSpec spec;
        spec.v = {rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)};
        spec.x = xi.x;
        spec.T = 10.0;
        double exact = discrepancy_continuous_box(spec, xi.shear, xi.u);
        double quad = riemann_box(spec, xi, 1e-6);
        CHECK(std::fabs(exact - quad) < 1e-4);
    }
    // invariant sweep at a shorter horizon
    for (int rep = 1; rep <= 100; ++rep) {
        SampleXi xi = sample_xi(c, rep);
        Rng rng = Rng::stream(7, 7, rep);
        ContinuousLineSpec spec;
        spec.v = {rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)};
        spec.x = xi.x;
        spec.T = 2.0;
        double exact = discrepancy_continuous_box(spec, xi.shear, xi.u);
        double quad = riemann_box(spec, xi, 1e-6);
        CHECK(std::fabs(exact - quad) < 1e-4);
    }
}

TEST_CASE("continuous ball: hand chord, limits, and domain errors") {
    ContinuousLineSpec spec;
    spec.v = {1.0, 0.0, 0.0};
    spec.x = {0.0, 0.0, 0.0};
    spec.T = 1.0;
    double expect = 0.5 - (4.0 / 3.0) * M_PI * 0.25 * 0.25 * 0.25;
    CHECK(discrepancy_continuous_ball(spec, 0.25) == doctest::Approx(expect).epsilon(1e-12));

    CHECK(std::fabs(discrepancy_continuous_ball(spec, 1e-4)) < 1e-3);

    CHECK_THROWS_AS(discrepancy_continuous_ball(spec, 0.5), ArgumentError);
    ContinuousLineSpec bad;
    bad.v = {1.0, 0.0};
    bad.x = {0.0, 0.0};
    bad.T = 1.0;
    CHECK_THROWS_AS(discrepancy_continuous_ball(bad, 0.25), ArgumentError);
}

TEST_CASE("continuous ball matches the quadrature oracle") {
    Rng rng = Rng::stream(8, 8, 8);
    for (int rep = 0; rep < 20; ++rep) {
        ContinuousLineSpec spec;
        spec.v = {rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)};
        spec.x = {rng.nextUnit(), rng.nextUnit(), rng.nextUnit()};
        spec.T = 2.0;
        double r = rng.uniform(0.1, 0.45);
        double exact = discrepancy_continuous_ball(spec, r);

        double step = 1e-6;
        long long steps = static_cast<long long>(spec.T / step);
        long long inside = 0;
        for (long long i = 0; i < steps; ++i) {
            double t = (i + 0.5) * step;
            bool in = false;
            double p[3];
            for (int j = 0; j < 3; ++j) {
                p[j] = std::fmod(spec.x[j] + spec.v[j] * t, 1.0);
                if (p[j] < 0) p[j] += 1.0;
            }
            for (int n0 = -1; n0 <= 1 && !in; ++n0)
                for (int n1 = -1; n1 <= 1 && !in; ++n1)
                    for (int n2 = -1; n2 <= 1 && !in; ++n2) {
                        double dx = p[0] - n0, dy = p[1] - n1, dz = p[2] - n2;
                        if (dx * dx + dy * dy + dz * dz <= r * r) in = true;
                    }
            if (in) ++inside;
        }
        double quad = inside * step - steps * step * (4.0 / 3.0) * M_PI * r * r * r;
        CHECK(std::fabs(exact - quad) < 1e-4);
    }
}
