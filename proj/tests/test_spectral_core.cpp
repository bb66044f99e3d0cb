#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fnolab/random_fields.hpp"
#include "fnolab/spectral.hpp"

using namespace fnolab;

namespace {

GridSpec grid(int n = 128, int kmax = 32) {
    GridSpec g;
    g.num_points = n;
    g.k_max = kmax;
    return g;
}

SpatialField random_field(const GridSpec& g, std::uint64_t seed) {
    Rng rng(seed);
    SpatialField u{g, std::vector<double>(g.num_points)};
    for (auto& v : u.values) v = rng.normal();
    return u;
}

// Direct O(N^2) symmetric-range convolution, the oracle for the FFT route.
std::vector<double> naive_convolve(const std::vector<double>& a,
                                   const std::vector<double>& b, const GridSpec& g) {
    const int n = g.num_points;
    std::vector<double> fa = half_to_full(a, n), fb = half_to_full(b, n);
    std::vector<double> out(n, 0.0);
    for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) out[k] += fa[m] * fb[((k - m) % n + n) % n];
    std::vector<double> half = full_to_half(out);
    for (auto& v : half) v /= g.length;
    return half;
}

}  // namespace

TEST_CASE("constant field transforms to a DC-only spectrum") {
    GridSpec g = grid();
    SpatialField u{g, std::vector<double>(g.num_points, 3.25)};
    SpectralField s = forward_transform(u);
    CHECK(s.coeffs[0].real() == doctest::Approx(3.25).epsilon(1e-14));
    for (int n = 1; n < g.half_size(); ++n) CHECK(std::abs(s.coeffs[n]) < 1e-13);
}

TEST_CASE("single cosine concentrates in its mode bin") {
    GridSpec g = grid();
    const int m = 7;
    SpatialField u{g, std::vector<double>(g.num_points)};
    for (int j = 0; j < g.num_points; ++j)
        u.values[j] = std::cos(2.0 * std::numbers::pi * m * j / g.num_points);
    SpectralField s = forward_transform(u);
    for (int n = 0; n < g.half_size(); ++n) {
        if (n == m)
            CHECK(s.coeffs[n].real() == doctest::Approx(0.5).epsilon(1e-12));
        else
            CHECK(std::abs(s.coeffs[n]) < 1e-12);
    }
}

TEST_CASE("unit bin synthesizes a unit-amplitude cosine") {
    GridSpec g = grid();
    SpectralField s{g, std::vector<cplx>(g.half_size(), cplx{0.0, 0.0})};
    s.coeffs[1] = cplx{1.0, 0.0};
    SpatialField u = inverse_transform(s);
    for (int j = 0; j < g.num_points; ++j)
        CHECK(u.values[j] ==
              doctest::Approx(2.0 * std::cos(2.0 * std::numbers::pi * j / g.num_points))
                  .epsilon(1e-12));
}

TEST_CASE("round-trip reproduces random fields to 1e-12") {
    GridSpec g = grid();
    for (int t = 0; t < 100; ++t) {
        SpatialField u = random_field(g, 1000 + t);
        SpatialField v = inverse_transform(forward_transform(u));
        double err = 0.0, scale = 0.0;
        for (int j = 0; j < g.num_points; ++j) {
            err = std::max(err, std::abs(u.values[j] - v.values[j]));
            scale = std::max(scale, std::abs(u.values[j]));
        }
        CHECK(err <= 1e-12 * scale);
    }
}

TEST_CASE("all-zero spectrum inverts to the zero field") {
    GridSpec g = grid();
    SpectralField s{g, std::vector<cplx>(g.half_size(), cplx{0.0, 0.0})};
    for (double v : inverse_transform(s).values) CHECK(v == 0.0);
}

TEST_CASE("inverse transform rejects corrupted self-conjugate bins") {
    GridSpec g = grid();
    SpectralField s{g, std::vector<cplx>(g.half_size(), cplx{0.0, 0.0})};
    s.coeffs[0] = cplx{1.0, 0.5};
    CHECK_THROWS_AS(inverse_transform(s), std::invalid_argument);
    s.coeffs[0] = cplx{1.0, 0.0};
    s.coeffs.back() = cplx{0.0, 1e-3};
    CHECK_THROWS_AS(inverse_transform(s), std::invalid_argument);
}

TEST_CASE("Parseval holds under the chosen convention") {
    GridSpec g = grid();
    for (int t = 0; t < 20; ++t) {
        SpatialField u = random_field(g, 7000 + t);
        const double es = spectral_energy(forward_transform(u));
        const double ex = spatial_energy(u);
        CHECK(es == doctest::Approx(ex).epsilon(1e-10));
    }
}

TEST_CASE("L-scaled delta is the convolution identity") {
    GridSpec g = grid();
    Rng rng(5);
    std::vector<double> b(g.half_size());
    for (auto& v : b) v = std::abs(rng.normal());
    std::vector<double> a(g.half_size(), 0.0);
    a[0] = g.length;
    const auto c = circular_convolve(a, b, g);
    for (int n = 0; n < g.half_size(); ++n)
        CHECK(c[n] == doctest::Approx(b[n]).epsilon(1e-12));
}

TEST_CASE("indicator self-convolution is triangular with doubled support") {
    GridSpec g = grid();
    const int k = 10;
    std::vector<double> ind(g.half_size(), 0.0);
    for (int n = 0; n <= k; ++n) ind[n] = 1.0;
    const auto c = circular_convolve(ind, ind, g);
    for (int n = 0; n < g.half_size(); ++n) {
        if (n <= 2 * k)
            CHECK(c[n] > 0.0);
        else
            CHECK(std::abs(c[n]) < 1e-13);
    }
    // triangle shape: the count of lattice pairs m + m' = n decreases linearly
    CHECK(c[0] == doctest::Approx((2 * k + 1) / g.length).epsilon(1e-12));
    CHECK(c[2 * k] == doctest::Approx(1.0 / g.length).epsilon(1e-12));
}

TEST_CASE("circular convolution matches the naive sum at every supported N") {
    for (int n : {8, 16, 64, 128, 96}) {
        GridSpec g = grid(n, n / 2);
        Rng rng(42 + n);
        std::vector<double> a(g.half_size()), b(g.half_size());
        for (auto& v : a) v = rng.normal();
        for (auto& v : b) v = rng.normal();
        const auto fft_route = circular_convolve(a, b, g);
        const auto naive = naive_convolve(a, b, g);
        double scale = 0.0;
        for (double v : naive) scale = std::max(scale, std::abs(v));
        for (int m = 0; m < g.half_size(); ++m)
            CHECK(std::abs(fft_route[m] - naive[m]) <= 1e-12 * std::max(1.0, scale));
        // commutativity
        const auto ba = circular_convolve(b, a, g);
        for (int m = 0; m < g.half_size(); ++m)
            CHECK(ba[m] == doctest::Approx(fft_route[m]).epsilon(1e-12));
    }
}

TEST_CASE("convolution power: identity, support, and naive triple sum") {
    GridSpec g = grid();
    Rng rng(99);
    std::vector<double> h(g.half_size());
    for (auto& v : h) v = std::abs(rng.normal());
    CHECK_THROWS_AS(convolution_power(h, 0, g), std::invalid_argument);
    const auto p1 = convolution_power(h, 1, g);
    for (int n = 0; n < g.half_size(); ++n) CHECK(p1[n] == h[n]);

    std::vector<double> ind(g.half_size(), 0.0);
    for (int n = 0; n <= g.k_max; ++n) ind[n] = 1.0;
    const auto p2 = convolution_power(ind, 2, g);
    for (int n = 2 * g.k_max + 1; n < g.half_size(); ++n) CHECK(std::abs(p2[n]) < 1e-12);

    const auto p3 = convolution_power(h, 3, g);
    const auto naive3 = naive_convolve(naive_convolve(h, h, g), h, g);
    for (int n = 0; n < g.half_size(); ++n)
        CHECK(p3[n] == doctest::Approx(naive3[n]).epsilon(1e-10));
}

TEST_CASE("convolution powers compose additively") {
    GridSpec g = grid(64, 32);
    Rng rng(123);
    std::vector<double> h(g.half_size());
    for (auto& v : h) v = std::abs(rng.normal());
    const auto p5 = convolution_power(h, 5, g);
    const auto p23 = circular_convolve(convolution_power(h, 2, g),
                                       convolution_power(h, 3, g), g);
    double scale = 0.0;
    for (double v : p5) scale = std::max(scale, std::abs(v));
    for (int n = 0; n < g.half_size(); ++n)
        CHECK(std::abs(p5[n] - p23[n]) <= 1e-10 * scale);
}

TEST_CASE("truncation: identity at Nyquist, kills single high mode, projection") {
    GridSpec g = grid();
    Rng rng(7);
    SpectralField s{g, std::vector<cplx>(g.half_size())};
    for (int n = 1; n < g.half_size() - 1; ++n) s.coeffs[n] = cplx{rng.normal(), rng.normal()};
    s.coeffs[0] = cplx{rng.normal(), 0.0};
    s.coeffs.back() = cplx{rng.normal(), 0.0};

    const SpectralField id = truncate(s, g.nyquist());
    for (int n = 0; n < g.half_size(); ++n) CHECK(id.coeffs[n] == s.coeffs[n]);

    SpectralField hi{g, std::vector<cplx>(g.half_size(), cplx{0.0, 0.0})};
    hi.coeffs[g.k_max + 5] = cplx{1.0, -1.0};
    const SpectralField dead = truncate(hi, g.k_max);
    for (const auto& c : dead.coeffs) CHECK(std::abs(c) == 0.0);

    for (int t = 0; t < 1000; ++t) {
        SpectralField r{g, std::vector<cplx>(g.half_size())};
        Rng rr(50000 + t);
        for (int n = 1; n < g.half_size() - 1; ++n) r.coeffs[n] = cplx{rr.normal(), rr.normal()};
        r.coeffs[0] = cplx{rr.normal(), 0.0};
        r.coeffs.back() = cplx{rr.normal(), 0.0};
        const SpectralField t1 = truncate(r, g.k_max);
        const SpectralField t2 = truncate(t1, g.k_max);
        CHECK(spectral_energy(t1) <= spectral_energy(r) + 1e-15);
        for (int n = 0; n < g.half_size(); ++n) CHECK(t2.coeffs[n] == t1.coeffs[n]);
    }
}

TEST_CASE("band-limited synthesis refines the grid exactly") {
    GridSpec g = grid();
    GrfSpec spec;
    spec.grid = g;
    spec.length_scale = g.length / 16.0;
    const SpectralField s = truncate(sample_grf_spectrum(spec, 31), g.k_max);
    const std::vector<double> fine = synthesize(s.coeffs, 4 * g.num_points);
    const std::vector<double> coarse = inverse_half(s.coeffs, g.num_points);
    for (int j = 0; j < g.num_points; ++j)
        CHECK(fine[4 * j] == doctest::Approx(coarse[j]).epsilon(1e-11));
    // refining must not create energy beyond the original band
    const auto back = forward_half(fine);
    for (std::size_t n = g.half_size(); n < back.size(); ++n)
        CHECK(std::abs(back[n]) < 1e-13);
}
