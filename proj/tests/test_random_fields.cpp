#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fnolab/random_fields.hpp"
#include "fnolab/spectral.hpp"

using namespace fnolab;

namespace {
GridSpec small_grid(int n = 64, int kmax = 32) {
    GridSpec g;
    g.num_points = n;
    g.k_max = kmax;
    return g;
}
}  // namespace

TEST_CASE("identical seeds give bit-identical fields") {
    GrfSpec spec;
    spec.grid = small_grid();
    const SpatialField a = sample_grf(spec, 777);
    const SpatialField b = sample_grf(spec, 777);
    for (int j = 0; j < spec.grid.num_points; ++j) CHECK(a.values[j] == b.values[j]);
    const SpatialField c = sample_grf(spec, 778);
    bool any_diff = false;
    for (int j = 0; j < spec.grid.num_points; ++j) any_diff |= (a.values[j] != c.values[j]);
    CHECK(any_diff);
}

TEST_CASE("GRF ensemble mean vanishes within 4 standard errors per point") {
    GrfSpec spec;
    spec.grid = small_grid();
    const int samples = 10000;
    std::vector<double> mean(spec.grid.num_points, 0.0), sq(spec.grid.num_points, 0.0);
    for (int s = 0; s < samples; ++s) {
        const SpatialField u = sample_grf(spec, 10000 + s);
        for (int j = 0; j < spec.grid.num_points; ++j) {
            mean[j] += u.values[j];
            sq[j] += u.values[j] * u.values[j];
        }
    }
    for (int j = 0; j < spec.grid.num_points; ++j) {
        mean[j] /= samples;
        const double var = sq[j] / samples - mean[j] * mean[j];
        const double se = std::sqrt(var / samples);
        CHECK(std::abs(mean[j]) <= 4.0 * se);
    }
}

TEST_CASE("GRF pointwise variance matches the amplitude within 5%") {
    GrfSpec spec;
    spec.grid = small_grid();
    spec.variance_amplitude = 2.5;
    const int samples = 10000;
    double sq = 0.0;
    for (int s = 0; s < samples; ++s) {
        const SpatialField u = sample_grf(spec, 400000 + s);
        sq += u.values[11] * u.values[11];
    }
    const double var = sq / samples;
    // target variance is the periodified covariance at lag zero
    const double target = sym_sum(grf_spectral_density(spec));
    CHECK(var == doctest::Approx(target).epsilon(0.05));
    CHECK(target == doctest::Approx(spec.variance_amplitude).epsilon(0.01));
}

TEST_CASE("GRF covariance matches the periodified squared exponential") {
    GrfSpec spec;
    spec.grid = small_grid();
    spec.length_scale = spec.grid.length / 6.0;  // wide enough to exercise wrap
    const int samples = 10000;
    const int n = spec.grid.num_points;
    std::vector<double> prod(n, 0.0), prod_sq(n, 0.0);
    for (int s = 0; s < samples; ++s) {
        const SpatialField u = sample_grf(spec, 90000 + s);
        for (int lag = 0; lag < n; ++lag) {
            const double p = u.values[0] * u.values[lag];
            prod[lag] += p;
            prod_sq[lag] += p * p;
        }
    }
    // target: image-summed covariance row
    for (int lag = 0; lag < n; ++lag) {
        prod[lag] /= samples;
        const double var = prod_sq[lag] / samples - prod[lag] * prod[lag];
        const double se = std::sqrt(var / samples);
        double target = 0.0;
        const double x = spec.grid.length * lag / n;
        for (int p = -2; p <= 2; ++p) {
            const double d = x + p * spec.grid.length;
            target += std::exp(-(d * d) / (spec.length_scale * spec.length_scale));
        }
        CHECK(std::abs(prod[lag] - target) <= 5.0 * se);
    }
}

TEST_CASE("step profile realizes the band level") {
    GridSpec g;
    g.num_points = 128;
    g.k_max = 32;
    const WeightVarianceProfile p = step_profile(1.0, 32, g);
    REQUIRE(static_cast<int>(p.values.size()) == 65);
    for (int n = 0; n <= 32; ++n) CHECK(p.values[n] == 1.0);
    for (int n = 33; n <= 64; ++n) CHECK(p.values[n] == 0.0);
    const WeightVarianceProfile zero = step_profile(0.0, 32, g);
    for (double v : zero.values) CHECK(v == 0.0);
    const WeightVarianceProfile lv = step_profile(1.15, 32, g);
    for (int n = 0; n <= 32; ++n) CHECK(lv.values[n] == 1.15);
}

TEST_CASE("weight tensor second moments follow C_R(n) / (2 n_in)") {
    GridSpec g = small_grid(16, 6);
    const WeightVarianceProfile p = step_profile(0.7, 6, g);
    const int n_in = 3;
    const int draws = 100000;
    std::vector<double> re2(g.half_size(), 0.0), reim(g.half_size(), 0.0);
    std::vector<double> re2sq(g.half_size(), 0.0);
    for (int d = 0; d < draws; ++d) {
        const SpectralWeightTensor t = sample_weights(p, 1, n_in, g, 1234567 + d);
        for (int n = 0; n < g.half_size(); ++n) {
            const cplx e = t.at(0, 1, n);
            re2[n] += e.real() * e.real();
            re2sq[n] += e.real() * e.real() * e.real() * e.real();
            reim[n] += e.real() * e.imag();
        }
    }
    for (int n = 1; n <= 6; ++n) {
        const double target = 0.7 / (2.0 * n_in);
        CHECK(re2[n] / draws == doctest::Approx(target).epsilon(0.03));
        // E[Re Im] = 0 within 4 standard errors
        const double se_ri = target / std::sqrt(static_cast<double>(draws));
        CHECK(std::abs(reim[n] / draws) <= 4.0 * se_ri);
        // Var(Re^2) = 2 (C_R / (2 n_in))^2 for a centered Gaussian component
        const double m2 = re2[n] / draws;
        const double var_re2 = re2sq[n] / draws - m2 * m2;
        CHECK(var_re2 == doctest::Approx(2.0 * target * target).epsilon(0.10));
    }
    // self-conjugate bin: real with variance C_R / n_in
    CHECK(re2[0] / draws == doctest::Approx(0.7 / n_in).epsilon(0.03));
    for (int d = 0; d < 100; ++d) {
        const SpectralWeightTensor t = sample_weights(p, 2, 2, g, 999 + d);
        for (int n = 7; n < g.half_size(); ++n)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) CHECK(std::abs(t.at(i, j, n)) == 0.0);
        CHECK(t.at(0, 0, 0).imag() == 0.0);
    }
}

TEST_CASE("derived seed streams are pairwise uncorrelated") {
    const int draws = 100000;  // puts the 0.01 bound at ~3 standard errors
    const std::uint64_t root = 555;
    auto stream = [&](std::uint64_t layer, std::uint64_t rep, std::uint64_t role) {
        Rng rng(derive_seed(root, layer, rep, role));
        std::vector<double> v(draws);
        for (auto& x : v) x = rng.normal();
        return v;
    };
    const std::vector<std::vector<double>> streams = {
        stream(0, 0, 0), stream(1, 0, 0), stream(0, 1, 0), stream(0, 0, 1), stream(2, 3, 1)};
    for (std::size_t a = 0; a < streams.size(); ++a)
        for (std::size_t b = a + 1; b < streams.size(); ++b) {
            double dot = 0.0;
            for (int i = 0; i < draws; ++i) dot += streams[a][i] * streams[b][i];
            CHECK(std::abs(dot / draws) < 0.01);
        }
}

TEST_CASE("spectral density is nonnegative and profile validation rejects negatives") {
    GrfSpec spec;
    spec.grid = small_grid();
    for (double v : grf_spectral_density(spec)) CHECK(v >= 0.0);
    WeightVarianceProfile p;
    p.values = {1.0, -0.5};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
