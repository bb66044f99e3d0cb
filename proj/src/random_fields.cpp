#include "fnolab/random_fields.hpp"

#include <cmath>

#include "fnolab/spectral.hpp"

namespace fnolab {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t layer,
                          std::uint64_t replica, std::uint64_t role) {
    std::uint64_t s = mix64(root ^ 0xa0761d6478bd642full);
    s = mix64(s ^ layer);
    s = mix64(s ^ (replica * 0xe7037ed1a0b428dbull));
    s = mix64(s ^ (role * 0x8ebc6af09c88c6e3ull));
    return s;
}

std::uint64_t Rng::next_u64() {
    // splitmix64 stream; cheap, full-period, and stable across platforms
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
}

void GrfSpec::validate() const {
    grid.validate();
    if (length_scale <= 0.0) throw std::invalid_argument("GrfSpec: length_scale must be positive");
    if (variance_amplitude <= 0.0)
        throw std::invalid_argument("GrfSpec: variance_amplitude must be positive");
}

std::vector<double> grf_spectral_density(const GrfSpec& spec) {
    spec.validate();
    const GridSpec& g = spec.grid;
    const int n = g.num_points;
    // Periodify the squared-exponential covariance by image summation, then
    // take per-mode coefficients of the covariance row.
    std::vector<double> row(n, 0.0);
    for (int j = 0; j < n; ++j) {
        const double x = g.length * j / n;
        for (int p = -2; p <= 2; ++p) {
            const double d = x + p * g.length;
            row[j] += spec.variance_amplitude * std::exp(-(d * d) / (spec.length_scale * spec.length_scale));
        }
    }
    std::vector<cplx> coeffs = forward_half(row);
    std::vector<double> dens(coeffs.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        dens[k] = coeffs[k].real();
        if (dens[k] < 0.0) {
            if (dens[k] < -1e-12 * spec.variance_amplitude)
                throw std::runtime_error("grf_spectral_density: covariance not PSD on grid");
            dens[k] = 0.0;
        }
    }
    return dens;
}

SpectralField sample_grf_spectrum(const GrfSpec& spec, std::uint64_t seed) {
    const std::vector<double> dens = grf_spectral_density(spec);
    const int nh = static_cast<int>(dens.size());
    Rng rng(seed);
    std::vector<cplx> c(nh);
    c[0] = cplx{std::sqrt(dens[0]) * rng.normal(), 0.0};
    for (int k = 1; k < nh - 1; ++k) {
        const double sd = std::sqrt(dens[k] / 2.0);
        c[k] = cplx{sd * rng.normal(), sd * rng.normal()};
    }
    c[nh - 1] = cplx{std::sqrt(dens[nh - 1]) * rng.normal(), 0.0};
    return SpectralField{spec.grid, std::move(c)};
}

SpatialField sample_grf(const GrfSpec& spec, std::uint64_t seed) {
    return inverse_transform(sample_grf_spectrum(spec, seed));
}

void WeightVarianceProfile::validate() const {
    for (double v : values)
        if (!(v >= 0.0)) throw std::invalid_argument("WeightVarianceProfile: values must be >= 0");
}

WeightVarianceProfile WeightVarianceProfile::scaled(double factor) const {
    WeightVarianceProfile out = *this;
    for (auto& v : out.values) v *= factor;
    return out;
}

WeightVarianceProfile step_profile(double level, int k_max, const GridSpec& grid) {
    if (level < 0.0) throw std::invalid_argument("step_profile: level must be >= 0");
    if (k_max > grid.nyquist()) throw std::invalid_argument("step_profile: k_max > N/2");
    WeightVarianceProfile p;
    p.values.assign(grid.half_size(), 0.0);
    for (int n = 0; n <= k_max; ++n) p.values[n] = level;
    return p;
}

SpectralWeightTensor sample_weights(const WeightVarianceProfile& profile,
                                    int n_out, int n_in, const GridSpec& grid,
                                    std::uint64_t seed) {
    if (n_out < 1 || n_in < 1)
        throw std::invalid_argument("sample_weights: channel counts must be >= 1");
    profile.validate();
    if (static_cast<int>(profile.values.size()) != grid.half_size())
        throw std::invalid_argument("sample_weights: profile length != N/2+1");
    const int nh = grid.half_size();
    SpectralWeightTensor t;
    t.n_out = n_out;
    t.n_in = n_in;
    t.grid = grid;
    t.entries.assign(static_cast<std::size_t>(n_out) * n_in * nh, cplx{0.0, 0.0});
    Rng rng(seed);
    for (int i = 0; i < n_out; ++i) {
        for (int j = 0; j < n_in; ++j) {
            const std::size_t base = (static_cast<std::size_t>(i) * n_in + j) * nh;
            for (int n = 0; n < nh; ++n) {
                const double cr = profile.values[n];
                if (cr == 0.0) continue;
                if (n == 0 || n == nh - 1) {
                    t.entries[base + n] = cplx{std::sqrt(cr / n_in) * rng.normal(), 0.0};
                } else {
                    const double sd = std::sqrt(cr / (2.0 * n_in));
                    t.entries[base + n] = cplx{sd * rng.normal(), sd * rng.normal()};
                }
            }
        }
    }
    return t;
}

std::vector<double> sample_lift_matrix(int n_out, int n_in, double c_w,
                                       std::uint64_t seed) {
    if (n_out < 1 || n_in < 1)
        throw std::invalid_argument("sample_lift_matrix: channel counts must be >= 1");
    Rng rng(seed);
    std::vector<double> w(static_cast<std::size_t>(n_out) * n_in);
    const double sd = std::sqrt(c_w / n_in);
    for (auto& x : w) x = sd * rng.normal();
    return w;
}

}  // namespace fnolab
