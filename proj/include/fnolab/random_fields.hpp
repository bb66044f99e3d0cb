#pragma once

#include <cstdint>
#include <vector>

#include "fnolab/grid.hpp"

namespace fnolab {

// ---- deterministic seeding -------------------------------------------------

// 64-bit finalizer (splitmix64 increment + mix).  Streams for distinct
// (layer, replica, role) labels are derived from one root seed so replicas
// can be sampled independently and reproducibly.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t layer,
                          std::uint64_t replica, std::uint64_t role);

// mt19937_64 with a portable polar-method normal generator (the standard
// library's normal_distribution sequence is implementation defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    double uniform();   // (0,1)
    double normal();    // standard normal
    std::uint64_t next_u64();

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// ---- Gaussian random field inputs -------------------------------------------

struct GrfSpec {
    GridSpec grid;
    double length_scale = 2.0 * std::numbers::pi / 8.0;  // default L/8
    double variance_amplitude = 1.0;

    void validate() const;
};

// Per-mode spectral density of the periodified squared-exponential covariance
// amp * sum_images exp(-(x - y + p L)^2 / K^2); nonnegative by construction
// (checked, signalling a PSD violation otherwise).
std::vector<double> grf_spectral_density(const GrfSpec& spec);

// Stationary mean-zero field with the periodified covariance, sampled
// spectrally: one independent complex Gaussian per mode.
SpatialField sample_grf(const GrfSpec& spec, std::uint64_t seed);
SpectralField sample_grf_spectrum(const GrfSpec& spec, std::uint64_t seed);

// ---- initialization ensemble -------------------------------------------------

struct WeightVarianceProfile {
    std::vector<double> values;  // C_R(n), n = 0..N/2, nonnegative

    void validate() const;
    WeightVarianceProfile scaled(double factor) const;
};

// C_R(n) = level for n <= k_max, else 0.
WeightVarianceProfile step_profile(double level, int k_max, const GridSpec& grid);

// Complex Gaussian spectral multiplier tensor R_ij(n).  Re and Im of each
// entry are independent N(0, C_R(n)/(2 n_in)); the self-conjugate bins n = 0
// and n = N/2 are real with variance C_R(n)/n_in.  Entries with C_R(n) = 0
// are exactly zero.
struct SpectralWeightTensor {
    int n_out = 0;
    int n_in = 0;
    GridSpec grid;
    std::vector<cplx> entries;  // index ((i * n_in) + j) * (N/2+1) + n

    const cplx& at(int i, int j, int n) const {
        return entries[(static_cast<std::size_t>(i) * n_in + j) * grid.half_size() + n];
    }
};

SpectralWeightTensor sample_weights(const WeightVarianceProfile& profile,
                                    int n_out, int n_in, const GridSpec& grid,
                                    std::uint64_t seed);

// Dense real matrix for the lifting layer, entries N(0, c_w / n_in).
std::vector<double> sample_lift_matrix(int n_out, int n_in, double c_w,
                                       std::uint64_t seed);

}  // namespace fnolab
