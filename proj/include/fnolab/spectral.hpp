#pragma once

#include <vector>

#include "fnolab/grid.hpp"

namespace fnolab {

// Real-input DFT pair in the Fourier-series normalization:
//   forward:  coeffs[n] = (1/N) sum_j u(x_j) e^{-2 pi i n j / N}
//   inverse:  u(x_j)    = sum_{n=-N/2}^{N/2-1} coeffs[|n|]^(*) e^{+2 pi i n j / N}
// forward approximates (1/L) * integral of u(x) e^{-2 pi i n x / L} dx.
std::vector<cplx> forward_half(const std::vector<double>& values);
std::vector<double> inverse_half(const std::vector<cplx>& coeffs, int num_points);

SpectralField forward_transform(const SpatialField& u);
// Throws if the self-conjugate bins (0 and N/2) carry imaginary parts.
SpatialField inverse_transform(const SpectralField& s);

// Band-limited resampling: evaluate the signal with the given half spectrum
// on a grid of new_points >= N points (exact for band-limited signals).
std::vector<double> synthesize(const std::vector<cplx>& coeffs, int new_points);

// Spectral energy L * sum_sym |coeffs|^2; equals (L/N) sum_x u(x)^2 (Parseval).
double spectral_energy(const SpectralField& s);
double spatial_energy(const SpatialField& u);

// Per-frequency circular convolution on the symmetric mode range with the
// domain normalization folded in exactly once:
//   (a*b)(n) = (1/L) sum_m a(m) b(n-m),  indices wrapping mod N.
// Inputs and output are half-spectrum diagonals (symmetric extension is
// handled internally).  Throws on length mismatch.
std::vector<double> circular_convolve(const std::vector<double>& a,
                                      const std::vector<double>& b,
                                      const GridSpec& grid);

// h^{*k} by repeated circular_convolve; k = 0 is rejected.
std::vector<double> convolution_power(const std::vector<double>& h, int k,
                                      const GridSpec& grid);

// Zero all bins with n > k_max; bins n <= k_max unchanged.
SpectralField truncate(const SpectralField& s, int k_max);

// Helpers shared by the estimators and the theory engine.
std::vector<double> half_to_full(const std::vector<double>& half, int num_points);
std::vector<double> full_to_half(const std::vector<double>& full);

}  // namespace fnolab
