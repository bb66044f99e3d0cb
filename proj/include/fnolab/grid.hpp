#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fnolab {

using cplx = std::complex<double>;

// Periodic 1-D grid. The half spectrum of a real signal has N/2+1 bins,
// indexed by integer mode n = 0..N/2 (cycles per domain).
struct GridSpec {
    double length = 2.0 * std::numbers::pi;
    int num_points = 128;
    int k_max = 32;

    int half_size() const { return num_points / 2 + 1; }
    int nyquist() const { return num_points / 2; }

    void validate() const {
        if (length <= 0.0) throw std::invalid_argument("GridSpec: length must be positive");
        if (num_points <= 0 || num_points % 2 != 0)
            throw std::invalid_argument("GridSpec: num_points must be positive and even");
        if (k_max <= 0 || k_max > nyquist())
            throw std::invalid_argument("GridSpec: need 0 < k_max <= N/2");
    }

    bool operator==(const GridSpec& o) const {
        return length == o.length && num_points == o.num_points && k_max == o.k_max;
    }
};

struct SpatialField {
    GridSpec grid;
    std::vector<double> values;  // length N
};

// Half spectrum of a real spatial signal under the Fourier-series convention
// coeffs[n] = (1/N) sum_j u(x_j) exp(-2 pi i n j / N).  Bins 0 and N/2 are real.
struct SpectralField {
    GridSpec grid;
    std::vector<cplx> coeffs;  // length N/2 + 1
};

// Weight for summing a half-spectrum quantity over the full symmetric mode
// range: interior bins count twice, the two self-conjugate bins once.
inline double sym_weight(int n, int half_size) {
    return (n == 0 || n == half_size - 1) ? 1.0 : 2.0;
}

inline double sym_sum(const std::vector<double>& half) {
    double s = 0.0;
    for (std::size_t n = 0; n < half.size(); ++n)
        s += sym_weight(static_cast<int>(n), static_cast<int>(half.size())) * half[n];
    return s;
}

}  // namespace fnolab
