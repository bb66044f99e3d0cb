#include "fnolab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace fnolab {

namespace {

// FFTW plans keyed by transform size.  Planning is not thread safe, so the
// cache is guarded; execution uses the new-array interface on caller buffers
// (plans are created FFTW_UNALIGNED so any buffer alignment is acceptable).
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache c;
        return c;
    }

    fftw_plan r2c(int n) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = r2c_.find(n);
        if (it != r2c_.end()) return it->second;
        std::vector<double> in(n);
        std::vector<cplx> out(n / 2 + 1);
        fftw_plan p = fftw_plan_dft_r2c_1d(
            n, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        r2c_[n] = p;
        return p;
    }

    fftw_plan c2r(int n) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = c2r_.find(n);
        if (it != c2r_.end()) return it->second;
        std::vector<cplx> in(n / 2 + 1);
        std::vector<double> out(n);
        fftw_plan p = fftw_plan_dft_c2r_1d(
            n, reinterpret_cast<fftw_complex*>(in.data()), out.data(),
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        c2r_[n] = p;
        return p;
    }

private:
    std::mutex mu_;
    std::map<int, fftw_plan> r2c_, c2r_;
};

}  // namespace

std::vector<cplx> forward_half(const std::vector<double>& values) {
    const int n = static_cast<int>(values.size());
    std::vector<double> in(values);
    std::vector<cplx> out(n / 2 + 1);
    fftw_execute_dft_r2c(PlanCache::instance().r2c(n), in.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
    const double inv = 1.0 / n;
    for (auto& c : out) c *= inv;
    return out;
}

std::vector<double> inverse_half(const std::vector<cplx>& coeffs, int num_points) {
    std::vector<cplx> in(coeffs);  // c2r destroys its input
    std::vector<double> out(num_points);
    fftw_execute_dft_c2r(PlanCache::instance().c2r(num_points),
                         reinterpret_cast<fftw_complex*>(in.data()), out.data());
    return out;  // FFTW's unnormalized c2r supplies the required factor N
}

SpectralField forward_transform(const SpatialField& u) {
    u.grid.validate();
    if (static_cast<int>(u.values.size()) != u.grid.num_points)
        throw std::invalid_argument("forward_transform: value count != num_points");
    return SpectralField{u.grid, forward_half(u.values)};
}

SpatialField inverse_transform(const SpectralField& s) {
    s.grid.validate();
    const int nh = s.grid.half_size();
    if (static_cast<int>(s.coeffs.size()) != nh)
        throw std::invalid_argument("inverse_transform: coefficient count != N/2+1");
    const double tol = 1e-12;
    double scale = 0.0;
    for (const auto& c : s.coeffs) scale = std::max(scale, std::abs(c));
    if (std::abs(s.coeffs.front().imag()) > tol * std::max(1.0, scale) ||
        std::abs(s.coeffs.back().imag()) > tol * std::max(1.0, scale))
        throw std::invalid_argument(
            "inverse_transform: self-conjugate bins 0 and N/2 must be real");
    return SpatialField{s.grid, inverse_half(s.coeffs, s.grid.num_points)};
}

std::vector<double> synthesize(const std::vector<cplx>& coeffs, int new_points) {
    const int nh_new = new_points / 2 + 1;
    if (static_cast<int>(coeffs.size()) > nh_new)
        throw std::invalid_argument("synthesize: target grid too coarse");
    std::vector<cplx> padded(nh_new, cplx{0.0, 0.0});
    std::copy(coeffs.begin(), coeffs.end(), padded.begin());
    // The source Nyquist bin is self-conjugate (counted once); as an interior
    // bin of the finer grid it would be counted twice, so split it.
    if (static_cast<int>(coeffs.size()) < nh_new && coeffs.size() > 1)
        padded[coeffs.size() - 1] = cplx{coeffs.back().real() * 0.5, 0.0};
    return inverse_half(padded, new_points);
}

double spectral_energy(const SpectralField& s) {
    double acc = 0.0;
    const int nh = static_cast<int>(s.coeffs.size());
    for (int n = 0; n < nh; ++n) acc += sym_weight(n, nh) * std::norm(s.coeffs[n]);
    return s.grid.length * acc;
}

double spatial_energy(const SpatialField& u) {
    double acc = 0.0;
    for (double v : u.values) acc += v * v;
    return u.grid.length * acc / static_cast<double>(u.values.size());
}

std::vector<double> half_to_full(const std::vector<double>& half, int num_points) {
    const int nh = num_points / 2 + 1;
    if (static_cast<int>(half.size()) != nh)
        throw std::invalid_argument("half_to_full: length mismatch");
    std::vector<double> full(num_points, 0.0);
    for (int n = 0; n < nh; ++n) full[n] = half[n];
    for (int n = 1; n < nh - 1; ++n) full[num_points - n] = half[n];
    return full;
}

std::vector<double> full_to_half(const std::vector<double>& full) {
    const int n = static_cast<int>(full.size());
    std::vector<double> half(n / 2 + 1);
    for (int k = 0; k <= n / 2; ++k) half[k] = full[k];
    return half;
}

std::vector<double> circular_convolve(const std::vector<double>& a,
                                      const std::vector<double>& b,
                                      const GridSpec& grid) {
    if (a.size() != b.size())
        throw std::invalid_argument("circular_convolve: length mismatch");
    const int n = grid.num_points;
    if (static_cast<int>(a.size()) != grid.half_size())
        throw std::invalid_argument("circular_convolve: expected half-spectrum arrays");
    // Cyclic convolution through the transform domain; the full symmetric
    // extensions are real and even, so the product of their DFTs is too.
    std::vector<double> fa = half_to_full(a, n);
    std::vector<double> fb = half_to_full(b, n);
    std::vector<cplx> A = forward_half(fa);
    std::vector<cplx> B = forward_half(fb);
    std::vector<cplx> prod(A.size());
    for (std::size_t i = 0; i < A.size(); ++i) prod[i] = A[i] * B[i] * static_cast<double>(n);
    std::vector<double> conv = inverse_half(prod, n);
    std::vector<double> out = full_to_half(conv);
    const double inv_l = 1.0 / grid.length;
    for (auto& v : out) v *= inv_l;
    return out;
}

std::vector<double> convolution_power(const std::vector<double>& h, int k,
                                      const GridSpec& grid) {
    if (k < 1) throw std::invalid_argument("convolution_power: k must be >= 1");
    std::vector<double> acc = h;
    for (int i = 1; i < k; ++i) acc = circular_convolve(acc, h, grid);
    return acc;
}

SpectralField truncate(const SpectralField& s, int k_max) {
    if (k_max > s.grid.nyquist())
        throw std::invalid_argument("truncate: k_max exceeds Nyquist mode");
    SpectralField out = s;
    for (int n = k_max + 1; n < static_cast<int>(out.coeffs.size()); ++n)
        out.coeffs[n] = cplx{0.0, 0.0};
    return out;
}

}  // namespace fnolab
