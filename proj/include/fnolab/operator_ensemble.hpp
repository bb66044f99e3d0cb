#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fnolab/activation.hpp"
#include "fnolab/random_fields.hpp"

namespace fnolab {

// Randomly initialized FNO stack: lift, then `depth` Fourier layers, each a
// per-mode multiplication by a fresh complex Gaussian tensor followed by the
// pointwise activation.  With a residual connection, layer l+1 adds
// gamma_tilde times the previous pre-activation into its own pre-activation,
// and the weight variance of the connected layers is scaled by 1 - gamma
// (gamma = gamma_tilde^2); the first Fourier layer has no predecessor and
// keeps the unscaled profile.
struct OperatorConfig {
    GridSpec grid;
    int width = 32;
    int depth = 1;  // number of Fourier layers
    ActivationSpec activation = ActivationSpec::identity();
    WeightVarianceProfile profile;        // base C_R(n)
    std::optional<double> residual_gamma_tilde;
    bool residual_scale_variance = true;  // scale connected layers by 1 - gamma
    int input_channels = 1;
    double c_w = 1.0;  // lift weight variance scale

    double gamma() const {
        return residual_gamma_tilde ? (*residual_gamma_tilde) * (*residual_gamma_tilde) : 0.0;
    }
    // Effective weight-variance profile of Fourier layer ell (1-based).
    WeightVarianceProfile effective_profile(int ell) const {
        if (residual_gamma_tilde && residual_scale_variance && ell >= 2)
            return profile.scaled(1.0 - gamma());
        return profile;
    }
    void validate() const;
};

// Per-layer half spectra for every channel; index [channel][mode].
using ChannelSpectra = std::vector<std::vector<cplx>>;

struct LayerRecord {
    ChannelSpectra pre;   // pre-activation spectra
    ChannelSpectra post;  // post-activation spectra (native grid)
};

// Layer 0 is the lift output (no activation); layers 1..depth are the
// Fourier layers, so the trace holds depth+1 records.
struct LayerTrace {
    OperatorConfig config;
    std::vector<LayerRecord> layers;
};

// Pointwise linear lift z_i(x) = sum_j W_ij u_j(x).
std::vector<SpatialField> lift(const std::vector<SpatialField>& inputs,
                               const std::vector<double>& weights, int n_out);

// One Fourier layer: per-mode multiply, inverse transform, activation.
// `residual_pre` (if given) is added to the pre-activation as
// gamma_tilde * previous pre-activation.
LayerRecord fourier_layer(const ChannelSpectra& in, const SpectralWeightTensor& r,
                          const ActivationSpec& act, int k_max,
                          const ChannelSpectra* residual_pre, double gamma_tilde);

// Full forward pass of one replica, deterministic in (config, input, seed).
LayerTrace run_replica(const OperatorConfig& config,
                       const std::vector<SpatialField>& input, std::uint64_t seed);

// Replica ensemble on a bounded worker pool.  Replica r uses the seed stream
// derive_seed(root_seed, layer, r, role); the result order is fixed by
// replica index regardless of thread count.
std::vector<LayerTrace> run_ensemble(const OperatorConfig& config,
                                     const std::vector<SpatialField>& input,
                                     std::uint64_t root_seed, int replicas,
                                     int workers = 0);

}  // namespace fnolab
