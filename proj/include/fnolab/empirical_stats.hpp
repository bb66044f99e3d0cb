#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fnolab/operator_ensemble.hpp"

namespace fnolab {

struct KernelSpectrum {
    GridSpec grid;
    std::vector<double> values;  // per-mode, nonnegative
    int layer = 0;
    enum class Kind { pre, reduced } kind = Kind::pre;
};

struct EnsembleSummary {
    std::vector<double> mean;
    std::vector<double> stddev;          // across replicas (ddof = 1)
    int replicas = 0;
    std::vector<std::vector<double>> per_replica;  // optional retention
};

EnsembleSummary summarize(const std::vector<std::vector<double>>& per_replica,
                          bool retain = true);

// Per-replica reduced kernel (1/width) sum_channels |F(post)_j(n)|^2 at the
// given Fourier-layer depth index (0 = first Fourier layer).  `oversample`
// re-evaluates the activation on an oversample*N grid of the band-limited
// pre-activations so that energy beyond the native Nyquist mode is resolved.
std::vector<double> replica_reduced_kernel(const LayerTrace& trace, int depth,
                                           int oversample = 1);
// Per-replica pre-activation kernel (1/width) sum_channels |pre_j(n)|^2.
std::vector<double> replica_pre_kernel(const LayerTrace& trace, int depth);

EnsembleSummary reduced_kernel(const std::vector<LayerTrace>& traces, int depth,
                               int oversample = 1);
EnsembleSummary pre_kernel(const std::vector<LayerTrace>& traces, int depth);

// Width-scaled variance of the stochastic metric diagonal at (depth, mode):
//   vertex = n^(l-1) * Var_replicas( C_R(n) * (1/width) sum_j |F(S)_j(n)|^2 ).
// Requires at least 50 replicas.
struct VertexEstimate {
    int depth = 0;
    int mode = 0;
    int width = 0;
    double value = 0.0;
};
VertexEstimate vertex_estimate(const std::vector<LayerTrace>& traces, int depth, int mode);

struct SusceptibilityMeasurement {
    enum class Kind { parallel, perpendicular } kind = Kind::parallel;
    double epsilon = 0.0;
    EnsembleSummary per_mode;            // parallel: chi(n); perpendicular: integrand
    EnsembleSummary integrated;          // perpendicular: scalar per replica (length-1 rows)
    std::vector<int> excluded_modes;     // parallel: near-zero denominator modes
    // Per-replica state needed by the theory-side comparison.
    std::vector<std::vector<double>> replica_pre_kernels;
    std::vector<std::vector<double>> replica_perturbation_spectra;  // perpendicular only
};

// Parallel susceptibility at the first Fourier layer, measured per replica
// with common random numbers: the same trace evaluated at u0(1 +- eps).
// chi(n) = C'_R(n) [Ktil_+(n) - Ktil_-(n)] / (4 eps K_emp(n)) + gamma, where
// C'_R is the next layer's effective profile and gamma the residual weight.
SusceptibilityMeasurement parallel_susceptibility(const OperatorConfig& config,
                                                  const std::vector<SpatialField>& input,
                                                  double epsilon, std::uint64_t root_seed,
                                                  int replicas, int workers = 0,
                                                  double denom_floor = 1e-14);

// Perpendicular susceptibility at the first Fourier layer.  For each replica
// a fresh GRF perturbation is projected orthogonal to u0 (grid inner product,
// checked to 1e-10), scaled to RMS amplitude eps, and propagated with common
// random numbers; the integrated value is
//   sum_n C'_R(n) |F(S_+ - S_-)(n)|^2 / 4  /  sum_n |dZ(n)|^2  + gamma.
SusceptibilityMeasurement perpendicular_susceptibility(
    const OperatorConfig& config, const std::vector<SpatialField>& input,
    const GrfSpec& perturbation_spec, double epsilon, std::uint64_t root_seed,
    int replicas, int workers = 0);

}  // namespace fnolab
