#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fnolab/activation.hpp"
#include "fnolab/empirical_stats.hpp"
#include "fnolab/random_fields.hpp"

namespace fnolab {

// Closed-form layer recursion state.  `kernel` is the pre-activation kernel
// K^(l)(n) of Fourier layer l, the spectrum of the Gaussian field entering
// the activation; H^(l)(n) = C_R(n) * Ktil^(l)(n) is realized when the next
// state is formed from the predicted reduced kernel.
struct TheoryState {
    int layer = 1;
    GridSpec grid;
    std::vector<double> kernel;  // K^(l)(n), half spectrum
    int width = 32;
    ActivationSpec activation = ActivationSpec::identity();
    WeightVarianceProfile next_profile;  // C_R of the next multiplication
    double gamma = 0.0;                  // residual weight, 0 when absent
};

// Series evaluation control.  The composition sum printed for the analytic
// recursion is ambiguous; both readings are implemented and an MC gate picks
// the one that reproduces simulation:
//   convolution_chain — composition parts chain into plain convolution
//     powers; coefficients are the Gaussian-moment values E[sigma^(j)] that
//     make the series exact for a Gaussian pre-activation ensemble, and the
//     width damping attaches only to the multi-part (finite-width) terms.
//   pointwise_product — the literal printed series: bare sigma_k^2 weights,
//     1/width^(k-1) damping of the whole order-k term, multi-part
//     compositions as pointwise products of convolution powers of
//     H = C_R * K with the 1/L convolution normalization.
struct SeriesControl {
    enum class Interpretation { convolution_chain, pointwise_product };
    int k_stop = 7;
    Interpretation interpretation = Interpretation::convolution_chain;
    double tail_tolerance = 1e-9;

    static std::string name(Interpretation i) {
        return i == Interpretation::convolution_chain ? "convolution-chain" : "pointwise-product";
    }
};

struct TheoryStep {
    std::vector<double> reduced;      // predicted reduced kernel on the measurement grid
    TheoryState next;                 // state advanced one layer (native grid)
};

// One recursion step for the analytic family.  `oversample` selects the
// measurement grid (oversample * N points) on which the reduced kernel is
// reported; the next state always folds back to the native grid.
TheoryStep kernel_step_analytic(const TheoryState& state, const SeriesControl& ctrl,
                                int oversample = 1);
TheoryStep kernel_step_scale_invariant(const TheoryState& state, int oversample = 1);
// Residual step: analytic series plus gamma * K^(l) carried into the next
// pre-activation kernel.  With gamma = 0 it equals kernel_step_analytic.
TheoryStep kernel_step_residual(const TheoryState& state, const SeriesControl& ctrl,
                                int oversample = 1);

// Per-mode parallel susceptibility; zero-kernel modes are reported in
// `excluded` rather than divided through.
struct ChiParallel {
    std::vector<double> values;
    std::vector<int> excluded;
};
ChiParallel chi_parallel(const TheoryState& state, const SeriesControl& ctrl);

// Reduced perpendicular susceptibility: per-mode spectrum of the derivative
// field's autocovariance (the constant part sits in the DC bin) and the
// integrated global value sum_n C_R(n) chi_perp(n) + gamma.
struct ChiPerp {
    std::vector<double> per_mode;
    double global = 0.0;
};
ChiPerp chi_perp_reduced(const TheoryState& state, const SeriesControl& ctrl);

// Expected value of the finite-perturbation estimator: the perturbation's
// spectral density smears the per-mode susceptibility across the profile
// band, which matters near the band edge.
double chi_perp_smeared(const TheoryState& state, const SeriesControl& ctrl,
                        const std::vector<double>& perturbation_spectrum);

// Run `steps` recursion steps, returning the reduced-kernel prediction of
// each step on the measurement grid.
std::vector<std::vector<double>> evolve(TheoryState state, const SeriesControl& ctrl,
                                        int steps, int oversample = 1);

struct CriticalityReport {
    std::string target;           // "local" or "global"
    std::string parameter;        // "cr_level" or "gamma"
    double recommended = 0.0;
    double condition_value = 0.0; // recomputed condition at the recommendation
    double bracket_lo = 0.0, bracket_hi = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

struct CriticalityProblem {
    GridSpec grid;
    std::vector<double> input_kernel;  // K^(1)(n) before the C_R weighting
    ActivationSpec activation = ActivationSpec::relu();
    int width = 32;
    int k_max = 32;
    std::optional<double> fixed_cr_level;  // set when solving for gamma
    double bracket_lo = 1e-3, bracket_hi = 16.0;
};

// Bisection on the scalar unknown (C_R level, or gamma at fixed level) until
// |condition - 1| < 1e-8; reports bracket endpoints when no sign change.
CriticalityReport solve_criticality(const CriticalityProblem& problem,
                                    const std::string& target,
                                    const SeriesControl& ctrl);

}  // namespace fnolab
