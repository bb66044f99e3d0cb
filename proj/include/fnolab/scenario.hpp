#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fnolab/eft_theory.hpp"
#include "fnolab/report.hpp"

namespace fnolab {

// One experiment: simulate a replica ensemble, evaluate the matching theory,
// compare within error bands, and emit report artifacts.
struct ExperimentConfig {
    std::string name = "unnamed";
    std::string kind = "kernel";  // kernel | chi-parallel | chi-perpendicular | gate | tune
    GridSpec grid;
    ActivationSpec activation = ActivationSpec::identity();
    int width = 32;
    int depth = 1;                 // Fourier layers
    std::vector<int> depths{0};    // measured depth indices (kernel kind)
    int replicas = 100;
    std::uint64_t seed = 20240501;
    double grf_length_scale_over_l = 1.0 / 8.0;
    double grf_amplitude = 1.0;
    double cr_level = 1.0;
    std::optional<double> residual_gamma_tilde;
    bool residual_scale_variance = true;
    double band_multiplier = 1.0;
    int band_lo = 17, band_hi = 63;
    double min_in_band_fraction = 0.95;
    int oversample = 2;
    double epsilon = 0.01;  // susceptibility size
    double perturbation_length_scale_over_l = 1.0 / 8.0;
    bool fresh_inputs = false;  // fresh GRF input per replica instead of one shared draw
    SeriesControl series;

    struct Sweep {
        std::string axis;  // cr_level | width | gamma
        std::vector<double> values;
    };
    std::optional<Sweep> sweep;

    struct Tune {
        std::string target = "global";     // local | global
        std::string parameter = "cr_level";  // cr_level | gamma
        double bracket_lo = 1e-2, bracket_hi = 16.0;
        std::optional<double> fixed_cr_level;  // required when parameter == gamma
    };
    std::optional<Tune> tune;

    void validate() const;
    GrfSpec grf_spec() const;
    GrfSpec perturbation_spec() const;
    OperatorConfig operator_config() const;
};

ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct RunOptions {
    std::string out_dir;  // empty: no artifacts
    std::string format = "all";  // csv | json | svg | all
    int workers = 0;
    std::optional<int> replicas_override;
    std::optional<std::uint64_t> seed_override;
    bool fast = false;  // 25 replicas, 1.5x band
    bool quiet = false;
};

ComparisonReport run_scenario(const ExperimentConfig& cfg, const RunOptions& opt);

struct SweepSummary {
    std::string axis;
    std::vector<double> values;
    std::vector<bool> passed;
    // cr_level axis: estimated level where the predicted global condition
    // crosses 1; width axis: median per-mode log-log slope of the replica std.
    std::optional<double> crossing_estimate;
    std::optional<double> dispersion_slope;
    bool aggregate_pass = false;
};
SweepSummary run_sweep(const ExperimentConfig& cfg, const RunOptions& opt,
                       std::vector<ComparisonReport>* reports = nullptr);

struct TuneResult {
    CriticalityReport report;
    double mc_integrated = 0.0;
    double mc_std = 0.0;
    bool mc_within_2std = false;
    bool pass = false;
};
TuneResult run_tune(const ExperimentConfig& cfg, const RunOptions& opt);

struct GateResult {
    SeriesControl::Interpretation winner = SeriesControl::Interpretation::convolution_chain;
    bool chain_passes_all = false;
    bool literal_passes_all = false;
    bool decisive = false;  // exactly one interpretation in band on every mode
    ComparisonReport report;
};
// Quadratic depth-1 oracle run that adjudicates the composition-sum reading.
GateResult select_interpretation(const ExperimentConfig& cfg, const RunOptions& opt);

// Names of the checked-in scenario files (without .json) in a scenarios dir.
std::vector<std::string> list_scenarios(const std::string& dir);

}  // namespace fnolab
