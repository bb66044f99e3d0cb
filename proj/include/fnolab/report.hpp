#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fnolab/grid.hpp"

namespace fnolab {

// One comparison row per mode.
struct ModeRow {
    int mode = 0;
    double empirical_mean = 0.0;
    double empirical_std = 0.0;
    double theory = 0.0;
    bool in_band = false;
    bool counted = true;  // inside the scored mode window
};

struct CurveBlock {
    std::string label;  // e.g. "depth-0"
    std::vector<ModeRow> rows;
    std::vector<std::vector<double>> replica_curves;  // for the dot plot
    double in_band_fraction = 0.0;
    bool passed = false;
};

struct ComparisonReport {
    std::string scenario;
    std::string kind;  // kernel | chi-parallel | chi-perpendicular | sweep-point | tune
    // Provenance: everything needed to reproduce the figure from the report.
    std::uint64_t root_seed = 0;
    int replicas = 0;
    int width = 0;
    int depth = 0;
    std::string activation;
    std::string interpretation;
    int k_stop = 0;
    double band_multiplier = 1.0;
    double min_in_band_fraction = 0.95;
    int band_lo = 0, band_hi = 0;
    double grf_length_scale = 0.0;
    double grf_amplitude = 0.0;
    double cr_level = 1.0;
    std::optional<double> gamma_tilde;
    std::optional<double> epsilon;
    std::vector<std::pair<std::string, double>> extra;  // scenario-specific scalars

    std::vector<CurveBlock> curves;
    bool aggregate_pass = false;
};

// Columnar CSV: one row per mode and curve (UTF-8, LF, header row).
std::string render_csv(const ComparisonReport& report);
// Hierarchical provenance document (deterministic member order).
std::string render_json(const ComparisonReport& report);
// Self-contained SVG: log-scale curves, per-replica dots, +-1 std shading.
std::string render_svg(const ComparisonReport& report);

void write_file(const std::string& path, const std::string& content);

// Locale-independent shortest-roundtrip float formatting shared by all
// serializers so identical reports render byte-identically.
std::string format_double(double v);

}  // namespace fnolab
