#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bdm/matrix.hpp"

namespace bdm::eval {

// Quantization step of the telemetry channel, inferred from the data lattice:
// the minimum positive gap between sorted distinct values, validated to divide
// at least 99% of all consecutive gaps.
double infer_lsb(std::span<const double> values);

struct LsbErrorReport {
    double lsb_step = 0.0;              // V
    std::vector<double> errors;         // signed, LSB units
    double max_abs_error = 0.0;         // LSB
    std::vector<double> bin_edges;      // width 0.5 LSB, centered at 0
    std::vector<std::size_t> bin_counts;
    double exact_zero_fraction = 0.0;   // agreement after lattice rounding
    double coverage_half = 0.0;         // |error| <= 0.5 LSB
    double coverage_1 = 0.0;
    double coverage_2 = 0.0;
    double exceed_2lsb_fraction = 0.0;
};

LsbErrorReport lsb_errors(std::span<const double> actual,
                          std::span<const double> predicted, double lsb);

using VoltagePredictor = std::function<double(double i_ma, double dod_mah, double t_c)>;

struct SweepResult {
    double temperature_c = 0.0;
    std::vector<double> dod_levels;     // mA·h
    std::vector<double> current_grid;   // mA, strictly increasing
    Matrix values;                      // rows = dod level, cols = current
};

// Forward difference (f(I+dI) - f(I)) / dI on the full grid.
SweepResult sensitivity_sweep(const VoltagePredictor& f, double t_c,
                              std::span<const double> dods,
                              std::span<const double> i_grid, double delta_i = 1.0);

SweepResult voltage_sweep(const VoltagePredictor& f, double t_c,
                          std::span<const double> dods, std::span<const double> i_grid);

struct ModelErrorSummary {
    std::string label;
    double max_abs_error = 0.0;
    double exact_zero_fraction = 0.0;
    double coverage_half = 0.0;
    double coverage_1 = 0.0;
    double coverage_2 = 0.0;
    double exceed_2lsb_fraction = 0.0;
};

struct ComparisonReport {
    double lsb_step = 0.0;
    ModelErrorSummary first;
    ModelErrorSummary second;
    // second minus first, fractions
    double delta_exact_zero = 0.0;
    double delta_half = 0.0;
    double delta_1 = 0.0;
    double delta_2 = 0.0;
    std::string winner_half;   // label with the larger coverage, "tie" on equality
    std::string winner_1;
    std::string winner_2;
    std::string winner_exact_zero;
    std::string winner_max_abs; // label with the smaller max error
};

ComparisonReport compare_models(const LsbErrorReport& first, const LsbErrorReport& second,
                                const std::string& first_label = "ecm",
                                const std::string& second_label = "ml");

// JSON round trips for the report files the CLI writes and reads back.
std::string report_to_json(const LsbErrorReport& report, const std::string& label);
LsbErrorReport report_from_json(const std::string& text, std::string* label = nullptr);
std::string comparison_to_json(const ComparisonReport& report);

} // namespace bdm::eval
