#pragma once

#include <span>
#include <string>
#include <vector>

#include "bdm/types.hpp"

namespace bdm::ecm {

// Affine-in-temperature parameter: value(T) = a + b*T.
struct AffineInT {
    double a = 0.0;
    double b = 0.0;
    double operator()(double t_c) const { return a + b * t_c; }
};

// Discharge-voltage model coefficients:
//   U = u0 - k_dod(T)*DOD - r(T)*I - u_p(T)*exp(-DOD / dod_kp(T))
struct EcmParams {
    double u0 = 0.0;       // V
    AffineInT k_dod;       // V per mA·h
    AffineInT r;           // V per mA
    AffineInT u_p;         // V
    AffineInT dod_kp;      // mA·h

    bool operator==(const EcmParams&) const = default;
};

double predict_voltage(const EcmParams& params, double i_ma, double dod_mah, double t_c);

struct EcmFitOptions {
    bool affine_in_t = true;            // degrade to constant params when off
    int max_outer_iterations = 500;     // Nelder-Mead budget per grid start
    std::vector<double> dod_kp_grid = {2.0, 5.0, 10.0, 20.0, 40.0}; // mA·h starts
};

struct FitReport {
    EcmParams params;
    double rmse = 0.0;                  // V
    std::vector<double> residuals;      // actual - predicted, per sample
    std::vector<std::string> curves_used;
    int iterations = 0;                 // outer optimizer steps, all starts
    bool converged = true;
    bool constant_parameter_mode = false; // degenerate temperature span fallback
};

// Least-squares identification by variable projection: the model is linear in
// everything except dod_kp, so a 2-variable derivative-free outer search wraps
// an orthogonal-decomposition inner solve.
FitReport fit_ecm(std::span<const DischargeSegment> segments,
                  const EcmFitOptions& options = {});

// actual - predicted per sample, segment order preserved.
std::vector<double> residuals(const EcmParams& params,
                              std::span<const DischargeSegment> segments);

// JSON document round trip (field names as in the type, units annotated).
std::string params_to_json(const EcmParams& params);
EcmParams params_from_json(const std::string& text);
void save_params(const std::string& path, const EcmParams& params);
EcmParams load_params(const std::string& path);

} // namespace bdm::ecm
