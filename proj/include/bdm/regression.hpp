#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bdm/matrix.hpp"
#include "bdm/types.hpp"

namespace bdm::regression {

// ---------------------------------------------------------------------------
// MinMax scaling: X_scaled = (X - X_min) / (X_max - X_min), per column.
// ---------------------------------------------------------------------------

struct ScalerParams {
    std::vector<double> min;
    std::vector<double> max;

    bool operator==(const ScalerParams&) const = default;
};

ScalerParams scaler_fit(const Matrix& X);
// Constant training columns (max == min) map to all-zeros.
Matrix scaler_apply(const ScalerParams& p, const Matrix& X);

// ---------------------------------------------------------------------------
// Polynomial feature expansion, all exponent tuples with total degree <= d in
// graded-lexicographic order, bias tuple first.
// ---------------------------------------------------------------------------

struct PolySpec {
    std::size_t n_features = 0;
    std::size_t degree = 0;
    std::vector<std::vector<unsigned>> exponents;
    // Each non-bias tuple is parent tuple times one extra feature factor;
    // lets the expansion reuse earlier columns.
    std::vector<std::size_t> parent;
    std::vector<std::size_t> parent_feature;

    static PolySpec make(std::size_t n_features, std::size_t degree);

    bool operator==(const PolySpec& o) const {
        return n_features == o.n_features && degree == o.degree;
    }
};

Matrix poly_expand(const PolySpec& spec, const Matrix& X);

// ---------------------------------------------------------------------------
// Least-angle regression path. In lasso mode a coefficient whose sign would
// flip is dropped at its zero crossing, which makes each knot the exact
// solution of  min 1/2 ||y - X b||^2 + alpha ||b||_1.
// ---------------------------------------------------------------------------

enum class LarsMode { lars, lasso };

struct LarsKnot {
    double alpha = 0.0;
    std::vector<double> coefficients;   // original column scale, full width
    std::vector<std::size_t> active;    // in entry order
};

struct PathEvent {
    double alpha = 0.0;
    std::string what;                   // ties, drops, exclusions
};

struct LarsPath {
    std::vector<LarsKnot> knots;        // alpha strictly decreasing, last == 0
    std::vector<double> column_mean;    // standardization applied internally
    std::vector<double> column_norm;    // norm of the centered column
    double y_mean = 0.0;
    std::vector<std::size_t> excluded;  // zero-variance or collinear columns
    std::vector<PathEvent> events;

    // Piecewise-linear interpolation between knots; zero above the first knot.
    std::vector<double> coefficients_at(double alpha) const;
    double intercept_at(double alpha) const;
};

// standardize: center columns, scale to unit norm and center y inside the
// solver, mapping coefficients back afterward. Pass false to solve the raw
// problem as given (no intercept), e.g. for oracle comparisons.
LarsPath lars_path(const Matrix& X, std::span<const double> y, LarsMode mode,
                   bool standardize = true);

// ---------------------------------------------------------------------------
// Cross-validated regularization selection.
// ---------------------------------------------------------------------------

struct CvResult {
    double alpha_selected = 0.0;
    std::vector<double> alphas;                  // descending union of fold knots
    std::vector<std::vector<double>> fold_mse;   // [fold][alpha]
    std::vector<double> mean_mse;                // over folds
    std::vector<double> fold_r2;                 // held-out R^2 at alpha_selected
};

// Seeded shuffle into k contiguous blocks; held-out squared error evaluated
// at the union of all folds' knot alphas; ties break toward larger alpha.
CvResult cross_validate_alpha(const Matrix& X, std::span<const double> y,
                              std::size_t folds, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Full pipeline: split, scale, expand, select alpha by CV, refit.
// ---------------------------------------------------------------------------

struct PipelineConfig {
    std::size_t degree = 8;
    std::size_t folds = 6;
    double train_fraction = 0.8;
    std::uint64_t seed = 42;
    bool chronological_split = false; // default is a seeded uniform shuffle
};

struct RegressionModel {
    ScalerParams scaler;
    PolySpec poly;
    std::vector<double> coefficients; // aligned with the exponent table
    double intercept = 0.0;
    double alpha_selected = 0.0;
    std::vector<double> cv_scores;    // per-fold R^2
    double train_r2 = 0.0;
    double test_r2 = 0.0;
    std::vector<std::string> feature_names;
};

struct Dataset {
    Matrix features;              // columns: batt_current, dod, batt_temp
    std::vector<double> target;   // batt_voltage
    std::vector<std::string> feature_names = {"batt_current", "dod", "batt_temp"};
};

Dataset make_dataset(std::span<const DischargeSegment> segments);

RegressionModel fit_pipeline(const Dataset& data, const PipelineConfig& config = {});

struct Prediction {
    double voltage = 0.0;
    bool extrapolated = false;    // any scaled input outside [0, 1]
};

double predict(const RegressionModel& model, double i_ma, double dod_mah, double t_c);
Prediction predict_flagged(const RegressionModel& model, double i_ma, double dod_mah,
                           double t_c);

// Coefficient of determination R^2 = 1 - SS_res / SS_tot.
double r2_score(std::span<const double> actual, std::span<const double> predicted);

// JSON document round trip, bit-faithful for all floating values.
std::string model_to_json(const RegressionModel& model);
RegressionModel model_from_json(const std::string& text);
void save_model(const std::string& path, const RegressionModel& model);
RegressionModel load_model(const std::string& path);

// Deterministic Fisher-Yates permutation of 0..n-1 (shared by split and CV).
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

} // namespace bdm::regression
