#include "bdm/regression.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <random>

#include <json.hpp>

#include "bdm/errors.hpp"
#include "bdm/kernels.hpp"

namespace bdm::regression {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Scaler
// ---------------------------------------------------------------------------

ScalerParams scaler_fit(const Matrix& X) {
    if (X.rows() < 1) throw EmptyInputError("scaler_fit: no rows");
    ScalerParams p;
    p.min.resize(X.cols());
    p.max.resize(X.cols());
    for (std::size_t j = 0; j < X.cols(); ++j) {
        auto [mn, mx] = kernels::minmax(X.col(j), X.rows());
        p.min[j] = mn;
        p.max[j] = mx;
    }
    return p;
}

Matrix scaler_apply(const ScalerParams& p, const Matrix& X) {
    if (X.cols() != p.min.size())
        throw ShapeError("scaler_apply: column count mismatch, params have " +
                         std::to_string(p.min.size()) + ", input has " +
                         std::to_string(X.cols()));
    Matrix out(X.rows(), X.cols());
    for (std::size_t j = 0; j < X.cols(); ++j) {
        const double range = p.max[j] - p.min[j];
        if (range == 0.0) continue; // constant training column maps to zeros
        kernels::sub_div(X.col(j), p.min[j], range, out.col(j), X.rows());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Polynomial expansion
// ---------------------------------------------------------------------------

PolySpec PolySpec::make(std::size_t n_features, std::size_t degree) {
    if (n_features < 1) throw ShapeError("PolySpec: need at least one feature");
    PolySpec spec;
    spec.n_features = n_features;
    spec.degree = degree;

    // Grade ascending; within a grade, lexicographically descending on the
    // exponents, so (2,0) precedes (1,1) precedes (0,2).
    std::vector<unsigned> tuple(n_features, 0);
    auto recurse = [&](auto&& self, std::size_t pos, unsigned remaining) -> void {
        if (pos + 1 == n_features) {
            tuple[pos] = remaining;
            spec.exponents.push_back(tuple);
            return;
        }
        for (unsigned e = remaining; e != static_cast<unsigned>(-1); --e) {
            tuple[pos] = e;
            self(self, pos + 1, remaining - e);
        }
        tuple[pos] = 0;
    };
    for (unsigned g = 0; g <= degree; ++g) recurse(recurse, 0, g);

    std::map<std::vector<unsigned>, std::size_t> index;
    for (std::size_t k = 0; k < spec.exponents.size(); ++k) index[spec.exponents[k]] = k;
    spec.parent.assign(spec.exponents.size(), 0);
    spec.parent_feature.assign(spec.exponents.size(), 0);
    for (std::size_t k = 1; k < spec.exponents.size(); ++k) {
        auto e = spec.exponents[k];
        std::size_t f = 0;
        while (e[f] == 0) ++f;
        --e[f];
        spec.parent[k] = index.at(e);
        spec.parent_feature[k] = f;
    }
    return spec;
}

Matrix poly_expand(const PolySpec& spec, const Matrix& X) {
    if (X.cols() != spec.n_features)
        throw ShapeError("poly_expand: input has " + std::to_string(X.cols()) +
                         " columns, spec expects " + std::to_string(spec.n_features));
    Matrix out(X.rows(), spec.exponents.size());
    std::fill(out.col(0), out.col(0) + X.rows(), 1.0);
    for (std::size_t k = 1; k < spec.exponents.size(); ++k)
        kernels::mul(out.col(spec.parent[k]), X.col(spec.parent_feature[k]), out.col(k),
                     X.rows());
    return out;
}

// ---------------------------------------------------------------------------
// Cross-validated alpha selection
// ---------------------------------------------------------------------------

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    // Hand-rolled Fisher-Yates so the permutation is stable across platforms.
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

CvResult cross_validate_alpha(const Matrix& X, std::span<const double> y,
                              std::size_t folds, std::uint64_t seed) {
    const std::size_t n = X.rows();
    if (folds < 2) throw ConfigError("cross_validate_alpha: need at least 2 folds");
    if (n < 2 * folds)
        throw ConfigError("cross_validate_alpha: need at least 2 rows per fold, have " +
                          std::to_string(n) + " rows for " + std::to_string(folds) +
                          " folds");
    if (y.size() != n) throw ShapeError("cross_validate_alpha: y length mismatch");

    // Seeded shuffle into contiguous blocks.
    const auto perm = shuffled_indices(n, seed);
    std::vector<std::vector<std::size_t>> val_rows(folds);
    std::vector<std::vector<std::size_t>> train_rows(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t lo = f * n / folds;
        const std::size_t hi = (f + 1) * n / folds;
        if (hi == lo) throw ConfigError("cross_validate_alpha: empty validation fold");
        for (std::size_t k = 0; k < n; ++k) {
            if (k >= lo && k < hi)
                val_rows[f].push_back(perm[k]);
            else
                train_rows[f].push_back(perm[k]);
        }
    }

    auto fit_fold = [&](std::size_t f) {
        const Matrix Xtr = X.select_rows(train_rows[f]);
        std::vector<double> ytr(train_rows[f].size());
        for (std::size_t k = 0; k < ytr.size(); ++k) ytr[k] = y[train_rows[f][k]];
        return lars_path(Xtr, ytr, LarsMode::lasso, /*standardize=*/true);
    };
    std::vector<std::future<LarsPath>> futures;
    futures.reserve(folds);
    for (std::size_t f = 0; f < folds; ++f)
        futures.push_back(std::async(std::launch::async, fit_fold, f));
    std::vector<LarsPath> paths;
    paths.reserve(folds);
    for (auto& fu : futures) paths.push_back(fu.get());

    CvResult result;
    for (const auto& path : paths)
        for (const auto& knot : path.knots) result.alphas.push_back(knot.alpha);
    std::sort(result.alphas.begin(), result.alphas.end(), std::greater<>());
    result.alphas.erase(std::unique(result.alphas.begin(), result.alphas.end()),
                        result.alphas.end());

    result.fold_mse.assign(folds, std::vector<double>(result.alphas.size(), 0.0));
    for (std::size_t f = 0; f < folds; ++f) {
        for (std::size_t ai = 0; ai < result.alphas.size(); ++ai) {
            const double alpha = result.alphas[ai];
            const auto beta = paths[f].coefficients_at(alpha);
            const double b0 = paths[f].intercept_at(alpha);
            double sse = 0.0;
            for (const std::size_t row : val_rows[f]) {
                double pred = b0;
                for (std::size_t j = 0; j < beta.size(); ++j)
                    if (beta[j] != 0.0) pred += beta[j] * X(row, j);
                const double e = y[row] - pred;
                sse += e * e;
            }
            result.fold_mse[f][ai] = sse / static_cast<double>(val_rows[f].size());
        }
    }

    result.mean_mse.assign(result.alphas.size(), 0.0);
    for (std::size_t ai = 0; ai < result.alphas.size(); ++ai) {
        double acc = 0.0;
        for (std::size_t f = 0; f < folds; ++f) acc += result.fold_mse[f][ai];
        result.mean_mse[ai] = acc / static_cast<double>(folds);
    }

    // Descending alpha order plus strict improvement = ties resolve toward the
    // sparser model.
    std::size_t best = 0;
    for (std::size_t ai = 1; ai < result.alphas.size(); ++ai)
        if (result.mean_mse[ai] < result.mean_mse[best]) best = ai;
    result.alpha_selected = result.alphas[best];

    result.fold_r2.assign(folds, 0.0);
    for (std::size_t f = 0; f < folds; ++f) {
        const auto beta = paths[f].coefficients_at(result.alpha_selected);
        const double b0 = paths[f].intercept_at(result.alpha_selected);
        double sse = 0.0, sst = 0.0, mean_y = 0.0;
        for (const std::size_t row : val_rows[f]) mean_y += y[row];
        mean_y /= static_cast<double>(val_rows[f].size());
        for (const std::size_t row : val_rows[f]) {
            double pred = b0;
            for (std::size_t j = 0; j < beta.size(); ++j)
                if (beta[j] != 0.0) pred += beta[j] * X(row, j);
            sse += (y[row] - pred) * (y[row] - pred);
            sst += (y[row] - mean_y) * (y[row] - mean_y);
        }
        result.fold_r2[f] = sst > 0.0 ? 1.0 - sse / sst
                                      : std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

Dataset make_dataset(std::span<const DischargeSegment> segments) {
    std::size_t total = 0;
    for (const auto& seg : segments) total += seg.samples.size();
    if (total == 0) throw EmptyInputError("make_dataset: no samples");
    Dataset d;
    d.features = Matrix(total, 3);
    d.target.resize(total);
    std::size_t row = 0;
    for (const auto& seg : segments) {
        for (std::size_t k = 0; k < seg.samples.size(); ++k, ++row) {
            d.features(row, 0) = seg.samples[k].batt_current;
            d.features(row, 1) = seg.dod[k];
            d.features(row, 2) = seg.samples[k].batt_temp;
            d.target[row] = seg.samples[k].batt_voltage;
        }
    }
    return d;
}

RegressionModel fit_pipeline(const Dataset& data, const PipelineConfig& config) {
    const std::size_t n = data.features.rows();
    if (n == 0) throw EmptyInputError("fit_pipeline: empty dataset");
    if (n < 5) throw InsufficientDataError("fit_pipeline: need at least 5 rows");
    if (!(config.train_fraction > 0.0) || !(config.train_fraction < 1.0))
        throw ConfigError("fit_pipeline: train_fraction must be in (0, 1)");

    std::size_t n_train = static_cast<std::size_t>(
        std::llround(config.train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    std::vector<std::size_t> train_idx, test_idx;
    if (config.chronological_split) {
        for (std::size_t k = 0; k < n; ++k)
            (k < n_train ? train_idx : test_idx).push_back(k);
    } else {
        const auto perm = shuffled_indices(n, config.seed);
        for (std::size_t k = 0; k < n; ++k)
            (k < n_train ? train_idx : test_idx).push_back(perm[k]);
    }

    const Matrix Xtrain_raw = data.features.select_rows(train_idx);
    const Matrix Xtest_raw = data.features.select_rows(test_idx);
    std::vector<double> ytrain(train_idx.size()), ytest(test_idx.size());
    for (std::size_t k = 0; k < train_idx.size(); ++k) ytrain[k] = data.target[train_idx[k]];
    for (std::size_t k = 0; k < test_idx.size(); ++k) ytest[k] = data.target[test_idx[k]];

    RegressionModel model;
    model.feature_names = data.feature_names;
    model.scaler = scaler_fit(Xtrain_raw);
    model.poly = PolySpec::make(data.features.cols(), config.degree);

    const Matrix Xtrain = poly_expand(model.poly, scaler_apply(model.scaler, Xtrain_raw));
    const Matrix Xtest = poly_expand(model.poly, scaler_apply(model.scaler, Xtest_raw));

    const CvResult cv =
        cross_validate_alpha(Xtrain, ytrain, config.folds, config.seed ^ 0x9e3779b97f4a7c15ULL);
    model.alpha_selected = cv.alpha_selected;
    model.cv_scores = cv.fold_r2;

    const LarsPath path = lars_path(Xtrain, ytrain, LarsMode::lasso, /*standardize=*/true);
    model.coefficients = path.coefficients_at(model.alpha_selected);
    model.intercept = path.intercept_at(model.alpha_selected);

    auto predict_rows = [&](const Matrix& Xp) {
        std::vector<double> pred(Xp.rows(), model.intercept);
        for (std::size_t j = 0; j < Xp.cols(); ++j)
            if (model.coefficients[j] != 0.0)
                kernels::axpy(model.coefficients[j], Xp.col(j), pred.data(), Xp.rows());
        return pred;
    };
    model.train_r2 = r2_score(ytrain, predict_rows(Xtrain));
    model.test_r2 = r2_score(ytest, predict_rows(Xtest));
    return model;
}

Prediction predict_flagged(const RegressionModel& model, double i_ma, double dod_mah,
                           double t_c) {
    if (model.coefficients.size() != model.poly.exponents.size())
        throw ShapeError("predict: coefficient vector does not match the exponent table");
    const double raw[3] = {i_ma, dod_mah, t_c};
    Prediction out;
    std::vector<double> scaled(model.scaler.min.size());
    for (std::size_t j = 0; j < scaled.size(); ++j) {
        const double range = model.scaler.max[j] - model.scaler.min[j];
        scaled[j] = range == 0.0 ? 0.0 : (raw[j] + -model.scaler.min[j]) * (1.0 / range);
        if (scaled[j] < 0.0 || scaled[j] > 1.0) out.extrapolated = true;
    }
    // Same parent-times-feature recurrence the matrix expansion uses.
    std::vector<double> cols(model.poly.exponents.size());
    cols[0] = 1.0;
    double acc = model.intercept;
    for (std::size_t k = 1; k < cols.size(); ++k) {
        cols[k] = cols[model.poly.parent[k]] * scaled[model.poly.parent_feature[k]];
        if (model.coefficients[k] != 0.0) acc += model.coefficients[k] * cols[k];
    }
    if (model.coefficients[0] != 0.0) acc += model.coefficients[0] * cols[0];
    out.voltage = acc;
    return out;
}

double predict(const RegressionModel& model, double i_ma, double dod_mah, double t_c) {
    return predict_flagged(model, i_ma, dod_mah, t_c).voltage;
}

double r2_score(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size())
        throw ShapeError("r2_score: series length mismatch");
    if (actual.size() < 2) throw InsufficientDataError("r2_score: need at least 2 values");
    const double mean_y = kernels::mean(actual.data(), actual.size());
    double sse = 0.0, sst = 0.0;
    for (std::size_t k = 0; k < actual.size(); ++k) {
        sse += (actual[k] - predicted[k]) * (actual[k] - predicted[k]);
        sst += (actual[k] - mean_y) * (actual[k] - mean_y);
    }
    if (sst == 0.0)
        throw DegenerateDataError("r2_score: actual series is constant, denominator undefined");
    return 1.0 - sse / sst;
}

// ---------------------------------------------------------------------------
// JSON round trip
// ---------------------------------------------------------------------------

namespace {

json doubles_to_json(std::span<const double> v) {
    json a = json::array();
    for (double x : v) {
        if (std::isnan(x))
            a.push_back(nullptr);
        else
            a.push_back(x);
    }
    return a;
}

std::vector<double> doubles_from_json(const json& a) {
    std::vector<double> out;
    out.reserve(a.size());
    for (const auto& x : a)
        out.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                  : x.get<double>());
    return out;
}

} // namespace

std::string model_to_json(const RegressionModel& m) {
    json j{
        {"scaler", {{"min", doubles_to_json(m.scaler.min)}, {"max", doubles_to_json(m.scaler.max)}}},
        {"poly", {{"n_features", m.poly.n_features}, {"degree", m.poly.degree}}},
        {"coefficients", doubles_to_json(m.coefficients)},
        {"intercept", m.intercept},
        {"alpha", m.alpha_selected},
        {"cv_scores", doubles_to_json(m.cv_scores)},
        {"train_r2", m.train_r2},
        {"test_r2", m.test_r2},
        {"feature_names", m.feature_names},
    };
    return j.dump(2);
}

RegressionModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("regression model: invalid JSON: ") + e.what());
    }
    RegressionModel m;
    try {
        m.scaler.min = doubles_from_json(j.at("scaler").at("min"));
        m.scaler.max = doubles_from_json(j.at("scaler").at("max"));
        m.poly = PolySpec::make(j.at("poly").at("n_features").get<std::size_t>(),
                                j.at("poly").at("degree").get<std::size_t>());
        m.coefficients = doubles_from_json(j.at("coefficients"));
        m.intercept = j.at("intercept").get<double>();
        m.alpha_selected = j.at("alpha").get<double>();
        m.cv_scores = doubles_from_json(j.at("cv_scores"));
        m.train_r2 = j.at("train_r2").get<double>();
        m.test_r2 = j.at("test_r2").get<double>();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("regression model: ") + e.what());
    }
    if (m.coefficients.size() != m.poly.exponents.size())
        throw ValidationError("regression model: coefficient count " +
                              std::to_string(m.coefficients.size()) +
                              " does not match exponent table size " +
                              std::to_string(m.poly.exponents.size()));
    return m;
}

void save_model(const std::string& path, const RegressionModel& m) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << model_to_json(m) << '\n';
}

RegressionModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text);
}

} // namespace bdm::regression
