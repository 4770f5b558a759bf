#include "bdm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "bdm/errors.hpp"

namespace bdm::eval {

using nlohmann::json;

double infer_lsb(std::span<const double> values) {
    std::set<double> distinct(values.begin(), values.end());
    if (distinct.size() < 2)
        throw UnidentifiableError("infer_lsb: need at least 2 distinct values");

    std::vector<double> sorted(distinct.begin(), distinct.end());
    std::vector<double> gaps;
    gaps.reserve(sorted.size() - 1);
    for (std::size_t k = 1; k < sorted.size(); ++k) gaps.push_back(sorted[k] - sorted[k - 1]);
    const double step = *std::min_element(gaps.begin(), gaps.end());

    std::size_t divides = 0;
    double worst_gap = 0.0;
    for (double g : gaps) {
        const double ratio = g / step;
        if (std::abs(g - std::round(ratio) * step) <= 1e-9 * g)
            ++divides;
        else
            worst_gap = g;
    }
    const double fraction = static_cast<double>(divides) / static_cast<double>(gaps.size());
    if (fraction < 0.99)
        throw ValidationError(
            "infer_lsb: values are not on a lattice; candidate step " +
            std::to_string(step) + " does not divide gap " + std::to_string(worst_gap) +
            " (only " + std::to_string(fraction * 100.0) +
            "% of gaps divide); configure the LSB step explicitly");
    return step;
}

LsbErrorReport lsb_errors(std::span<const double> actual,
                          std::span<const double> predicted, double lsb) {
    if (actual.size() != predicted.size())
        throw ShapeError("lsb_errors: series length mismatch");
    if (!(lsb > 0.0)) throw ValidationError("lsb_errors: lsb step must be positive");
    if (actual.empty()) throw EmptyInputError("lsb_errors: empty series");

    LsbErrorReport rep;
    rep.lsb_step = lsb;
    rep.errors.resize(actual.size());

    // Lattice anchor: the smallest actual value. "Exact zero" means the
    // prediction rounds onto the same lattice point as the measurement.
    const double anchor = *std::min_element(actual.begin(), actual.end());

    std::size_t zeros = 0, within_half = 0, within_1 = 0, within_2 = 0;
    double max_abs = 0.0;
    for (std::size_t k = 0; k < actual.size(); ++k) {
        const double e = (actual[k] - predicted[k]) / lsb;
        rep.errors[k] = e;
        const double ae = std::abs(e);
        max_abs = std::max(max_abs, ae);
        if (ae <= 0.5) ++within_half;
        if (ae <= 1.0) ++within_1;
        if (ae <= 2.0) ++within_2;
        const double pred_on_lattice =
            anchor + std::round((predicted[k] - anchor) / lsb) * lsb;
        if (std::abs((actual[k] - pred_on_lattice) / lsb) < 0.5) ++zeros;
    }
    const double n = static_cast<double>(actual.size());
    rep.max_abs_error = max_abs;
    rep.exact_zero_fraction = zeros / n;
    rep.coverage_half = within_half / n;
    rep.coverage_1 = within_1 / n;
    rep.coverage_2 = within_2 / n;
    rep.exceed_2lsb_fraction = 1.0 - rep.coverage_2;

    // Histogram, 0.5 LSB bins centered on integer/half-integer error levels.
    const int half_bins =
        std::max(1, static_cast<int>(std::ceil((max_abs + 0.25) / 0.5)));
    rep.bin_edges.clear();
    for (int k = -half_bins; k <= half_bins; ++k)
        rep.bin_edges.push_back(0.5 * k - 0.25);
    rep.bin_edges.push_back(0.5 * half_bins + 0.25);
    rep.bin_counts.assign(rep.bin_edges.size() - 1, 0);
    for (double e : rep.errors) {
        auto it = std::upper_bound(rep.bin_edges.begin(), rep.bin_edges.end(), e);
        std::size_t bin = it == rep.bin_edges.begin()
                              ? 0
                              : static_cast<std::size_t>(it - rep.bin_edges.begin()) - 1;
        bin = std::min(bin, rep.bin_counts.size() - 1);
        ++rep.bin_counts[bin];
    }
    return rep;
}

SweepResult voltage_sweep(const VoltagePredictor& f, double t_c,
                          std::span<const double> dods, std::span<const double> i_grid) {
    for (std::size_t k = 1; k < i_grid.size(); ++k)
        if (!(i_grid[k] > i_grid[k - 1]))
            throw ValidationError("sweep: current grid must be strictly increasing");
    SweepResult out;
    out.temperature_c = t_c;
    out.dod_levels.assign(dods.begin(), dods.end());
    out.current_grid.assign(i_grid.begin(), i_grid.end());
    out.values = Matrix(dods.size(), i_grid.size());
    for (std::size_t r = 0; r < dods.size(); ++r)
        for (std::size_t c = 0; c < i_grid.size(); ++c)
            out.values(r, c) = f(i_grid[c], dods[r], t_c);
    return out;
}

SweepResult sensitivity_sweep(const VoltagePredictor& f, double t_c,
                              std::span<const double> dods,
                              std::span<const double> i_grid, double delta_i) {
    if (!(delta_i > 0.0)) throw ValidationError("sensitivity_sweep: delta_i must be positive");
    for (std::size_t k = 1; k < i_grid.size(); ++k)
        if (!(i_grid[k] > i_grid[k - 1]))
            throw ValidationError("sweep: current grid must be strictly increasing");
    SweepResult out;
    out.temperature_c = t_c;
    out.dod_levels.assign(dods.begin(), dods.end());
    out.current_grid.assign(i_grid.begin(), i_grid.end());
    out.values = Matrix(dods.size(), i_grid.size());
    for (std::size_t r = 0; r < dods.size(); ++r)
        for (std::size_t c = 0; c < i_grid.size(); ++c)
            out.values(r, c) =
                (f(i_grid[c] + delta_i, dods[r], t_c) - f(i_grid[c], dods[r], t_c)) / delta_i;
    return out;
}

namespace {

ModelErrorSummary summarize_report(const LsbErrorReport& r, const std::string& label) {
    return {label,          r.max_abs_error, r.exact_zero_fraction, r.coverage_half,
            r.coverage_1,   r.coverage_2,    r.exceed_2lsb_fraction};
}

std::string pick_winner(double first, double second, const std::string& l1,
                        const std::string& l2, bool larger_wins) {
    if (first == second) return "tie";
    const bool first_wins = larger_wins ? first > second : first < second;
    return first_wins ? l1 : l2;
}

} // namespace

ComparisonReport compare_models(const LsbErrorReport& first, const LsbErrorReport& second,
                                const std::string& first_label,
                                const std::string& second_label) {
    if (std::abs(first.lsb_step - second.lsb_step) >
        1e-12 * std::max(first.lsb_step, second.lsb_step))
        throw ValidationError("compare_models: reports use different LSB steps");
    if (first.errors.size() != second.errors.size())
        throw ValidationError(
            "compare_models: reports cover different sample counts, they must be "
            "computed against the same actual series");

    ComparisonReport cmp;
    cmp.lsb_step = first.lsb_step;
    cmp.first = summarize_report(first, first_label);
    cmp.second = summarize_report(second, second_label);
    cmp.delta_exact_zero = second.exact_zero_fraction - first.exact_zero_fraction;
    cmp.delta_half = second.coverage_half - first.coverage_half;
    cmp.delta_1 = second.coverage_1 - first.coverage_1;
    cmp.delta_2 = second.coverage_2 - first.coverage_2;
    cmp.winner_exact_zero = pick_winner(first.exact_zero_fraction, second.exact_zero_fraction,
                                        first_label, second_label, true);
    cmp.winner_half =
        pick_winner(first.coverage_half, second.coverage_half, first_label, second_label, true);
    cmp.winner_1 =
        pick_winner(first.coverage_1, second.coverage_1, first_label, second_label, true);
    cmp.winner_2 =
        pick_winner(first.coverage_2, second.coverage_2, first_label, second_label, true);
    cmp.winner_max_abs =
        pick_winner(first.max_abs_error, second.max_abs_error, first_label, second_label, false);
    return cmp;
}

std::string report_to_json(const LsbErrorReport& r, const std::string& label) {
    json j{
        {"label", label},
        {"lsb_step", r.lsb_step},
        {"sample_count", r.errors.size()},
        {"max_abs_error", r.max_abs_error},
        {"exact_zero_fraction", r.exact_zero_fraction},
        {"coverage", {{"0.5", r.coverage_half}, {"1", r.coverage_1}, {"2", r.coverage_2}}},
        {"exceed_2lsb_fraction", r.exceed_2lsb_fraction},
        {"histogram", {{"bin_edges", r.bin_edges}, {"counts", r.bin_counts}}},
        {"errors", r.errors},
    };
    return j.dump(2);
}

LsbErrorReport report_from_json(const std::string& text, std::string* label) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("lsb report: invalid JSON: ") + e.what());
    }
    LsbErrorReport r;
    try {
        if (label) *label = j.value("label", std::string());
        r.lsb_step = j.at("lsb_step").get<double>();
        r.max_abs_error = j.at("max_abs_error").get<double>();
        r.exact_zero_fraction = j.at("exact_zero_fraction").get<double>();
        r.coverage_half = j.at("coverage").at("0.5").get<double>();
        r.coverage_1 = j.at("coverage").at("1").get<double>();
        r.coverage_2 = j.at("coverage").at("2").get<double>();
        r.exceed_2lsb_fraction = j.at("exceed_2lsb_fraction").get<double>();
        r.bin_edges = j.at("histogram").at("bin_edges").get<std::vector<double>>();
        r.bin_counts = j.at("histogram").at("counts").get<std::vector<std::size_t>>();
        r.errors = j.at("errors").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("lsb report: ") + e.what());
    }
    return r;
}

std::string comparison_to_json(const ComparisonReport& c) {
    auto summary = [](const ModelErrorSummary& s) {
        return json{{"label", s.label},
                    {"max_abs_error_lsb", s.max_abs_error},
                    {"exact_zero_fraction", s.exact_zero_fraction},
                    {"coverage", {{"0.5", s.coverage_half}, {"1", s.coverage_1}, {"2", s.coverage_2}}},
                    {"exceed_2lsb_fraction", s.exceed_2lsb_fraction}};
    };
    json j{
        {"lsb_step", c.lsb_step},
        {"models", json::array({summary(c.first), summary(c.second)})},
        {"delta",
         {{"exact_zero", c.delta_exact_zero},
          {"0.5", c.delta_half},
          {"1", c.delta_1},
          {"2", c.delta_2}}},
        {"winner",
         {{"exact_zero", c.winner_exact_zero},
          {"0.5", c.winner_half},
          {"1", c.winner_1},
          {"2", c.winner_2},
          {"max_abs_error", c.winner_max_abs}}},
    };
    return j.dump(2);
}

} // namespace bdm::eval
