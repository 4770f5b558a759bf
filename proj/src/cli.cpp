#include "bdm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fnmatch.h>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "bdm/dsv.hpp"
#include "bdm/errors.hpp"
#include "bdm/eval.hpp"
#include "bdm/svg.hpp"
#include "bdm/synth.hpp"

namespace bdm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Removes everything written by a command unless the command completes.
class OutputGuard {
public:
    ~OutputGuard() {
        if (committed_) return;
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
    void track(const fs::path& p) { paths_.push_back(p); }
    void commit() { committed_ = true; }

private:
    std::vector<fs::path> paths_;
    bool committed_ = false;
};

void write_text(OutputGuard& guard, const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    guard.track(path);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!content.empty() && content.back() != '\n') out << '\n';
}

json stats_to_json(const FeatureStats& s) {
    auto f = [](const FeatureSummary& x) {
        return json{{"mean", x.mean}, {"std", x.std}, {"min", x.min}, {"max", x.max}};
    };
    return json{{"sample_count", s.sample_count},
                {"batt_voltage", f(s.batt_voltage)},
                {"batt_current", f(s.batt_current)},
                {"dod", f(s.dod)},
                {"batt_temp", f(s.batt_temp)}};
}

telemetry::ColumnSchema schema_for(const RunConfig& config) {
    return config.schema_path.empty() ? telemetry::ColumnSchema{}
                                      : telemetry::ColumnSchema::load(config.schema_path);
}

std::string default_segments(const RunConfig& config, const char* name) {
    if (!config.segments_file.empty()) return config.segments_file;
    return (fs::path(config.out_dir) / "ingest" / name).string();
}

std::vector<DischargeSegment> load_segments_for_fit(const RunConfig& config,
                                                    const char* default_name) {
    auto segments = load_segments(default_segments(config, default_name));
    if (config.exclude_anomalous) {
        std::erase_if(segments, [](const DischargeSegment& s) {
            return telemetry::is_anomalous_date(s.source_date);
        });
        if (segments.empty())
            throw EmptyInputError("all segments excluded by the anomalous-date filter");
    }
    return segments;
}

struct NamedPredictor {
    eval::VoltagePredictor fn;
    std::string label;
};

NamedPredictor load_predictor(const RunConfig& config) {
    if (config.model_path.empty()) throw ConfigError("--model is required");
    std::ifstream in(config.model_path);
    if (!in) throw IoError("cannot open model artifact " + config.model_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::string kind = config.model_kind;
    if (kind == "auto") {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw IoError("model artifact " + config.model_path + ": " + e.what());
        }
        kind = j.contains("u0") ? "ecm" : j.contains("coefficients") ? "ml" : "unknown";
    }
    if (kind == "ecm") {
        const auto params = ecm::params_from_json(text);
        return {[params](double i, double dod, double t) {
                    return ecm::predict_voltage(params, i, dod, t);
                },
                "ecm"};
    }
    if (kind == "ml") {
        const auto model = regression::model_from_json(text);
        return {[model](double i, double dod, double t) {
                    return regression::predict(model, i, dod, t);
                },
                "ml"};
    }
    throw ConfigError("cannot determine model kind for " + config.model_path +
                      "; pass --kind ecm or --kind ml");
}

std::vector<double> arange(double start, double stop, double step) {
    if (!(step > 0.0)) throw ConfigError("grid step must be positive");
    std::vector<double> out;
    for (double v = start; v <= stop + 1e-9 * step; v += step) out.push_back(v);
    if (out.empty()) throw ConfigError("empty grid");
    return out;
}

std::string sweep_to_csv(const eval::SweepResult& sweep) {
    std::ostringstream out;
    out << "dod_mah";
    for (double i : sweep.current_grid) out << ',' << dsv::format_double(i);
    out << '\n';
    for (std::size_t r = 0; r < sweep.dod_levels.size(); ++r) {
        out << dsv::format_double(sweep.dod_levels[r]);
        for (std::size_t c = 0; c < sweep.current_grid.size(); ++c)
            out << ',' << dsv::format_double(sweep.values(r, c));
        out << '\n';
    }
    return out.str();
}

std::vector<svg::Series> sweep_to_series(const eval::SweepResult& sweep) {
    std::vector<svg::Series> series;
    for (std::size_t r = 0; r < sweep.dod_levels.size(); ++r) {
        svg::Series s;
        s.label = "DOD " + dsv::format_double(sweep.dod_levels[r]) + " mAh";
        s.x = sweep.current_grid;
        s.y.resize(sweep.current_grid.size());
        for (std::size_t c = 0; c < sweep.current_grid.size(); ++c)
            s.y[c] = sweep.values(r, c);
        series.push_back(std::move(s));
    }
    return series;
}

} // namespace

std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns) {
    std::vector<std::string> files;
    for (const auto& pattern : patterns) {
        if (pattern.find('*') == std::string::npos &&
            pattern.find('?') == std::string::npos) {
            if (fs::exists(pattern)) files.push_back(pattern);
            continue;
        }
        const fs::path p(pattern);
        const fs::path dir = p.parent_path().empty() ? "." : p.parent_path();
        const std::string name = p.filename().string();
        if (!fs::is_directory(dir)) continue;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            if (fnmatch(name.c_str(), entry.path().filename().string().c_str(), 0) == 0)
                files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    files.erase(std::unique(files.begin(), files.end()), files.end());
    return files;
}

void save_segments(const std::string& path, std::span<const DischargeSegment> segments) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    const telemetry::ColumnSchema schema;
    out << schema.timestamp;
    for (int p = 0; p < 5; ++p) out << ',' << schema.panel_voltage[p];
    for (int p = 0; p < 5; ++p) out << ',' << schema.panel_current[p];
    for (int p = 0; p < 5; ++p) out << ',' << schema.panel_temp[p];
    out << ',' << schema.batt_voltage << ',' << schema.batt_current << ','
        << schema.batt_temp << ",source_date,segment_id,dod\n";
    for (std::size_t id = 0; id < segments.size(); ++id) {
        const auto& seg = segments[id];
        for (std::size_t k = 0; k < seg.samples.size(); ++k) {
            const auto& s = seg.samples[k];
            out << dsv::format_double(s.timestamp);
            for (int p = 0; p < 5; ++p) out << ',' << dsv::format_double(s.panel_voltage[p]);
            for (int p = 0; p < 5; ++p) out << ',' << dsv::format_double(s.panel_current[p]);
            for (int p = 0; p < 5; ++p) out << ',' << dsv::format_double(s.panel_temp[p]);
            out << ',' << dsv::format_double(s.batt_voltage) << ','
                << dsv::format_double(s.batt_current) << ','
                << dsv::format_double(s.batt_temp) << ',' << s.source_date << ',' << id
                << ',' << dsv::format_double(seg.dod[k]) << '\n';
        }
    }
}

std::vector<DischargeSegment> load_segments(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open segments file " + path +
                           " (run the ingest command first)");
    std::string line;
    if (!std::getline(in, line)) throw EmptyInputError("segments file is empty: " + path);
    const auto header = dsv::split(line, ',');
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < header.size(); ++i) pos[header[i]] = i;
    auto need = [&](const std::string& name) {
        auto it = pos.find(name);
        if (it == pos.end())
            throw SchemaError("segments file " + path + " is missing column '" + name + "'");
        return it->second;
    };
    const std::size_t c_ts = need("timestamp");
    const std::size_t c_v = need("batt_voltage");
    const std::size_t c_i = need("batt_current");
    const std::size_t c_t = need("batt_temp");
    const std::size_t c_id = need("segment_id");
    const std::size_t c_dod = need("dod");
    std::array<std::size_t, 5> c_pv{}, c_pi{}, c_pt{};
    const telemetry::ColumnSchema schema;
    for (int p = 0; p < 5; ++p) {
        c_pv[p] = need(schema.panel_voltage[p]);
        c_pi[p] = need(schema.panel_current[p]);
        c_pt[p] = need(schema.panel_temp[p]);
    }
    const std::size_t c_date = need("source_date");

    std::vector<DischargeSegment> segments;
    long current_id = -1;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = dsv::split(line, ',');
        auto num = [&](std::size_t col) {
            const auto v = dsv::parse_double(f.at(col));
            if (!v)
                throw ValidationError("segments file " + path + " line " +
                                      std::to_string(line_no) + ": bad number");
            return *v;
        };
        const long id = static_cast<long>(num(c_id));
        if (id != current_id) {
            segments.emplace_back();
            current_id = id;
        }
        TelemetrySample s;
        s.timestamp = num(c_ts);
        for (int p = 0; p < 5; ++p) {
            s.panel_voltage[p] = num(c_pv[p]);
            s.panel_current[p] = num(c_pi[p]);
            s.panel_temp[p] = num(c_pt[p]);
        }
        s.batt_voltage = num(c_v);
        s.batt_current = num(c_i);
        s.batt_temp = num(c_t);
        s.source_date = f.at(c_date);
        auto& seg = segments.back();
        if (seg.samples.empty()) seg.source_date = s.source_date;
        seg.samples.push_back(std::move(s));
        seg.dod.push_back(num(c_dod));
    }
    if (segments.empty()) throw EmptyInputError("segments file has no rows: " + path);
    return segments;
}

RunConfig config_from_file(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    RunConfig c = std::move(base);
    try {
        if (j.contains("inputs")) c.inputs = j.at("inputs").get<std::vector<std::string>>();
        c.schema_path = j.value("schema", c.schema_path);
        c.out_dir = j.value("out_dir", c.out_dir);
        c.seed = j.value("seed", c.seed);
        if (j.contains("segment_policy")) {
            const auto& s = j.at("segment_policy");
            c.segment_policy.min_samples = s.value("min_samples", c.segment_policy.min_samples);
            c.segment_policy.discharge_threshold_ma =
                s.value("discharge_threshold_ma", c.segment_policy.discharge_threshold_ma);
            c.segment_policy.gap_factor = s.value("gap_factor", c.segment_policy.gap_factor);
        }
        if (j.contains("outlier_policy")) {
            const auto& o = j.at("outlier_policy");
            c.outlier_policy.lower_ma = o.value("lower_ma", c.outlier_policy.lower_ma);
            c.outlier_policy.upper_ma = o.value("upper_ma", c.outlier_policy.upper_ma);
        }
        c.exclude_anomalous = j.value("exclude_anomalous", c.exclude_anomalous);
        c.segments_file = j.value("segments_file", c.segments_file);
        if (j.contains("ecm")) {
            const auto& e = j.at("ecm");
            c.ecm_options.affine_in_t = e.value("affine_in_t", c.ecm_options.affine_in_t);
            c.ecm_options.max_outer_iterations =
                e.value("max_outer_iterations", c.ecm_options.max_outer_iterations);
            if (e.contains("dod_kp_grid"))
                c.ecm_options.dod_kp_grid = e.at("dod_kp_grid").get<std::vector<double>>();
        }
        if (j.contains("ml")) {
            const auto& m = j.at("ml");
            c.ml.degree = m.value("degree", c.ml.degree);
            c.ml.folds = m.value("folds", c.ml.folds);
            c.ml.train_fraction = m.value("train_fraction", c.ml.train_fraction);
            c.ml.chronological_split =
                m.value("chronological_split", c.ml.chronological_split);
        }
        c.model_path = j.value("model", c.model_path);
        c.model_kind = j.value("model_kind", c.model_kind);
        c.lsb_override = j.value("lsb", c.lsb_override);
        c.report_label = j.value("label", c.report_label);
        c.compare_first = j.value("compare_first", c.compare_first);
        c.compare_second = j.value("compare_second", c.compare_second);
        if (j.contains("sweep")) {
            const auto& s = j.at("sweep");
            c.sweep.t_c = s.value("t_c", c.sweep.t_c);
            c.sweep.dod_start = s.value("dod_start", c.sweep.dod_start);
            c.sweep.dod_stop = s.value("dod_stop", c.sweep.dod_stop);
            c.sweep.dod_step = s.value("dod_step", c.sweep.dod_step);
            c.sweep.i_start = s.value("i_start", c.sweep.i_start);
            c.sweep.i_stop = s.value("i_stop", c.sweep.i_stop);
            c.sweep.i_step = s.value("i_step", c.sweep.i_step);
            c.sweep.delta_i = s.value("delta_i", c.sweep.delta_i);
        }
        c.synth_spec_path = j.value("synth_spec", c.synth_spec_path);
        c.synth_out = j.value("synth_out", c.synth_out);
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    return c;
}

void cmd_ingest(const RunConfig& config) {
    const auto files = expand_inputs(config.inputs);
    if (files.empty()) throw EmptyInputError("no input files matched the given patterns");
    const auto schema = schema_for(config);

    struct FileEntry {
        std::string path;
        std::string date;
        telemetry::ParseResult parsed;
    };
    std::vector<FileEntry> entries;
    for (const auto& path : files) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path);
        FileEntry e;
        e.path = path;
        e.date = telemetry::date_from_filename(path);
        e.parsed = telemetry::parse_telemetry(in, schema, e.date);
        entries.push_back(std::move(e));
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const FileEntry& a, const FileEntry& b) {
                         return a.date != b.date ? a.date < b.date : a.path < b.path;
                     });

    std::vector<DischargeSegment> all;     // unfiltered discharge segments
    std::vector<DischargeSegment> typical; // after the outlier policy
    std::vector<TelemetrySample> outliers;
    std::size_t total_samples = 0, non_discharge = 0, short_runs = 0;
    json input_list = json::array();
    std::string rejects_csv = "file,line,reason,content\n";
    for (const auto& e : entries) {
        total_samples += e.parsed.samples.size();
        for (const auto& rej : e.parsed.rejects) {
            std::string content = rej.content;
            std::replace(content.begin(), content.end(), ',', ';');
            rejects_csv += e.path + "," + std::to_string(rej.line_number) + "," +
                           rej.reason + "," + content + "\n";
        }
        auto segmented = telemetry::extract_discharge_segments(e.parsed.samples,
                                                               config.segment_policy);
        non_discharge += segmented.non_discharge_count;
        short_runs += segmented.short_run_count;
        for (auto& seg : segmented.segments) {
            auto filtered = telemetry::filter_outliers(seg, config.outlier_policy);
            outliers.insert(outliers.end(), filtered.rejected.begin(),
                            filtered.rejected.end());
            typical.push_back(std::move(filtered.segment));
            all.push_back(std::move(seg));
        }
        input_list.push_back({{"path", e.path},
                              {"source_date", e.date},
                              {"samples", e.parsed.samples.size()},
                              {"rejected_rows", e.parsed.rejects.size()}});
    }
    if (all.empty()) throw EmptyInputError("no discharge segments found in the inputs");

    const auto stats_all = telemetry::summarize(all);
    const auto stats_typical = telemetry::summarize(typical);

    OutputGuard guard;
    const fs::path dir = fs::path(config.out_dir) / "ingest";
    fs::create_directories(dir);

    auto segment_index = [](std::span<const DischargeSegment> segments) {
        json arr = json::array();
        for (std::size_t id = 0; id < segments.size(); ++id) {
            const auto& s = segments[id];
            arr.push_back({{"id", id},
                           {"source_date", s.source_date},
                           {"samples", s.samples.size()},
                           {"rejected", s.rejected_count},
                           {"start_timestamp", s.samples.front().timestamp},
                           {"end_timestamp", s.samples.back().timestamp},
                           {"max_dod", s.dod.back()}});
        }
        return arr;
    };

    guard.track(dir / "segments_all.csv");
    save_segments((dir / "segments_all.csv").string(), all);
    guard.track(dir / "segments_typical.csv");
    save_segments((dir / "segments_typical.csv").string(), typical);
    write_text(guard, dir / "rejects.csv", rejects_csv);
    {
        std::ostringstream out;
        telemetry::write_telemetry(out, outliers, schema);
        write_text(guard, dir / "outliers.csv", out.str());
    }

    const auto now = std::chrono::system_clock::now();
    json manifest{
        {"metadata",
         {{"generated_at",
           std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()}}},
        {"policy",
         {{"segment",
           {{"min_samples", config.segment_policy.min_samples},
            {"discharge_threshold_ma", config.segment_policy.discharge_threshold_ma},
            {"gap_factor", config.segment_policy.gap_factor}}},
          {"outlier",
           {{"lower_ma", config.outlier_policy.lower_ma},
            {"upper_ma", config.outlier_policy.upper_ma}}}}},
        {"inputs", input_list},
        {"counts",
         {{"total_samples", total_samples},
          {"discharge_samples_unfiltered", stats_all.sample_count},
          {"typical_samples", stats_typical.sample_count},
          {"outliers_removed", outliers.size()},
          {"non_discharge_samples", non_discharge},
          {"short_run_samples", short_runs}}},
        {"segments_all", segment_index(all)},
        {"segments_typical", segment_index(typical)},
        {"stats_unfiltered", stats_to_json(stats_all)},
        {"stats_typical", stats_to_json(stats_typical)},
        {"files",
         {{"segments_all", (dir / "segments_all.csv").string()},
          {"segments_typical", (dir / "segments_typical.csv").string()},
          {"rejects", (dir / "rejects.csv").string()},
          {"outliers", (dir / "outliers.csv").string()}}},
    };
    write_text(guard, dir / "manifest.json", manifest.dump(2));
    guard.commit();

    std::cout << "ingest: " << files.size() << " files, " << total_samples << " rows, "
              << stats_all.sample_count << " discharge samples in " << all.size()
              << " segments (" << stats_typical.sample_count
              << " typical after the outlier policy)\n";
}

void cmd_fit_ecm(const RunConfig& config) {
    const auto segments = load_segments_for_fit(config, "segments_all.csv");
    const auto report = ecm::fit_ecm(segments, config.ecm_options);

    OutputGuard guard;
    const fs::path dir(config.out_dir);
    write_text(guard, dir / "ecm_params.json", ecm::params_to_json(report.params));
    json j{
        {"rmse_v", report.rmse},
        {"samples", report.residuals.size()},
        {"curves_used", report.curves_used},
        {"iterations", report.iterations},
        {"converged", report.converged},
        {"constant_parameter_mode", report.constant_parameter_mode},
    };
    write_text(guard, dir / "ecm_fit_report.json", j.dump(2));
    {
        std::string csv = "residual_v\n";
        for (double r : report.residuals) csv += dsv::format_double(r) + "\n";
        write_text(guard, dir / "ecm_residuals.csv", csv);
    }
    guard.commit();
    std::cout << "fit-ecm: " << report.residuals.size() << " samples over "
              << report.curves_used.size() << " curves, rmse " << report.rmse << " V"
              << (report.converged ? "" : " (outer search hit the iteration cap)") << "\n";
}

void cmd_fit_ml(const RunConfig& config) {
    const auto segments = load_segments_for_fit(config, "segments_typical.csv");
    const auto dataset = regression::make_dataset(segments);
    auto ml = config.ml;
    ml.seed = config.seed;
    const auto model = regression::fit_pipeline(dataset, ml);

    OutputGuard guard;
    const fs::path dir(config.out_dir);
    write_text(guard, dir / "ml_model.json", regression::model_to_json(model));
    json j{
        {"degree", model.poly.degree},
        {"expanded_features", model.poly.exponents.size()},
        {"alpha", model.alpha_selected},
        {"train_r2", model.train_r2},
        {"test_r2", model.test_r2},
        {"samples", dataset.target.size()},
        {"folds", ml.folds},
        {"seed", ml.seed},
    };
    write_text(guard, dir / "ml_fit_report.json", j.dump(2));
    guard.commit();
    std::cout << "fit-ml: " << dataset.target.size() << " samples, degree "
              << model.poly.degree << " (" << model.poly.exponents.size()
              << " features), train R2 " << model.train_r2 << ", test R2 " << model.test_r2
              << "\n";
}

void cmd_eval(const RunConfig& config) {
    const auto predictor = load_predictor(config);
    const char* default_file =
        predictor.label == "ecm" ? "segments_all.csv" : "segments_typical.csv";
    const auto segments = load_segments_for_fit(config, default_file);

    std::vector<double> actual, predicted;
    for (const auto& seg : segments) {
        for (std::size_t k = 0; k < seg.samples.size(); ++k) {
            actual.push_back(seg.samples[k].batt_voltage);
            predicted.push_back(
                predictor.fn(seg.samples[k].batt_current, seg.dod[k], seg.samples[k].batt_temp));
        }
    }
    const double lsb =
        config.lsb_override > 0.0 ? config.lsb_override : eval::infer_lsb(actual);
    const auto report = eval::lsb_errors(actual, predicted, lsb);
    const std::string label =
        config.report_label.empty() ? predictor.label : config.report_label;

    OutputGuard guard;
    const fs::path dir(config.out_dir);
    write_text(guard, dir / ("eval_" + label + ".json"),
               eval::report_to_json(report, label));
    {
        std::string csv = "bin_low,bin_high,count\n";
        for (std::size_t k = 0; k < report.bin_counts.size(); ++k)
            csv += dsv::format_double(report.bin_edges[k]) + "," +
                   dsv::format_double(report.bin_edges[k + 1]) + "," +
                   std::to_string(report.bin_counts[k]) + "\n";
        write_text(guard, dir / ("eval_" + label + "_hist.csv"), csv);
    }
    guard.track(dir / ("eval_" + label + "_hist.svg"));
    svg::write_bar_chart((dir / ("eval_" + label + "_hist.svg")).string(),
                         "Prediction error distribution (" + label + ")", "error, LSB",
                         "count", report.bin_edges, report.bin_counts);
    guard.commit();
    std::cout << "eval[" << label << "]: lsb " << lsb << " V, max abs error "
              << report.max_abs_error << " LSB, <=2 LSB " << report.coverage_2 * 100.0
              << "%\n";
}

void cmd_compare(const RunConfig& config) {
    if (config.compare_first.empty() || config.compare_second.empty())
        throw ConfigError("compare needs --first and --second eval report paths");
    auto read = [](const std::string& path, std::string* label) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open eval report " + path);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        return eval::report_from_json(text, label);
    };
    std::string label1, label2;
    const auto first = read(config.compare_first, &label1);
    const auto second = read(config.compare_second, &label2);
    if (label1.empty()) label1 = "first";
    if (label2.empty()) label2 = "second";
    const auto cmp = eval::compare_models(first, second, label1, label2);

    OutputGuard guard;
    write_text(guard, fs::path(config.out_dir) / "comparison.json",
               eval::comparison_to_json(cmp));
    guard.commit();

    auto line = [](const eval::ModelErrorSummary& s) {
        std::ostringstream o;
        o << s.label << ": zero " << s.exact_zero_fraction * 100.0 << "%, <=0.5 "
          << s.coverage_half * 100.0 << "%, <=1 " << s.coverage_1 * 100.0 << "%, <=2 "
          << s.coverage_2 * 100.0 << "%, max " << s.max_abs_error << " LSB";
        return o.str();
    };
    std::cout << "compare:\n  " << line(cmp.first) << "\n  " << line(cmp.second)
              << "\n  winner at <=2 LSB: " << cmp.winner_2 << "\n";
}

void cmd_sweep(const RunConfig& config) {
    const auto predictor = load_predictor(config);
    const auto dods = arange(config.sweep.dod_start, config.sweep.dod_stop,
                             config.sweep.dod_step);
    const auto grid = arange(config.sweep.i_start, config.sweep.i_stop, config.sweep.i_step);

    const auto v = eval::voltage_sweep(predictor.fn, config.sweep.t_c, dods, grid);
    const auto s = eval::sensitivity_sweep(predictor.fn, config.sweep.t_c, dods, grid,
                                           config.sweep.delta_i);

    OutputGuard guard;
    const fs::path dir(config.out_dir);
    write_text(guard, dir / "sweep_voltage.csv", sweep_to_csv(v));
    write_text(guard, dir / "sweep_dudi.csv", sweep_to_csv(s));
    guard.track(dir / "sweep_voltage.svg");
    svg::write_line_chart((dir / "sweep_voltage.svg").string(),
                          "Battery voltage vs discharge current (" + predictor.label + ", T=" +
                              dsv::format_double(config.sweep.t_c) + " C)",
                          "I_batt, mA", "V_batt, V", sweep_to_series(v));
    guard.track(dir / "sweep_dudi.svg");
    svg::write_line_chart((dir / "sweep_dudi.svg").string(),
                          "dU/dI vs discharge current (" + predictor.label + ", T=" +
                              dsv::format_double(config.sweep.t_c) + " C)",
                          "I_batt, mA", "dU/dI, V/mA", sweep_to_series(s));
    guard.commit();
    std::cout << "sweep: " << dods.size() << " DOD levels x " << grid.size()
              << " current points at T=" << config.sweep.t_c << " C\n";
}

void cmd_synth(const RunConfig& config) {
    synth::SynthSpec spec;
    if (!config.synth_spec_path.empty()) {
        std::ifstream in(config.synth_spec_path);
        if (!in) throw IoError("cannot open synth spec " + config.synth_spec_path);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        spec = synth::spec_from_json(text);
    } else {
        // Demo fixture: plausible NiMH-pack discharge at room-ish temperature.
        spec.true_params.u0 = 4.19;
        spec.true_params.k_dod = {1.3e-3, -6e-6};
        spec.true_params.r = {2.4e-4, -2e-6};
        spec.true_params.u_p = {0.05, 5e-4};
        spec.true_params.dod_kp = {8.0, 0.1};
        spec.profile = {{320.0, 2400.0}, {260.0, 2400.0}};
        spec.temp_start_c = 4.0;
        spec.temp_end_c = 9.0;
        spec.noise_sigma_v = 0.0;
        spec.quantization_v = 0.0;
        spec.sample_interval_s = 10.0;
        spec.seed = config.seed;
    }
    const auto segment = synth::gen_discharge(spec);

    OutputGuard guard;
    const std::string out_path = config.synth_out.empty()
                                     ? (fs::path(config.out_dir) / "synth_telemetry.csv").string()
                                     : config.synth_out;
    std::ostringstream out;
    telemetry::write_telemetry(out, segment.samples, telemetry::ColumnSchema{});
    write_text(guard, out_path, out.str());
    guard.commit();
    std::cout << "synth: " << segment.samples.size() << " samples, final DOD "
              << segment.dod.back() << " mAh -> " << out_path << "\n";
}

} // namespace bdm::cli
