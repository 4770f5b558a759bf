#include "bdm/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "bdm/dsv.hpp"
#include "bdm/energy.hpp"
#include "bdm/errors.hpp"
#include "bdm/kernels.hpp"

namespace bdm::telemetry {

using nlohmann::json;

ColumnSchema ColumnSchema::load(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw IoError("cannot open schema file: " + json_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError("schema file " + json_path + ": " + e.what());
    }
    ColumnSchema s;
    auto get_str = [&](const char* key, std::string& dst) {
        if (j.contains(key)) dst = j.at(key).get<std::string>();
    };
    auto get_arr = [&](const char* key, std::array<std::string, 5>& dst) {
        if (!j.contains(key)) return;
        const auto& a = j.at(key);
        if (!a.is_array() || a.size() != 5)
            throw SchemaError(std::string("schema key '") + key + "' must be a 5-element array");
        for (int i = 0; i < 5; ++i) dst[i] = a[i].get<std::string>();
    };
    get_str("timestamp", s.timestamp);
    get_arr("panel_voltage", s.panel_voltage);
    get_arr("panel_current", s.panel_current);
    get_arr("panel_temp", s.panel_temp);
    get_str("batt_voltage", s.batt_voltage);
    get_str("batt_current", s.batt_current);
    get_str("batt_temp", s.batt_temp);
    if (j.contains("delimiter")) {
        const auto d = j.at("delimiter").get<std::string>();
        if (d.size() != 1) throw SchemaError("schema delimiter must be a single character");
        s.delimiter = d[0];
    }
    return s;
}

namespace {

struct ColumnIndex {
    std::size_t timestamp;
    std::array<std::size_t, 5> panel_voltage;
    std::array<std::size_t, 5> panel_current;
    std::array<std::size_t, 5> panel_temp;
    std::size_t batt_voltage;
    std::size_t batt_current;
    std::size_t batt_temp;
};

ColumnIndex resolve_columns(const std::vector<std::string>& header,
                            const ColumnSchema& schema) {
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < header.size(); ++i) pos.emplace(header[i], i);
    auto find = [&](const std::string& name) {
        auto it = pos.find(name);
        if (it == pos.end())
            throw SchemaError("missing mandatory column '" + name + "' in header");
        return it->second;
    };
    ColumnIndex ix{};
    ix.timestamp = find(schema.timestamp);
    for (int p = 0; p < 5; ++p) {
        ix.panel_voltage[p] = find(schema.panel_voltage[p]);
        ix.panel_current[p] = find(schema.panel_current[p]);
        ix.panel_temp[p] = find(schema.panel_temp[p]);
    }
    ix.batt_voltage = find(schema.batt_voltage);
    ix.batt_current = find(schema.batt_current);
    ix.batt_temp = find(schema.batt_temp);
    return ix;
}

} // namespace

ParseResult parse_telemetry(std::istream& in, const ColumnSchema& schema,
                            const std::string& source_date) {
    std::string line;
    if (!std::getline(in, line)) throw EmptyInputError("telemetry input is empty");
    const auto header = dsv::split(line, schema.delimiter);
    const ColumnIndex ix = resolve_columns(header, schema);

    ParseResult result;
    std::vector<std::size_t> line_numbers;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = dsv::split(line, schema.delimiter);
        if (fields.size() < header.size()) {
            result.rejects.push_back({line_no, line, "expected " +
                                      std::to_string(header.size()) + " fields, got " +
                                      std::to_string(fields.size())});
            continue;
        }
        TelemetrySample s;
        s.source_date = source_date;
        bool ok = true;
        std::string bad_field;
        auto grab = [&](std::size_t col, double& dst) {
            if (!ok) return;
            const auto v = dsv::parse_double(fields[col]);
            if (!v || !std::isfinite(*v)) {
                ok = false;
                bad_field = header[col];
                return;
            }
            dst = *v;
        };
        grab(ix.timestamp, s.timestamp);
        for (int p = 0; p < 5; ++p) {
            grab(ix.panel_voltage[p], s.panel_voltage[p]);
            grab(ix.panel_current[p], s.panel_current[p]);
            grab(ix.panel_temp[p], s.panel_temp[p]);
        }
        grab(ix.batt_voltage, s.batt_voltage);
        grab(ix.batt_current, s.batt_current);
        grab(ix.batt_temp, s.batt_temp);
        if (!ok) {
            result.rejects.push_back({line_no, line, "unparseable or non-finite value in '" +
                                      bad_field + "'"});
            continue;
        }
        result.samples.push_back(std::move(s));
        line_numbers.push_back(line_no);
    }
    if (result.samples.empty() && result.rejects.empty())
        throw EmptyInputError("telemetry input has a header but no data rows");

    // Order by timestamp, then reject duplicates by name.
    std::vector<std::size_t> order(result.samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return result.samples[a].timestamp < result.samples[b].timestamp;
    });
    for (std::size_t k = 1; k < order.size(); ++k) {
        if (result.samples[order[k]].timestamp == result.samples[order[k - 1]].timestamp)
            throw ValidationError("duplicate timestamp " +
                                  dsv::format_double(result.samples[order[k]].timestamp) +
                                  " at lines " + std::to_string(line_numbers[order[k - 1]]) +
                                  " and " + std::to_string(line_numbers[order[k]]));
    }
    std::vector<TelemetrySample> sorted;
    sorted.reserve(result.samples.size());
    for (std::size_t i : order) sorted.push_back(std::move(result.samples[i]));
    result.samples = std::move(sorted);
    return result;
}

void write_telemetry(std::ostream& out, std::span<const TelemetrySample> samples,
                     const ColumnSchema& schema) {
    const char d = schema.delimiter;
    out << schema.timestamp;
    for (int p = 0; p < 5; ++p) out << d << schema.panel_voltage[p];
    for (int p = 0; p < 5; ++p) out << d << schema.panel_current[p];
    for (int p = 0; p < 5; ++p) out << d << schema.panel_temp[p];
    out << d << schema.batt_voltage << d << schema.batt_current << d << schema.batt_temp
        << '\n';
    for (const auto& s : samples) {
        out << dsv::format_double(s.timestamp);
        for (int p = 0; p < 5; ++p) out << d << dsv::format_double(s.panel_voltage[p]);
        for (int p = 0; p < 5; ++p) out << d << dsv::format_double(s.panel_current[p]);
        for (int p = 0; p < 5; ++p) out << d << dsv::format_double(s.panel_temp[p]);
        out << d << dsv::format_double(s.batt_voltage) << d
            << dsv::format_double(s.batt_current) << d << dsv::format_double(s.batt_temp)
            << '\n';
    }
}

namespace {

double median_interval(std::span<const TelemetrySample> samples) {
    std::vector<double> gaps;
    gaps.reserve(samples.size());
    for (std::size_t k = 1; k < samples.size(); ++k)
        gaps.push_back(samples[k].timestamp - samples[k - 1].timestamp);
    if (gaps.empty()) return 0.0;
    std::sort(gaps.begin(), gaps.end());
    const std::size_t m = gaps.size() / 2;
    return gaps.size() % 2 ? gaps[m] : 0.5 * (gaps[m - 1] + gaps[m]);
}

DischargeSegment make_segment(std::vector<TelemetrySample>&& run) {
    DischargeSegment seg;
    seg.source_date = run.front().source_date;
    seg.samples = std::move(run);
    if (seg.samples.size() >= 2) {
        std::vector<double> t(seg.samples.size()), i(seg.samples.size());
        for (std::size_t k = 0; k < seg.samples.size(); ++k) {
            t[k] = seg.samples[k].timestamp;
            i[k] = seg.samples[k].batt_current;
        }
        seg.dod = energy::integrate_dod(t, i);
    } else {
        seg.dod.assign(seg.samples.size(), 0.0);
    }
    return seg;
}

} // namespace

SegmentationResult extract_discharge_segments(std::span<const TelemetrySample> samples,
                                              const SegmentPolicy& policy) {
    for (std::size_t k = 1; k < samples.size(); ++k)
        if (samples[k].timestamp <= samples[k - 1].timestamp)
            throw ValidationError("extract_discharge_segments: input not time-ordered at index " +
                                  std::to_string(k));

    const double gap_tolerance = policy.gap_factor * median_interval(samples);

    SegmentationResult out;
    std::vector<TelemetrySample> run;
    auto flush = [&] {
        if (run.size() >= policy.min_samples && !run.empty())
            out.segments.push_back(make_segment(std::move(run)));
        else
            out.short_run_count += run.size();
        run.clear();
    };
    for (const auto& s : samples) {
        if (!(s.batt_current > policy.discharge_threshold_ma)) {
            flush();
            ++out.non_discharge_count;
            continue;
        }
        if (!run.empty()) {
            const double gap = s.timestamp - run.back().timestamp;
            if (gap_tolerance > 0.0 && gap > gap_tolerance) flush();
        }
        run.push_back(s);
    }
    flush();
    return out;
}

FilterResult filter_outliers(const DischargeSegment& segment, const OutlierPolicy& policy) {
    FilterResult out;
    std::vector<TelemetrySample> kept;
    kept.reserve(segment.samples.size());
    for (const auto& s : segment.samples) {
        if (s.batt_current > policy.lower_ma && s.batt_current <= policy.upper_ma)
            kept.push_back(s);
        else
            out.rejected.push_back(s);
    }
    if (kept.empty())
        throw EmptyInputError("filter_outliers: all samples rejected, segment is empty");

    out.segment.source_date = segment.source_date;
    out.segment.rejected_count = segment.rejected_count + out.rejected.size();
    out.segment.samples = std::move(kept);
    if (out.segment.samples.size() >= 2) {
        std::vector<double> t(out.segment.samples.size()), i(out.segment.samples.size());
        for (std::size_t k = 0; k < out.segment.samples.size(); ++k) {
            t[k] = out.segment.samples[k].timestamp;
            i[k] = out.segment.samples[k].batt_current;
        }
        out.segment.dod = energy::integrate_dod(t, i);
    } else {
        out.segment.dod.assign(out.segment.samples.size(), 0.0);
    }
    return out;
}

namespace {

FeatureSummary summarize_series(const std::vector<double>& v) {
    FeatureSummary f;
    f.mean = kernels::mean(v.data(), v.size());
    f.std = std::sqrt(kernels::variance(v.data(), v.size(), /*sample=*/true));
    auto [mn, mx] = kernels::minmax(v.data(), v.size());
    f.min = mn;
    f.max = mx;
    return f;
}

} // namespace

FeatureStats summarize(std::span<const DischargeSegment> segments) {
    std::size_t total = 0;
    for (const auto& seg : segments) total += seg.samples.size();
    if (total == 0) throw EmptyInputError("summarize: no samples in input segments");

    std::vector<double> voltage, current, dod, temp;
    voltage.reserve(total);
    current.reserve(total);
    dod.reserve(total);
    temp.reserve(total);
    for (const auto& seg : segments) {
        for (std::size_t k = 0; k < seg.samples.size(); ++k) {
            voltage.push_back(seg.samples[k].batt_voltage);
            current.push_back(seg.samples[k].batt_current);
            dod.push_back(seg.dod[k]);
            temp.push_back(seg.samples[k].batt_temp);
        }
    }
    FeatureStats stats;
    stats.sample_count = total;
    stats.batt_voltage = summarize_series(voltage);
    stats.batt_current = summarize_series(current);
    stats.dod = summarize_series(dod);
    stats.batt_temp = summarize_series(temp);
    return stats;
}

const std::vector<std::string>& anomalous_dates() {
    static const std::vector<std::string> dates{"2022-01-24", "2021-07-05", "2021-07-09",
                                                "2021-05-21"};
    return dates;
}

bool is_anomalous_date(const std::string& date) {
    const auto& d = anomalous_dates();
    return std::find(d.begin(), d.end(), date) != d.end();
}

std::string date_from_filename(const std::string& path) {
    const std::string stem = std::filesystem::path(path).stem().string();
    // look for YYYY-MM-DD or YYYY_MM_DD
    for (std::size_t i = 0; i + 10 <= stem.size(); ++i) {
        const auto at = [&](std::size_t k) { return stem[i + k]; };
        auto digit = [&](std::size_t k) { return at(k) >= '0' && at(k) <= '9'; };
        const bool sep = (at(4) == '-' || at(4) == '_') && at(7) == at(4);
        if (digit(0) && digit(1) && digit(2) && digit(3) && sep && digit(5) && digit(6) &&
            digit(8) && digit(9)) {
            std::string d = stem.substr(i, 10);
            std::replace(d.begin(), d.end(), '_', '-');
            return d;
        }
    }
    return stem;
}

} // namespace bdm::telemetry
