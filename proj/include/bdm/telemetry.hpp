#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bdm/types.hpp"

namespace bdm::telemetry {

// Logical field -> column name mapping for delimiter-separated telemetry
// files. Defaults are the canonical names this toolchain emits itself.
struct ColumnSchema {
    std::string timestamp = "timestamp";
    std::array<std::string, 5> panel_voltage = {
        "panel_voltage_1", "panel_voltage_2", "panel_voltage_3",
        "panel_voltage_4", "panel_voltage_5"};
    std::array<std::string, 5> panel_current = {
        "panel_current_1", "panel_current_2", "panel_current_3",
        "panel_current_4", "panel_current_5"};
    std::array<std::string, 5> panel_temp = {
        "panel_temp_1", "panel_temp_2", "panel_temp_3",
        "panel_temp_4", "panel_temp_5"};
    std::string batt_voltage = "batt_voltage";
    std::string batt_current = "batt_current";
    std::string batt_temp = "batt_temp";
    char delimiter = ',';

    static ColumnSchema load(const std::string& json_path);
};

struct RejectedRow {
    std::size_t line_number = 0; // 1-based, header is line 1
    std::string content;
    std::string reason;
};

struct ParseResult {
    std::vector<TelemetrySample> samples; // ordered by timestamp
    std::vector<RejectedRow> rejects;     // unparseable or non-finite rows
};

ParseResult parse_telemetry(std::istream& in, const ColumnSchema& schema,
                            const std::string& source_date);

void write_telemetry(std::ostream& out, std::span<const TelemetrySample> samples,
                     const ColumnSchema& schema);

struct SegmentPolicy {
    std::size_t min_samples = 10;
    double discharge_threshold_ma = 0.0;  // sample is discharging when above
    double gap_factor = 3.0;              // x median sampling interval
};

struct SegmentationResult {
    std::vector<DischargeSegment> segments;
    std::size_t non_discharge_count = 0;  // samples failing the discharge test
    std::size_t short_run_count = 0;      // discharge samples in runs below min length
};

SegmentationResult extract_discharge_segments(std::span<const TelemetrySample> samples,
                                              const SegmentPolicy& policy = {});

struct OutlierPolicy {
    double lower_ma = 0.0;   // exclusive
    double upper_ma = 500.0; // inclusive
};

struct FilterResult {
    DischargeSegment segment;              // DOD recomputed on the kept samples
    std::vector<TelemetrySample> rejected; // originals, input order
};

FilterResult filter_outliers(const DischargeSegment& segment,
                             const OutlierPolicy& policy = {});

FeatureStats summarize(std::span<const DischargeSegment> segments);

// Dates whose discharge currents exceed 1000 mA; fits can run on all curves
// or with these four excluded.
const std::vector<std::string>& anomalous_dates();
bool is_anomalous_date(const std::string& date);

// Best-effort YYYY-MM-DD tag from a file name; falls back to the stem.
std::string date_from_filename(const std::string& path);

} // namespace bdm::telemetry
