#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace bdm {

// One timestamped EPS measurement row: battery channel plus the five
// body-mounted panels. All fields are finite once a sample exists; the
// parser rejects rows that are not.
struct TelemetrySample {
    double timestamp = 0.0;                    // seconds since epoch
    std::array<double, 5> panel_voltage{};     // mV
    std::array<double, 5> panel_current{};     // mA
    std::array<double, 5> panel_temp{};        // degrees C
    double batt_voltage = 0.0;                 // V
    double batt_current = 0.0;                 // mA, positive = discharge
    double batt_temp = 0.0;                    // degrees C
    std::string source_date;                   // date tag of the originating file
};

// Contiguous discharge interval. dod is aligned 1:1 with samples,
// dod[0] == 0, units mA·h.
struct DischargeSegment {
    std::vector<TelemetrySample> samples;
    std::vector<double> dod;
    std::string source_date;
    std::size_t rejected_count = 0;            // outlier samples removed
};

struct FeatureSummary {
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double max = 0.0;
};

// Pooled statistics over all samples of all segments.
struct FeatureStats {
    FeatureSummary batt_voltage;
    FeatureSummary batt_current;
    FeatureSummary dod;
    FeatureSummary batt_temp;
    std::size_t sample_count = 0;
};

} // namespace bdm
