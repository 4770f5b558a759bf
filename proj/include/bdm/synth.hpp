#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdm/ecm.hpp"
#include "bdm/types.hpp"

namespace bdm::synth {

struct CurrentStep {
    double level_ma = 0.0;
    double duration_s = 0.0;
};

// Synthetic discharge generator; the independent oracle for fit recovery.
struct SynthSpec {
    ecm::EcmParams true_params;
    std::vector<CurrentStep> profile;  // piecewise-constant discharge current
    double temp_start_c = 5.0;         // linear ramp start
    double temp_end_c = 5.0;           // equal to start for a constant profile
    double noise_sigma_v = 0.0;
    double quantization_v = 0.0;       // 0 = none; applied after noise
    double sample_interval_s = 10.0;
    std::uint64_t seed = 0;
    std::string source_date = "synthetic";
};

DischargeSegment gen_discharge(const SynthSpec& spec);

// Load a SynthSpec from a JSON document (same field names as the struct).
SynthSpec spec_from_json(const std::string& text);
std::string spec_to_json(const SynthSpec& spec);

} // namespace bdm::synth
