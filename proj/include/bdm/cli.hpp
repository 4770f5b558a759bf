#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdm/ecm.hpp"
#include "bdm/regression.hpp"
#include "bdm/telemetry.hpp"
#include "bdm/types.hpp"

namespace bdm::cli {

struct SweepGrid {
    double t_c = 5.0;
    double dod_start = 0.0;
    double dod_stop = 200.0;
    double dod_step = 20.0;
    double i_start = 10.0;
    double i_stop = 1190.0;
    double i_step = 10.0;
    double delta_i = 1.0;
};

struct RunConfig {
    std::vector<std::string> inputs;   // telemetry files or globs
    std::string schema_path;           // optional column-name mapping JSON
    std::string out_dir = "out";
    std::uint64_t seed = 42;

    telemetry::SegmentPolicy segment_policy;
    telemetry::OutlierPolicy outlier_policy;
    bool exclude_anomalous = false;    // drop the four high-current dates

    std::string segments_file;         // default depends on the command
    ecm::EcmFitOptions ecm_options;
    regression::PipelineConfig ml;

    std::string model_path;
    std::string model_kind = "auto";   // auto | ecm | ml
    double lsb_override = 0.0;         // 0 = infer from the data lattice
    std::string report_label;

    std::string compare_first;
    std::string compare_second;

    SweepGrid sweep;

    std::string synth_spec_path;       // JSON SynthSpec; built-in fixture if empty
    std::string synth_out;
};

// Merge settings from a JSON config file over the defaults; CLI flags are
// applied on top by the frontend.
RunConfig config_from_file(const std::string& path, RunConfig base = {});

// Commands. Each throws bdm::Error on failure and removes partial outputs.
void cmd_ingest(const RunConfig& config);
void cmd_fit_ecm(const RunConfig& config);
void cmd_fit_ml(const RunConfig& config);
void cmd_eval(const RunConfig& config);
void cmd_compare(const RunConfig& config);
void cmd_sweep(const RunConfig& config);
void cmd_synth(const RunConfig& config);

// Segment files as written by ingest: telemetry columns plus segment_id and
// dod, loadable back into segments.
void save_segments(const std::string& path, std::span<const DischargeSegment> segments);
std::vector<DischargeSegment> load_segments(const std::string& path);

std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns);

} // namespace bdm::cli
