// Battery discharge modeling toolchain: ingest EPS telemetry, fit the
// equivalent-circuit and polynomial-regression discharge models, and produce
// LSB-error reports, model comparisons and sensitivity sweeps.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bdm/cli.hpp"
#include "bdm/errors.hpp"
#include "bdm/kernels.hpp"

using bdm::cli::RunConfig;

int main(int argc, char** argv) {
    RunConfig config;

    // Config file values sit between built-in defaults and explicit flags.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                config = bdm::cli::config_from_file(argv[i + 1], std::move(config));
            } catch (const bdm::Error& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            }
        }
    }

    CLI::App app{"CubeSat EPS battery discharge modeling toolchain"};
    app.require_subcommand(1);
    std::string config_path; // consumed above; declared so --config parses
    app.add_option("--config", config_path, "JSON config file (flags override it)");
    app.add_option("--out-dir", config.out_dir, "output directory")
        ->capture_default_str();
    app.add_option("--seed", config.seed, "RNG seed for splits and synthesis")
        ->capture_default_str();
    std::string kernels_backend;
    app.add_option("--kernels", kernels_backend, "force kernel backend: scalar|avx2");

    auto* ingest = app.add_subcommand(
        "ingest", "parse telemetry, extract discharge segments, apply the outlier policy");
    ingest->add_option("inputs", config.inputs, "telemetry files or globs")->required();
    ingest->add_option("--schema", config.schema_path, "column-name mapping JSON");
    ingest->add_option("--min-samples", config.segment_policy.min_samples,
                       "minimum samples per segment")->capture_default_str();
    ingest->add_option("--gap-factor", config.segment_policy.gap_factor,
                       "segment break at gap-factor x median interval")->capture_default_str();
    ingest->add_option("--discharge-threshold", config.segment_policy.discharge_threshold_ma,
                       "discharge test: batt_current above this (mA)")->capture_default_str();
    ingest->add_option("--outlier-lower", config.outlier_policy.lower_ma,
                       "outlier policy lower bound, exclusive (mA)")->capture_default_str();
    ingest->add_option("--outlier-upper", config.outlier_policy.upper_ma,
                       "outlier policy upper bound, inclusive (mA)")->capture_default_str();

    auto* fit_ecm = app.add_subcommand("fit-ecm",
                                       "identify the equivalent-circuit model parameters");
    fit_ecm->add_option("--segments", config.segments_file,
                        "segments CSV (default: <out-dir>/ingest/segments_all.csv)");
    fit_ecm->add_flag("--exclude-anomalous", config.exclude_anomalous,
                      "drop the four high-current dates");
    bool constant_params = false;
    fit_ecm->add_flag("--constant-params", constant_params,
                      "disable the affine-in-temperature parameter structure");
    fit_ecm->add_option("--max-iterations", config.ecm_options.max_outer_iterations,
                        "outer search iteration cap per grid start")->capture_default_str();

    auto* fit_ml = app.add_subcommand("fit-ml", "train the polynomial LASSO-LARS pipeline");
    fit_ml->add_option("--segments", config.segments_file,
                       "segments CSV (default: <out-dir>/ingest/segments_typical.csv)");
    fit_ml->add_flag("--exclude-anomalous", config.exclude_anomalous,
                     "drop the four high-current dates");
    fit_ml->add_option("--degree", config.ml.degree, "polynomial degree")
        ->capture_default_str();
    fit_ml->add_option("--folds", config.ml.folds, "cross-validation folds")
        ->capture_default_str();
    fit_ml->add_option("--train-fraction", config.ml.train_fraction, "train split fraction")
        ->capture_default_str();
    fit_ml->add_flag("--chronological", config.ml.chronological_split,
                     "split chronologically instead of by seeded shuffle");

    auto* eval_cmd = app.add_subcommand("eval", "LSB error report for a fitted model");
    eval_cmd->add_option("--model", config.model_path, "model artifact JSON")->required();
    eval_cmd->add_option("--kind", config.model_kind, "model kind: auto|ecm|ml")
        ->capture_default_str();
    eval_cmd->add_option("--segments", config.segments_file, "segments CSV to evaluate on");
    eval_cmd->add_option("--lsb", config.lsb_override,
                         "LSB step in volts (default: inferred from the data lattice)");
    eval_cmd->add_option("--label", config.report_label, "report label");
    eval_cmd->add_flag("--exclude-anomalous", config.exclude_anomalous,
                       "drop the four high-current dates");

    auto* compare = app.add_subcommand("compare", "side-by-side model comparison");
    compare->add_option("--first", config.compare_first, "eval report JSON")->required();
    compare->add_option("--second", config.compare_second, "eval report JSON")->required();

    auto* sweep = app.add_subcommand("sweep", "voltage and dU/dI sweeps over a current grid");
    sweep->add_option("--model", config.model_path, "model artifact JSON")->required();
    sweep->add_option("--kind", config.model_kind, "model kind: auto|ecm|ml")
        ->capture_default_str();
    sweep->add_option("--t", config.sweep.t_c, "temperature setpoint, C")
        ->capture_default_str();
    sweep->add_option("--dod-start", config.sweep.dod_start, "first DOD level, mAh")
        ->capture_default_str();
    sweep->add_option("--dod-stop", config.sweep.dod_stop, "last DOD level, mAh")
        ->capture_default_str();
    sweep->add_option("--dod-step", config.sweep.dod_step, "DOD step, mAh")
        ->capture_default_str();
    sweep->add_option("--i-start", config.sweep.i_start, "first current, mA")
        ->capture_default_str();
    sweep->add_option("--i-stop", config.sweep.i_stop, "last current, mA")
        ->capture_default_str();
    sweep->add_option("--i-step", config.sweep.i_step, "current step, mA")
        ->capture_default_str();
    sweep->add_option("--delta-i", config.sweep.delta_i, "forward-difference step, mA")
        ->capture_default_str();

    auto* synth = app.add_subcommand("synth", "generate synthetic discharge telemetry");
    synth->add_option("--spec", config.synth_spec_path, "SynthSpec JSON (default: demo fixture)");
    synth->add_option("--output", config.synth_out,
                      "output CSV (default: <out-dir>/synth_telemetry.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!kernels_backend.empty()) {
            if (kernels_backend == "scalar")
                bdm::kernels::force_backend(bdm::kernels::Backend::scalar);
            else if (kernels_backend == "avx2")
                bdm::kernels::force_backend(bdm::kernels::Backend::avx2);
            else
                throw bdm::ConfigError("unknown kernel backend: " + kernels_backend);
        }
        if (constant_params) config.ecm_options.affine_in_t = false;

        if (ingest->parsed()) bdm::cli::cmd_ingest(config);
        if (fit_ecm->parsed()) bdm::cli::cmd_fit_ecm(config);
        if (fit_ml->parsed()) bdm::cli::cmd_fit_ml(config);
        if (eval_cmd->parsed()) bdm::cli::cmd_eval(config);
        if (compare->parsed()) bdm::cli::cmd_compare(config);
        if (sweep->parsed()) bdm::cli::cmd_sweep(config);
        if (synth->parsed()) bdm::cli::cmd_synth(config);
    } catch (const bdm::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const bdm::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const bdm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
