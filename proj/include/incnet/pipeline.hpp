#pragma once

#include <string>

#include "incnet/config.hpp"
#include "incnet/model.hpp"

namespace incnet {

// The CLI verbs as library functions so tests can drive full pipelines
// in-process. Each throws on failure (the CLI maps exception categories to
// exit codes) and writes its CSV outputs under config.output_dir. Outputs are
// byte-identical across reruns with the same config and seeds: CSVs carry
// modeled per-iteration seconds (cost-model time proxy), never wall clock.

struct LoadedData {
    LabeledDataset train;
    LabeledDataset test;
};

LoadedData load_experiment_data(const ExperimentConfig& config);

// trains on class set 0, stores the model, writes train_base_report.csv
void run_train_base(const ExperimentConfig& config, const std::string& model_path = "");

// consumes the next class set as the probe increment, writes
// sharing_curve.csv, stores the selected config and the probe branch in the
// model. The first selection is reused for later increments; pass resweep to
// run the sweep again on a later increment and replace the selection.
void run_sweep(const ExperimentConfig& config, const std::string& model_path = "",
               bool resweep = false);

// consumes the next class set and attaches one branch
void run_add(const ExperimentConfig& config, std::size_t ordinal,
             const std::string& model_path = "");

// scope: "updated" or "branch:<ordinal>"; writes eval_routing.csv
double run_eval(const ExperimentConfig& config, const std::string& scope,
                const std::string& model_path = "");

// analytic cost report at a sharing fraction; writes cost_report.csv and
// cost_summary.txt
CostReport run_cost(const ExperimentConfig& config, double sharing_fraction);

std::string default_model_path(const ExperimentConfig& config);

}  // namespace incnet
