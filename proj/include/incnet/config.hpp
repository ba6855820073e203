#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "incnet/cost_model.hpp"
#include "incnet/dataset.hpp"
#include "incnet/topology.hpp"
#include "incnet/trainer.hpp"

namespace incnet {

struct DataConfig {
    std::string format;  // "idx" or "csv"
    std::string train_images, train_labels, test_images, test_labels;
    std::string train_csv, test_csv;
    std::size_t label_column = 0;
    std::vector<std::size_t> input_shape;
};

struct SharingSelectionConfig {
    enum class Mode { sweep, fixed };
    Mode mode = Mode::sweep;
    double tolerance_points = 1.0;
    std::vector<std::size_t> candidates;  // empty -> topology defaults
    std::size_t fixed_split = 0;
};

struct CostConfig {
    double throughput = 1e12;       // MACs/second
    double bandwidth = 1e11;        // accesses/second
    std::size_t batch_size = 32;
    CostModelConfig model;
    std::string preset;             // "", "resnet34", "resnet101"
    std::size_t preset_classes = 0;
};

// One experiment bundle: everything a run needs, loaded from a single JSON
// file. All paths resolve relative to the config file's directory. The
// output directory yields to the INCNET_OUTPUT_DIR environment variable.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string output_dir;
    std::string model_file;  // default: <output_dir>/model.incn

    DataConfig data;
    std::vector<LayerSpec> layers;  // head fan_out filled per use
    std::vector<std::size_t> split_candidates;

    std::vector<std::vector<int>> plan_sets;
    bool plan_random = false;
    std::vector<std::size_t> plan_sizes;

    Hyperparams hp;
    SharingSelectionConfig sharing;
    IncrementOptions increment;
    EnergyTable energy;
    CostConfig cost;

    Topology topology_for(std::size_t head_width) const;
    IncrementPlan make_plan(const std::vector<int>& available_classes) const;
};

ExperimentConfig load_config(const std::string& path);

}  // namespace incnet
