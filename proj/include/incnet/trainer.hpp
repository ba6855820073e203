#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "incnet/dataset.hpp"
#include "incnet/model.hpp"

namespace incnet {

struct Hyperparams {
    double learning_rate = 0.1;
    double momentum = 0.9;
    std::size_t batch_size = 16;
    std::size_t epochs = 10;
    std::uint64_t seed = 0;
    bool shuffle = true;
    bool track_epoch_accuracy = true;

    void validate() const;
};

struct TrainReport {
    std::vector<double> epoch_mean_loss;
    std::vector<double> epoch_test_accuracy;  // only when tracked and a test set exists
    double final_test_accuracy = 0.0;
    double best_test_accuracy = 0.0;
    std::size_t best_epoch = 0;  // 1-based
    std::size_t iterations = 0;
    double seconds_per_iteration = 0.0;  // measured wall clock; never written to CSVs
    std::size_t params_trained = 0;
    std::size_t params_frozen = 0;
};

struct SharingPoint {
    SharingConfig config;
    double accuracy_percent = 0.0;
    std::size_t params_trained = 0;
};

// Accuracy of a probe increment's branch as a function of shared fraction.
// points are sorted by fraction; points[0] is the fraction-0 baseline.
struct SharingCurve {
    std::vector<SharingPoint> points;
    double baseline_accuracy = 0.0;
};

struct BranchResult {
    BranchModel branch;
    TrainReport report;
};

// Trains the base network on the initial class set. Deterministic under
// (topology, data, hp, seed).
IncrementalModel train_base(const Topology& topology, const LabeledDataset& train_data,
                            const LabeledDataset* test_data, const Hyperparams& hp,
                            TrainReport* report_out = nullptr);

// Clone at `config`, then train the clone on new-class data. Gradients exist
// only inside the branch; the trunk sees forward passes and zero writes.
BranchResult train_branch(const IncrementalModel& model, const SharingConfig& config,
                          const LabeledDataset& new_train, const LabeledDataset* new_test,
                          const Hyperparams& hp);

// Reference run for the sharing curve: a full-depth network initialized from
// the base model (fresh head), fine-tuned on the new data with nothing
// frozen. epochs == 0 just evaluates the initialized network.
BranchResult train_unshared_baseline(const IncrementalModel& model,
                                     const LabeledDataset& new_train,
                                     const LabeledDataset* new_test, const Hyperparams& hp);

// Same reference but starting from exactly the initialization a prepared
// branch received (trunk copies below its split, the branch tensors above,
// widened convs merged into one full kernel stack). Nothing is frozen, so
// shared-vs-unshared comparisons start from identical weights.
BranchResult train_unshared_from_branch(const IncrementalModel& model,
                                        const BranchModel& branch_init,
                                        const LabeledDataset& new_train,
                                        const LabeledDataset* new_test, const Hyperparams& hp);

// Trains the pending (last, class-less) branch created by widen_last_conv;
// assigns its class map from the data. Only the new maps and the new head
// train.
TrainReport train_pending_branch(IncrementalModel& model, const LabeledDataset& new_train,
                                 const LabeledDataset* new_test, const Hyperparams& hp);

struct SweepResult {
    SharingCurve curve;
    std::vector<BranchModel> trained;  // parallel to curve.points
};

// One branch per candidate split, all trained on the same probe increment
// with the same epoch budget, plus the fraction-0 baseline. Candidate runs
// are independent and run in parallel when `threads` > 1.
SweepResult sweep_sharing(const IncrementalModel& model, const LabeledDataset& probe_train,
                          const LabeledDataset& probe_test,
                          const std::vector<std::size_t>& candidate_splits, const Hyperparams& hp,
                          std::size_t threads = 1);

// Maximum shared fraction whose accuracy stays within tolerance_points of the
// fraction-0 baseline; fraction 0 when nothing else qualifies.
SharingConfig select_optimal_sharing(const SharingCurve& curve, double tolerance_points);

enum class IncrementApproach { clone, widen };

struct IncrementOptions {
    IncrementApproach approach = IncrementApproach::clone;
    std::size_t widen_extra_maps = 2;
    WidenInit widen_init = WidenInit::matched_random;
};

// clone/widen -> train -> attach, using the model's selected sharing config.
TrainReport add_increment(IncrementalModel& model, std::size_t ordinal,
                          const LabeledDataset& new_train, const LabeledDataset* new_test,
                          const Hyperparams& hp, const IncrementOptions& options = {});

enum class EvalScope { branch, updated };

// Top-1 accuracy (percent). branch scope rejects labels outside that branch;
// updated scope fuses all branches.
double evaluate(const IncrementalModel& model, const LabeledDataset& test_data, EvalScope scope,
                std::size_t branch_ordinal = 0);

}  // namespace incnet
