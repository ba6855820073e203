#pragma once

#include <optional>
#include <string>
#include <vector>

#include "incnet/tensor.hpp"

namespace incnet {

struct LabeledDataset {
    std::vector<Tensor> inputs;
    std::vector<int> labels;
    std::vector<int> class_ids;  // sorted, unique
    std::vector<std::size_t> input_shape;

    std::size_t size() const { return inputs.size(); }
    bool empty() const { return inputs.empty(); }

    void push(Tensor input, int label);
    void finalize();  // recompute class_ids
};

// IDX ingestion (the MNIST container format): big-endian magic and dims,
// pixels scaled to [0,1]. Errors are distinct: magic mismatch, truncation,
// image/label count mismatch.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

// Writes a dataset back out as IDX (u8 pixels, values round-tripped via 255).
void write_idx(const LabeledDataset& data, const std::string& images_path,
               const std::string& labels_path);

// CSV: one row per sample, label in `label_column`, remaining numeric cells
// are pixels reshaped to `shape`. A non-numeric first row is skipped as a
// header. Ragged or non-numeric rows are rejected with their row number.
LabeledDataset load_csv(const std::string& path, std::size_t label_column,
                        const std::vector<std::size_t>& shape);

void export_csv(const LabeledDataset& data, const std::string& path);

// ---------------------------------------------------------------------------
// Increment plan: ordered, mutually exclusive class sets. Training data for a
// set can be taken exactly once, in order; test data stays readable forever.
// ---------------------------------------------------------------------------

struct ClassSet {
    std::vector<int> classes;  // sorted
    bool consumed = false;
};

struct IncrementPlan {
    std::vector<ClassSet> sets;

    static IncrementPlan from_sets(std::vector<std::vector<int>> sets);
    // random partition of class_ids into sets of the given sizes
    static IncrementPlan random(const std::vector<int>& class_ids,
                                const std::vector<std::size_t>& sizes, std::uint64_t seed);
};

// Owns the per-increment splits and enforces the discard-old-data contract.
class IncrementStore {
  public:
    IncrementStore(const LabeledDataset& train, const LabeledDataset& test, IncrementPlan plan);

    std::size_t increment_count() const { return plan_.sets.size(); }
    const std::vector<int>& classes(std::size_t ordinal) const;

    // Single-use, order-enforced handle to an increment's training data.
    // Re-consumption and out-of-order consumption raise distinct errors.
    LabeledDataset take_train(std::size_t ordinal);

    // Evaluation is always permitted.
    const LabeledDataset& test(std::size_t ordinal) const;
    LabeledDataset test_union(std::size_t up_to_ordinal) const;  // inclusive

    // Mark earlier ordinals consumed by a previous process (model provenance)
    // without logging a new access.
    void mark_consumed_externally(std::size_t ordinal);

    const std::vector<std::size_t>& access_log() const { return access_log_; }
    std::size_t train_size(std::size_t ordinal) const;

  private:
    IncrementPlan plan_;
    std::vector<std::optional<LabeledDataset>> train_;  // emptied on consumption
    std::vector<LabeledDataset> test_;
    std::vector<std::size_t> access_log_;
    std::size_t next_ = 0;
};

}  // namespace incnet
