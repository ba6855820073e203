#pragma once

#include <vector>

#include "incnet/dataset.hpp"
#include "incnet/model.hpp"

namespace incnet {

struct FusedPrediction {
    int global_class = -1;
    std::size_t winning_branch = 0;
    std::vector<Tensor> per_branch_probs;  // index = branch ordinal (0 = base)
};

// Softmax probabilities over one branch's classes (ordinal 0 = base head).
Tensor predict_branch(const IncrementalModel& model, std::size_t ordinal, const Tensor& input);

// Argmax over the concatenation of every branch's probability vector. The
// trunk forward runs once and its activations feed all branches. Ties break
// to the lowest branch ordinal, then the lowest global class id.
FusedPrediction fuse_predict(const IncrementalModel& model, const Tensor& input);

struct FusedEval {
    double accuracy_percent = 0.0;
    std::vector<std::size_t> routing_counts;   // winners per branch ordinal
    std::vector<std::size_t> routing_correct;  // correct winners per branch ordinal
};

FusedEval evaluate_fused(const IncrementalModel& model, const LabeledDataset& test_data);

}  // namespace incnet
