#include "incnet/fusion.hpp"

#include <algorithm>
#include <set>

#include "incnet/error.hpp"
#include "incnet/ops.hpp"

namespace incnet {

namespace {

const std::vector<int>& branch_classes(const IncrementalModel& model, std::size_t ordinal) {
    if (ordinal == 0) return model.base_class_map;
    if (ordinal > model.branches.size()) throw ConfigError("branch ordinal out of range");
    const auto& map = model.branches[ordinal - 1].class_map;
    if (map.empty()) throw ConfigError("branch " + std::to_string(ordinal) + " has no classes yet");
    return map;
}

}  // namespace

Tensor predict_branch(const IncrementalModel& model, std::size_t ordinal, const Tensor& input) {
    branch_classes(model, ordinal);  // validates ordinal and trained state
    return softmax(model_forward(model, ordinal, input));
}

FusedPrediction fuse_predict(const IncrementalModel& model, const Tensor& input) {
    if (input.shape() != model.topology.input_shape)
        throw ShapeError("fuse_predict input shape mismatch: " + input.shape_str());

    // one trunk/base forward; branch stacks start from the cached activation
    // at their split boundary
    ForwardTrace base_trace;
    Tensor base_logits =
        forward_stack(model.topology.layers, model.base_params, input, &base_trace);

    FusedPrediction out;
    out.per_branch_probs.reserve(model.branch_count());
    out.per_branch_probs.push_back(softmax(base_logits));
    for (const auto& b : model.branches) {
        if (b.class_map.empty()) throw ConfigError("fuse_predict over an untrained branch");
        out.per_branch_probs.push_back(
            softmax(branch_forward(b, base_trace.inputs[b.split_index])));
    }

    double best = -1.0;
    for (std::size_t ordinal = 0; ordinal < out.per_branch_probs.size(); ++ordinal) {
        const auto& classes = branch_classes(model, ordinal);
        const Tensor& probs = out.per_branch_probs[ordinal];
        for (std::size_t j = 0; j < probs.size(); ++j) {
            double p = probs[j];
            bool take = p > best;
            if (!take && p == best && ordinal == out.winning_branch)
                take = classes[j] < out.global_class;  // same branch, lower class id
            if (take) {
                best = p;
                out.global_class = classes[j];
                out.winning_branch = ordinal;
            }
        }
    }
    return out;
}

FusedEval evaluate_fused(const IncrementalModel& model, const LabeledDataset& test_data) {
    std::set<int> known;
    for (int c : model.all_classes()) known.insert(c);
    for (int label : test_data.class_ids)
        if (!known.count(label))
            throw DataError("test label " + std::to_string(label) + " is not a learned class");

    FusedEval eval;
    eval.routing_counts.assign(model.branch_count(), 0);
    eval.routing_correct.assign(model.branch_count(), 0);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test_data.size(); ++i) {
        FusedPrediction p = fuse_predict(model, test_data.inputs[i]);
        eval.routing_counts[p.winning_branch] += 1;
        if (p.global_class == test_data.labels[i]) {
            ++correct;
            eval.routing_correct[p.winning_branch] += 1;
        }
    }
    eval.accuracy_percent =
        test_data.empty() ? 0.0 : 100.0 * static_cast<double>(correct) / test_data.size();
    return eval;
}

}  // namespace incnet
