#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "incnet/topology.hpp"

namespace incnet {

// Parameter tensors of one layer, in op order (kernels/weights, bias).
using LayerParams = std::vector<Tensor>;

struct Provenance {
    std::size_t increment_ordinal = 0;
    SharingConfig sharing;
    std::uint64_t seed = 0;

    bool operator==(const Provenance&) const = default;
};

// Frozen leading feature maps of a widened branch's first conv layer: copies
// of the base maps (plus maps added by earlier widen increments). Forward
// output is concat(conv(x, kernels), conv(x, <trainable part>)); training
// never touches these tensors.
struct FrozenPrefix {
    Tensor kernels;  // [C_frozen, C_in, k, k]
    Tensor bias;     // [C_frozen]
};

// Retrainable tail starting at split_index, with its own head sized to the
// classes it serves. specs describe layers [split_index, end) and may differ
// from the base topology (widened conv, re-dimensioned head).
struct BranchModel {
    std::size_t split_index = 0;
    std::vector<LayerSpec> specs;
    std::vector<LayerParams> params;
    std::vector<int> class_map;  // global class ids, head output order
    std::optional<FrozenPrefix> frozen_prefix;
    Provenance provenance;

    std::size_t trainable_param_count() const;
    std::size_t frozen_param_count() const;  // frozen prefix only
};

// One shared trunk (the base network's lower layers), the base head, and a
// branch per learned increment. base_params are frozen for good once base
// training finishes; every later operation may only read them.
struct IncrementalModel {
    Topology topology;
    std::vector<LayerParams> base_params;  // full depth
    std::vector<int> base_class_map;
    std::uint64_t base_seed = 0;
    std::optional<SharingConfig> selected;
    std::vector<BranchModel> branches;

    std::size_t branch_count() const { return branches.size() + 1; }  // ordinal 0 = base

    std::vector<int> all_classes() const;
    std::size_t increments_consumed() const;  // base = ordinal 0, branches follow

    std::uint64_t trunk_hash() const;  // layers below selected split (whole base if none)
    std::uint64_t base_hash() const;   // all base params
    std::uint64_t branch_hash(std::size_t ordinal) const;
    std::uint64_t model_hash() const;
};

// Fresh parameters for a topology; weights ~ N(0, 1/sqrt(fan_in)), biases 0.
// Bit-identical for identical (topology, seed).
std::vector<LayerParams> build_network(const Topology& topology, std::uint64_t seed);

IncrementalModel make_base_model(const Topology& topology, std::vector<int> class_map,
                                 std::uint64_t seed);

enum class WidenInit { matched_random, cloned };

// Grow-the-last-conv increment: appends an untrained branch whose first layer
// stacks every existing map of the last conv layer (frozen) plus extra_maps
// new trainable maps, followed by copies of the layers after it and a fresh
// head of new_head_width outputs. The class map is assigned at training time.
void widen_last_conv(IncrementalModel& model, std::size_t extra_maps, std::size_t new_head_width,
                     WidenInit init, std::uint64_t seed);

// Clone of the base tail at the given split. Tail tensors are bit-identical
// to the base; the head is copied bit-exact when the new class count matches
// the base head width and otherwise re-initialized with zero-mean Gaussian
// weights matching the base head's empirical stddev. split_index 0 is the
// explicit no-sharing configuration (full-depth clone).
BranchModel clone_branch(const IncrementalModel& model, const SharingConfig& config,
                         std::vector<int> class_map, std::uint64_t seed);

// Validates class disjointness and split consistency, then appends.
void attach_branch(IncrementalModel& model, BranchModel branch);

// ---------------------------------------------------------------------------
// Network execution over (specs, params) views. Used by trainer and fusion.
// ---------------------------------------------------------------------------

struct ForwardTrace {
    // inputs[i] = activation entering layer i; inputs.back() = final output
    std::vector<Tensor> inputs;
    std::vector<std::optional<PoolRecord>> pool_records;
};

// Runs layers [0, specs.size()) of a concrete stack; params[i] empty for
// parameter-free layers.
Tensor forward_stack(const std::vector<LayerSpec>& specs, const std::vector<LayerParams>& params,
                     const Tensor& input, ForwardTrace* trace = nullptr);

// Branch forward from the activation at its split boundary.
Tensor branch_forward(const BranchModel& branch, const Tensor& split_activation,
                      ForwardTrace* trace = nullptr);

// Full forward of branch `ordinal` (0 = base) from a network input.
Tensor model_forward(const IncrementalModel& model, std::size_t ordinal, const Tensor& input);

}  // namespace incnet
