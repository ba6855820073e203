#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "incnet/ops.hpp"
#include "incnet/tensor.hpp"

namespace incnet {

enum class LayerKind { conv, pool, relu, sigmoid, fc, softmax_head };

const char* layer_kind_name(LayerKind kind);

// One layer of a feed-forward topology. Derived fields (in_channels, fan_in,
// fan_out for the head) are resolved while validating the shape chain, so a
// stored spec is always fully concrete.
struct LayerSpec {
    LayerKind kind = LayerKind::relu;

    // conv
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 0;
    std::size_t stride = 1;
    std::size_t padding = 0;

    // pool
    PoolKind pool_kind = PoolKind::mean;
    std::size_t window = 0;

    // fc / softmax_head
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;

    std::size_t trainable_param_count() const {
        switch (kind) {
            case LayerKind::conv:
                return kernel * kernel * in_channels * out_channels + out_channels;
            case LayerKind::fc:
            case LayerKind::softmax_head:
                return fan_in * fan_out + fan_out;
            default:
                return 0;
        }
    }

    bool has_params() const { return trainable_param_count() > 0; }

    // output shape given a concrete input shape; throws ShapeError on mismatch
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& input_shape) const;

    static LayerSpec conv_spec(std::size_t maps, std::size_t kernel, std::size_t stride = 1,
                               std::size_t padding = 0);
    static LayerSpec pool_spec(PoolKind kind, std::size_t window);
    static LayerSpec relu_spec() { return LayerSpec{LayerKind::relu}; }
    static LayerSpec sigmoid_spec() { return LayerSpec{LayerKind::sigmoid}; }
    static LayerSpec fc_spec(std::size_t fan_out);
    static LayerSpec head_spec(std::size_t fan_out);

    bool operator==(const LayerSpec&) const = default;
};

// Ordered layer stack plus the boundaries at which a branch may start.
// split_candidates are strictly increasing, in (0, layer_count); index 0 is
// excluded — a 0%-sharing branch is expressed explicitly, never implied.
struct Topology {
    std::vector<std::size_t> input_shape;
    std::vector<LayerSpec> layers;
    std::vector<std::size_t> split_candidates;

    std::size_t layer_count() const { return layers.size(); }
    std::size_t total_trainable_params() const;
    std::size_t params_below(std::size_t split_index) const;

    // shape entering layer i (shape_at(0) == input_shape); shape_at(layer_count())
    // is the network output shape
    std::vector<std::size_t> shape_at(std::size_t i) const;

    const LayerSpec& head() const;
    std::size_t head_index() const;
    std::optional<std::size_t> last_conv_index() const;

    std::string describe() const;
};

// Validates the shape chain, resolves derived fields, and fills in default
// split candidates (every conv input boundary past 0, plus the head boundary)
// when none are given. Construction is the rejection point for non-dividing
// pool windows and incompatible adjacent layers.
Topology make_topology(std::vector<std::size_t> input_shape, std::vector<LayerSpec> layers,
                       std::vector<std::size_t> split_candidates = {});

// Trunk/tail split: layers [0, split_index) are frozen and shared, the rest
// retrain per branch. shared_fraction is params-below-split over total params
// and must always match a recomputation from the topology.
struct SharingConfig {
    std::size_t split_index = 0;
    double shared_fraction = 0.0;

    bool operator==(const SharingConfig&) const = default;
};

double sharing_fraction(const Topology& topology, std::size_t split_index);
SharingConfig make_sharing_config(const Topology& topology, std::size_t split_index);

enum class GrowthMode { head_only, head_plus_maps };

// (new trainable params) / (existing trainable params) when growing the
// network for `new_classes` extra outputs.
double param_increase_ratio(const Topology& topology, std::size_t new_classes, GrowthMode growth,
                            std::size_t extra_maps = 0);

}  // namespace incnet
