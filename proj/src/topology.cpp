#include "incnet/topology.hpp"

#include <algorithm>

#include "incnet/error.hpp"

namespace incnet {

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::conv: return "conv";
        case LayerKind::pool: return "pool";
        case LayerKind::relu: return "relu";
        case LayerKind::sigmoid: return "sigmoid";
        case LayerKind::fc: return "fc";
        case LayerKind::softmax_head: return "head";
    }
    return "?";
}

LayerSpec LayerSpec::conv_spec(std::size_t maps, std::size_t kernel, std::size_t stride,
                               std::size_t padding) {
    LayerSpec s;
    s.kind = LayerKind::conv;
    s.out_channels = maps;
    s.kernel = kernel;
    s.stride = stride;
    s.padding = padding;
    return s;
}

LayerSpec LayerSpec::pool_spec(PoolKind kind, std::size_t window) {
    LayerSpec s;
    s.kind = LayerKind::pool;
    s.pool_kind = kind;
    s.window = window;
    return s;
}

LayerSpec LayerSpec::fc_spec(std::size_t fan_out) {
    LayerSpec s;
    s.kind = LayerKind::fc;
    s.fan_out = fan_out;
    return s;
}

LayerSpec LayerSpec::head_spec(std::size_t fan_out) {
    LayerSpec s = fc_spec(fan_out);
    s.kind = LayerKind::softmax_head;
    return s;
}

std::vector<std::size_t> LayerSpec::output_shape(const std::vector<std::size_t>& in) const {
    switch (kind) {
        case LayerKind::conv: {
            if (in.size() != 3) throw ShapeError("conv layer needs a [C,H,W] input");
            if (in[0] != in_channels) throw ShapeError("conv in_channels mismatch");
            if (stride == 0 || kernel == 0 || out_channels == 0)
                throw ShapeError("conv layer has degenerate hyperparameters");
            if (kernel > in[1] + 2 * padding || kernel > in[2] + 2 * padding)
                throw ShapeError("conv kernel exceeds padded input");
            return {out_channels, (in[1] + 2 * padding - kernel) / stride + 1,
                    (in[2] + 2 * padding - kernel) / stride + 1};
        }
        case LayerKind::pool: {
            if (in.size() != 3) throw ShapeError("pool layer needs a [C,H,W] input");
            if (window == 0 || window > in[1] || window > in[2])
                throw ShapeError("pool window exceeds spatial extent");
            if (in[1] % window != 0 || in[2] % window != 0)
                throw ShapeError("pool window must divide spatial extents");
            return {in[0], in[1] / window, in[2] / window};
        }
        case LayerKind::relu:
        case LayerKind::sigmoid:
            return in;
        case LayerKind::fc:
        case LayerKind::softmax_head: {
            if (fan_in != shape_product(in))
                throw ShapeError("fc fan_in " + std::to_string(fan_in) +
                                 " does not match incoming size " +
                                 std::to_string(shape_product(in)));
            return {fan_out};
        }
    }
    throw ShapeError("unknown layer kind");
}

std::size_t Topology::total_trainable_params() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.trainable_param_count();
    return n;
}

std::size_t Topology::params_below(std::size_t split_index) const {
    if (split_index > layers.size()) throw ConfigError("split index out of range");
    std::size_t n = 0;
    for (std::size_t i = 0; i < split_index; ++i) n += layers[i].trainable_param_count();
    return n;
}

std::vector<std::size_t> Topology::shape_at(std::size_t i) const {
    std::vector<std::size_t> s = input_shape;
    for (std::size_t l = 0; l < i && l < layers.size(); ++l) s = layers[l].output_shape(s);
    return s;
}

const LayerSpec& Topology::head() const { return layers.at(head_index()); }

std::size_t Topology::head_index() const {
    if (layers.empty() || layers.back().kind != LayerKind::softmax_head)
        throw ConfigError("topology does not end in a softmax head");
    return layers.size() - 1;
}

std::optional<std::size_t> Topology::last_conv_index() const {
    for (std::size_t i = layers.size(); i > 0; --i)
        if (layers[i - 1].kind == LayerKind::conv) return i - 1;
    return std::nullopt;
}

std::string Topology::describe() const {
    std::string s;
    for (const auto& l : layers) {
        if (!s.empty()) s += " ";
        switch (l.kind) {
            case LayerKind::conv:
                s += "(" + std::to_string(l.kernel) + "x" + std::to_string(l.kernel) + ")" +
                     std::to_string(l.out_channels) + "c";
                break;
            case LayerKind::pool:
                s += std::to_string(l.window) + (l.pool_kind == PoolKind::max ? "mp" : "s");
                break;
            case LayerKind::relu: s += "relu"; break;
            case LayerKind::sigmoid: s += "sig"; break;
            case LayerKind::fc: s += std::to_string(l.fan_out) + "fc"; break;
            case LayerKind::softmax_head: s += std::to_string(l.fan_out) + "o"; break;
        }
    }
    return s;
}

Topology make_topology(std::vector<std::size_t> input_shape, std::vector<LayerSpec> layers,
                       std::vector<std::size_t> split_candidates) {
    if (layers.empty()) throw ConfigError("topology must contain at least one layer");
    for (auto e : input_shape)
        if (e == 0) throw ConfigError("input shape extents must be >= 1");

    Topology t;
    t.input_shape = std::move(input_shape);

    // resolve derived fields while walking the shape chain
    std::vector<std::size_t> shape = t.input_shape;
    for (auto& l : layers) {
        if (l.kind == LayerKind::conv) {
            if (shape.size() != 3)
                throw ConfigError("conv layer placed on a non-[C,H,W] input");
            l.in_channels = shape[0];
        } else if (l.kind == LayerKind::fc || l.kind == LayerKind::softmax_head) {
            l.fan_in = shape_product(shape);  // implicit flatten
            if (l.fan_out == 0) throw ConfigError("fc/head layer needs a positive fan_out");
        }
        shape = l.output_shape(shape);
        t.layers.push_back(l);
    }

    if (split_candidates.empty()) {
        for (std::size_t i = 1; i < t.layers.size(); ++i)
            if (t.layers[i].kind == LayerKind::conv) split_candidates.push_back(i);
        if (t.layers.back().kind == LayerKind::softmax_head && t.layers.size() > 1) {
            std::size_t h = t.layers.size() - 1;
            if (split_candidates.empty() || split_candidates.back() != h)
                split_candidates.push_back(h);
        }
    }
    std::size_t prev = 0;
    for (auto c : split_candidates) {
        if (c == 0) throw ConfigError("split candidate 0 is not allowed");
        if (c >= t.layers.size()) throw ConfigError("split candidate beyond last layer");
        if (c <= prev && prev != 0) throw ConfigError("split candidates must be strictly increasing");
        prev = c;
    }
    t.split_candidates = std::move(split_candidates);
    return t;
}

double sharing_fraction(const Topology& topology, std::size_t split_index) {
    std::size_t total = topology.total_trainable_params();
    if (total == 0) throw ConfigError("topology has no trainable parameters");
    return static_cast<double>(topology.params_below(split_index)) / static_cast<double>(total);
}

SharingConfig make_sharing_config(const Topology& topology, std::size_t split_index) {
    SharingConfig c;
    c.split_index = split_index;
    c.shared_fraction = sharing_fraction(topology, split_index);
    return c;
}

double param_increase_ratio(const Topology& topology, std::size_t new_classes, GrowthMode growth,
                            std::size_t extra_maps) {
    const LayerSpec& head = topology.head();
    std::size_t existing = topology.total_trainable_params();
    if (new_classes == 0) return 0.0;

    if (growth == GrowthMode::head_only) {
        std::size_t grown = head.fan_in * new_classes + new_classes;
        return static_cast<double>(grown) / static_cast<double>(existing);
    }

    auto conv_idx = topology.last_conv_index();
    if (!conv_idx) throw ConfigError("head_plus_maps growth needs a conv layer");
    const LayerSpec& conv = topology.layers[*conv_idx];
    std::size_t new_kernels = conv.kernel * conv.kernel * conv.in_channels * extra_maps + extra_maps;

    // the grown head sees the original feature vector plus the new maps' share
    auto conv_out = topology.shape_at(*conv_idx + 1);
    std::size_t per_map = head.fan_in / conv_out[0];
    std::size_t grown_fan_in = head.fan_in + per_map * extra_maps;
    std::size_t new_head = grown_fan_in * new_classes + new_classes;
    return static_cast<double>(new_kernels + new_head) / static_cast<double>(existing);
}

}  // namespace incnet
