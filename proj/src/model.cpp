#include "incnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "incnet/hash.hpp"
#include "incnet/rng.hpp"

namespace incnet {

namespace {

LayerParams init_layer(const LayerSpec& spec, Rng& rng) {
    LayerParams p;
    switch (spec.kind) {
        case LayerKind::conv: {
            Tensor kernels({spec.out_channels, spec.in_channels, spec.kernel, spec.kernel});
            double std = 1.0 / std::sqrt(static_cast<double>(spec.kernel * spec.kernel * spec.in_channels));
            for (std::size_t i = 0; i < kernels.size(); ++i) kernels[i] = rng.normal(0.0, std);
            p.push_back(std::move(kernels));
            p.push_back(Tensor({spec.out_channels}));
            break;
        }
        case LayerKind::fc:
        case LayerKind::softmax_head: {
            Tensor weights({spec.fan_out, spec.fan_in});
            double std = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
            for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = rng.normal(0.0, std);
            p.push_back(std::move(weights));
            p.push_back(Tensor({spec.fan_out}));
            break;
        }
        default:
            break;
    }
    return p;
}

double empirical_std(const Tensor& t) {
    if (t.size() == 0) return 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) mean += t[i];
    mean /= static_cast<double>(t.size());
    double var = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) var += (t[i] - mean) * (t[i] - mean);
    var /= static_cast<double>(t.size());
    return std::sqrt(var);
}

double empirical_mean(const Tensor& t) {
    double mean = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) mean += t[i];
    return t.size() ? mean / static_cast<double>(t.size()) : 0.0;
}

// Fresh head whose weight distribution mirrors a reference head.
LayerParams init_head_like(const Tensor& reference_weights, std::size_t fan_in,
                           std::size_t fan_out, Rng& rng) {
    double std = empirical_std(reference_weights);
    if (std <= 0.0) std = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor weights({fan_out, fan_in});
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = rng.normal(0.0, std);
    LayerParams p;
    p.push_back(std::move(weights));
    p.push_back(Tensor({fan_out}));
    return p;
}

std::size_t params_size(const LayerParams& p) {
    std::size_t n = 0;
    for (const auto& t : p) n += t.size();
    return n;
}

}  // namespace

std::size_t BranchModel::trainable_param_count() const {
    std::size_t n = 0;
    for (const auto& p : params) n += params_size(p);
    return n;
}

std::size_t BranchModel::frozen_param_count() const {
    if (!frozen_prefix) return 0;
    return frozen_prefix->kernels.size() + frozen_prefix->bias.size();
}

std::vector<int> IncrementalModel::all_classes() const {
    std::vector<int> all = base_class_map;
    for (const auto& b : branches) all.insert(all.end(), b.class_map.begin(), b.class_map.end());
    return all;
}

std::size_t IncrementalModel::increments_consumed() const {
    std::size_t last = 0;
    for (const auto& b : branches) last = std::max(last, b.provenance.increment_ordinal);
    return last + 1;  // ordinal 0 (base) is always consumed
}

std::uint64_t IncrementalModel::trunk_hash() const {
    std::size_t split = selected ? selected->split_index : base_params.size();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < split; ++i) h = hash_tensors(base_params[i], h);
    return h;
}

std::uint64_t IncrementalModel::base_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& lp : base_params) h = hash_tensors(lp, h);
    return h;
}

std::uint64_t IncrementalModel::branch_hash(std::size_t ordinal) const {
    if (ordinal == 0) return base_hash();
    if (ordinal > branches.size()) throw ConfigError("branch ordinal out of range");
    const BranchModel& b = branches[ordinal - 1];
    std::uint64_t h = 0xcbf29ce484222325ULL;
    if (b.frozen_prefix) {
        h = hash_tensor(b.frozen_prefix->kernels, h);
        h = hash_tensor(b.frozen_prefix->bias, h);
    }
    for (const auto& lp : b.params) h = hash_tensors(lp, h);
    return h;
}

std::uint64_t IncrementalModel::model_hash() const {
    std::uint64_t h = base_hash();
    for (std::size_t k = 1; k <= branches.size(); ++k)
        h = fnv1a64(&h, sizeof(h), branch_hash(k));
    return h;
}

std::vector<LayerParams> build_network(const Topology& topology, std::uint64_t seed) {
    if (topology.layers.empty()) throw ConfigError("cannot build a zero-layer topology");
    Rng rng(derive_seed(seed, "init"));
    std::vector<LayerParams> params;
    params.reserve(topology.layers.size());
    for (const auto& spec : topology.layers) params.push_back(init_layer(spec, rng));
    return params;
}

IncrementalModel make_base_model(const Topology& topology, std::vector<int> class_map,
                                 std::uint64_t seed) {
    if (topology.head().fan_out != class_map.size())
        throw ConfigError("base head width does not match the initial class set");
    IncrementalModel m;
    m.topology = topology;
    m.base_params = build_network(topology, seed);
    m.base_class_map = std::move(class_map);
    m.base_seed = seed;
    return m;
}

void widen_last_conv(IncrementalModel& model, std::size_t extra_maps, std::size_t new_head_width,
                     WidenInit init, std::uint64_t seed) {
    auto conv_idx = model.topology.last_conv_index();
    if (!conv_idx) throw ConfigError("widen_last_conv: topology has no conv layer");
    if (extra_maps == 0) throw ConfigError("widen_last_conv: extra_maps must be >= 1");
    if (new_head_width == 0) throw ConfigError("widen_last_conv: head width must be >= 1");
    std::size_t split = *conv_idx;

    const LayerSpec& base_conv = model.topology.layers[split];
    const Tensor& base_kernels = model.base_params[split][0];
    const Tensor& base_bias = model.base_params[split][1];

    // frozen stack = base maps plus every earlier widen increment's new maps
    std::size_t frozen_maps = base_conv.out_channels;
    for (const auto& b : model.branches)
        if (b.frozen_prefix) frozen_maps += b.params[0][0].extent(0);

    Tensor frozen_kernels({frozen_maps, base_conv.in_channels, base_conv.kernel, base_conv.kernel});
    Tensor frozen_bias({frozen_maps});
    std::size_t row = 0;
    auto copy_rows = [&](const Tensor& k, const Tensor& b) {
        std::size_t rows = k.extent(0);
        std::size_t row_len = k.size() / rows;
        for (std::size_t r = 0; r < rows; ++r, ++row) {
            std::copy(k.data() + r * row_len, k.data() + (r + 1) * row_len,
                      frozen_kernels.data() + row * row_len);
            frozen_bias[row] = b[r];
        }
    };
    copy_rows(base_kernels, base_bias);
    for (const auto& b : model.branches)
        if (b.frozen_prefix) copy_rows(b.params[0][0], b.params[0][1]);

    // new trainable maps
    Rng rng(derive_seed(seed, "widen"));
    Tensor new_kernels({extra_maps, base_conv.in_channels, base_conv.kernel, base_conv.kernel});
    Tensor new_bias({extra_maps});
    if (init == WidenInit::cloned) {
        std::size_t row_len = new_kernels.size() / extra_maps;
        for (std::size_t r = 0; r < extra_maps; ++r) {
            std::size_t src = r % base_conv.out_channels;
            std::copy(base_kernels.data() + src * row_len, base_kernels.data() + (src + 1) * row_len,
                      new_kernels.data() + r * row_len);
            new_bias[r] = base_bias[src];
        }
    } else {
        double mean = empirical_mean(base_kernels);
        double std = empirical_std(base_kernels);
        if (std <= 0.0) std = 1.0 / std::sqrt(static_cast<double>(base_conv.kernel * base_conv.kernel *
                                                                  base_conv.in_channels));
        for (std::size_t i = 0; i < new_kernels.size(); ++i) new_kernels[i] = rng.normal(mean, std);
    }

    BranchModel branch;
    branch.split_index = split;
    branch.frozen_prefix = FrozenPrefix{std::move(frozen_kernels), std::move(frozen_bias)};

    // branch specs: widened conv, the layers after it, a fresh head
    std::size_t total_maps = frozen_maps + extra_maps;
    LayerSpec conv = base_conv;
    conv.out_channels = total_maps;
    branch.specs.push_back(conv);
    branch.params.push_back(LayerParams{});
    branch.params[0].push_back(std::move(new_kernels));
    branch.params[0].push_back(std::move(new_bias));

    std::vector<std::size_t> shape = conv.output_shape(model.topology.shape_at(split));
    for (std::size_t i = split + 1; i < model.topology.layer_count(); ++i) {
        LayerSpec spec = model.topology.layers[i];
        if (spec.kind == LayerKind::softmax_head) {
            spec.fan_in = shape_product(shape);
            spec.fan_out = new_head_width;
            branch.specs.push_back(spec);
            branch.params.push_back(
                init_head_like(model.base_params[i][0], spec.fan_in, spec.fan_out, rng));
        } else {
            if (spec.kind == LayerKind::fc) throw ConfigError("widen_last_conv: mid-network fc unsupported");
            branch.specs.push_back(spec);
            branch.params.push_back(model.base_params[i]);  // parameter-free layers: empty anyway
        }
        shape = branch.specs.back().output_shape(shape);
    }

    branch.provenance.sharing = make_sharing_config(model.topology, split);
    branch.provenance.seed = seed;
    model.branches.push_back(std::move(branch));
}

BranchModel clone_branch(const IncrementalModel& model, const SharingConfig& config,
                         std::vector<int> class_map, std::uint64_t seed) {
    std::size_t split = config.split_index;
    const auto& cands = model.topology.split_candidates;
    bool valid = split == 0 ||  // explicit no-sharing clone
                 std::find(cands.begin(), cands.end(), split) != cands.end();
    if (!valid)
        throw ConfigError("split index " + std::to_string(split) + " is not a split candidate");
    double expect = sharing_fraction(model.topology, split);
    if (std::abs(expect - config.shared_fraction) > 1e-12)
        throw ConfigError("sharing config fraction does not match its split index");
    if (class_map.empty()) throw ConfigError("clone_branch: class map must be non-empty");

    BranchModel branch;
    branch.split_index = split;
    Rng rng(derive_seed(seed, "clone-head"));
    std::size_t head = model.topology.head_index();
    for (std::size_t i = split; i < model.topology.layer_count(); ++i) {
        LayerSpec spec = model.topology.layers[i];
        if (i == head) {
            spec.fan_out = class_map.size();
            branch.specs.push_back(spec);
            if (class_map.size() == model.topology.layers[i].fan_out) {
                branch.params.push_back(model.base_params[i]);  // exact clone
            } else {
                branch.params.push_back(
                    init_head_like(model.base_params[i][0], spec.fan_in, spec.fan_out, rng));
            }
        } else {
            branch.specs.push_back(spec);
            branch.params.push_back(model.base_params[i]);
        }
    }
    branch.class_map = std::move(class_map);
    branch.provenance.sharing = config;
    branch.provenance.seed = seed;
    return branch;
}

void attach_branch(IncrementalModel& model, BranchModel branch) {
    std::set<int> existing;
    for (int c : model.all_classes()) existing.insert(c);
    for (int c : branch.class_map)
        if (existing.count(c))
            throw DataError("attach_branch: class " + std::to_string(c) + " already served");
    if (branch.class_map.empty()) throw DataError("attach_branch: branch has no classes");
    if (branch.specs.empty() || branch.specs.back().kind != LayerKind::softmax_head)
        throw ConfigError("attach_branch: branch must end in a head");
    if (branch.specs.back().fan_out != branch.class_map.size())
        throw ConfigError("attach_branch: head width does not match class map");
    if (branch.split_index >= model.topology.layer_count())
        throw ConfigError("attach_branch: split index beyond topology");
    if (!branch.frozen_prefix && model.selected &&
        branch.provenance.sharing.split_index != model.selected->split_index)
        throw ConfigError("attach_branch: branch split does not match the selected sharing config");
    model.branches.push_back(std::move(branch));
}

Tensor forward_stack(const std::vector<LayerSpec>& specs, const std::vector<LayerParams>& params,
                     const Tensor& input, ForwardTrace* trace) {
    Tensor x = input;
    if (trace) {
        trace->inputs.clear();
        trace->pool_records.assign(specs.size(), std::nullopt);
    }
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (trace) trace->inputs.push_back(x);
        const LayerSpec& s = specs[i];
        switch (s.kind) {
            case LayerKind::conv:
                x = conv2d_forward(x, params[i][0], params[i][1], s.stride, s.padding);
                break;
            case LayerKind::pool: {
                auto [out, rec] = pool_forward(x, s.pool_kind, s.window);
                x = std::move(out);
                if (trace) trace->pool_records[i] = std::move(rec);
                break;
            }
            case LayerKind::relu:
                x = relu_forward(x);
                break;
            case LayerKind::sigmoid:
                x = sigmoid_forward(x);
                break;
            case LayerKind::fc:
            case LayerKind::softmax_head:
                x = fc_forward(x, params[i][0], params[i][1]);
                break;
        }
    }
    if (trace) trace->inputs.push_back(x);
    return x;
}

Tensor branch_forward(const BranchModel& branch, const Tensor& split_activation,
                      ForwardTrace* trace) {
    if (!branch.frozen_prefix)
        return forward_stack(branch.specs, branch.params, split_activation, trace);

    // widened first layer: frozen maps and new maps convolve separately, the
    // outputs stack along the channel axis
    const LayerSpec& conv = branch.specs[0];
    Tensor frozen_out = conv2d_forward(split_activation, branch.frozen_prefix->kernels,
                                       branch.frozen_prefix->bias, conv.stride, conv.padding);
    Tensor new_out = conv2d_forward(split_activation, branch.params[0][0], branch.params[0][1],
                                    conv.stride, conv.padding);
    Tensor stacked({conv.out_channels, frozen_out.extent(1), frozen_out.extent(2)});
    std::copy(frozen_out.data(), frozen_out.data() + frozen_out.size(), stacked.data());
    std::copy(new_out.data(), new_out.data() + new_out.size(), stacked.data() + frozen_out.size());

    if (trace) {
        trace->inputs.clear();
        trace->pool_records.assign(branch.specs.size(), std::nullopt);
        trace->inputs.push_back(split_activation);
    }
    std::vector<LayerSpec> rest(branch.specs.begin() + 1, branch.specs.end());
    std::vector<LayerParams> rest_params(branch.params.begin() + 1, branch.params.end());
    ForwardTrace rest_trace;
    Tensor out = forward_stack(rest, rest_params, stacked, trace ? &rest_trace : nullptr);
    if (trace) {
        for (std::size_t i = 0; i < rest.size(); ++i) {
            trace->inputs.push_back(rest_trace.inputs[i]);
            trace->pool_records[i + 1] = std::move(rest_trace.pool_records[i]);
        }
        trace->inputs.push_back(out);
    }
    return out;
}

Tensor model_forward(const IncrementalModel& model, std::size_t ordinal, const Tensor& input) {
    if (input.shape() != model.topology.input_shape)
        throw ShapeError("input shape " + input.shape_str() + " does not match topology input");
    if (ordinal == 0)
        return forward_stack(model.topology.layers, model.base_params, input);
    if (ordinal > model.branches.size())
        throw ConfigError("branch ordinal " + std::to_string(ordinal) + " out of range");
    const BranchModel& b = model.branches[ordinal - 1];
    std::vector<LayerSpec> trunk_specs(model.topology.layers.begin(),
                                       model.topology.layers.begin() + b.split_index);
    std::vector<LayerParams> trunk_params(model.base_params.begin(),
                                          model.base_params.begin() + b.split_index);
    Tensor at_split = forward_stack(trunk_specs, trunk_params, input);
    return branch_forward(b, at_split);
}

}  // namespace incnet
