#include "incnet/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "incnet/error.hpp"

namespace incnet {

OpCounts& OpCounts::operator+=(const OpCounts& o) {
    macs_forward += o.macs_forward;
    macs_backward += o.macs_backward;
    macs_backward_input += o.macs_backward_input;
    macs_update += o.macs_update;
    mem_reads += o.mem_reads;
    mem_writes += o.mem_writes;
    params += o.params;
    return *this;
}

const char* cost_phase_name(CostPhase phase) {
    switch (phase) {
        case CostPhase::inference: return "inference";
        case CostPhase::train_shared: return "shared";
        case CostPhase::train_active: return "active";
    }
    return "?";
}

void EnergyTable::validate() const {
    if (e_mac <= 0.0 || e_read <= 0.0 || e_write <= 0.0)
        throw ConfigError("energy table entries must be strictly positive");
    if (word_bytes == 0) throw ConfigError("word_bytes must be >= 1");
}

std::uint64_t CostNet::total_params() const {
    std::uint64_t n = 0;
    for (const auto& l : layers) n += l.params_train;
    return n;
}

std::uint64_t CostNet::params_below(std::size_t boundary) const {
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < boundary && i < layers.size(); ++i) n += layers[i].params_train;
    return n;
}

double CostNet::fraction_at(std::size_t boundary) const {
    std::uint64_t total = total_params();
    if (total == 0) throw ConfigError("cost net has no parameters");
    return static_cast<double>(params_below(boundary)) / static_cast<double>(total);
}

std::size_t CostNet::boundary_for_fraction(double target) const {
    if (split_candidates.empty()) throw ConfigError("cost net has no split candidates");
    std::size_t best = split_candidates.front();
    double best_gap = std::abs(fraction_at(best) - target);
    for (std::size_t b : split_candidates) {
        double gap = std::abs(fraction_at(b) - target);
        if (gap < best_gap || (gap == best_gap && b > best)) {
            best = b;
            best_gap = gap;
        }
    }
    return best;
}

CostNet cost_net_from_topology(const Topology& topology, const std::string& name) {
    CostNet net;
    net.name = name;
    for (std::size_t i = 0; i < topology.layer_count(); ++i) {
        const LayerSpec& s = topology.layers[i];
        auto in_shape = topology.shape_at(i);
        auto out_shape = topology.shape_at(i + 1);
        CostLayer l;
        l.label = std::string(layer_kind_name(s.kind)) + std::to_string(i);
        l.in_elems = shape_product(in_shape);
        l.out_elems = shape_product(out_shape);
        switch (s.kind) {
            case LayerKind::conv:
                l.kind = CostLayer::Kind::conv;
                l.macs_fwd = static_cast<std::uint64_t>(out_shape[1]) * out_shape[2] *
                             s.out_channels * s.kernel * s.kernel * s.in_channels;
                l.params_train = l.params_read = s.trainable_param_count();
                break;
            case LayerKind::fc:
            case LayerKind::softmax_head:
                l.kind = CostLayer::Kind::fc;
                l.macs_fwd = static_cast<std::uint64_t>(s.fan_in) * s.fan_out;
                l.params_train = l.params_read = s.trainable_param_count();
                break;
            case LayerKind::pool:
                l.kind = CostLayer::Kind::pool;
                break;
            case LayerKind::relu:
            case LayerKind::sigmoid:
                l.kind = CostLayer::Kind::act;
                break;
        }
        net.layers.push_back(std::move(l));
    }
    net.split_candidates = topology.split_candidates;
    return net;
}

// ---------------------------------------------------------------------------
// Architecture presets
// ---------------------------------------------------------------------------

namespace {

// Shortcut projections need the block's input dims, so the resnet builders
// handle them inline rather than through NetBuilder state.
struct Dims {
    std::size_t c, h, w;
};

void add_conv(CostNet& net, Dims& d, std::size_t out, std::size_t k, std::size_t stride,
              std::size_t pad, const std::string& label, bool candidate = true) {
    std::size_t ho = (d.h + 2 * pad - k) / stride + 1;
    std::size_t wo = (d.w + 2 * pad - k) / stride + 1;
    CostLayer l;
    l.label = label;
    l.kind = CostLayer::Kind::conv;
    l.in_elems = d.c * d.h * d.w;
    l.out_elems = out * ho * wo;
    l.macs_fwd = static_cast<std::uint64_t>(ho) * wo * out * k * k * d.c;
    l.params_train = l.params_read = static_cast<std::uint64_t>(k) * k * d.c * out + out;
    if (candidate) net.split_candidates.push_back(net.layers.size());
    net.layers.push_back(std::move(l));
    d = {out, ho, wo};
}

void add_bn(CostNet& net, const Dims& d, const std::string& label) {
    CostLayer l;
    l.label = label;
    l.kind = CostLayer::Kind::batchnorm;
    l.in_elems = l.out_elems = d.c * d.h * d.w;
    l.params_train = 2 * d.c;
    l.params_read = 4 * d.c;
    net.layers.push_back(std::move(l));
}

void add_act(CostNet& net, const Dims& d, const std::string& label) {
    CostLayer l;
    l.label = label;
    l.kind = CostLayer::Kind::act;
    l.in_elems = l.out_elems = d.c * d.h * d.w;
    net.layers.push_back(std::move(l));
}

void add_pool(CostNet& net, Dims& d, std::size_t k, std::size_t stride, std::size_t pad,
              const std::string& label) {
    std::size_t ho = (d.h + 2 * pad - k) / stride + 1;
    std::size_t wo = (d.w + 2 * pad - k) / stride + 1;
    CostLayer l;
    l.label = label;
    l.kind = CostLayer::Kind::pool;
    l.in_elems = d.c * d.h * d.w;
    l.out_elems = d.c * ho * wo;
    net.layers.push_back(std::move(l));
    d.h = ho;
    d.w = wo;
}

void add_global_avgpool(CostNet& net, Dims& d, const std::string& label) {
    CostLayer l;
    l.label = label;
    l.kind = CostLayer::Kind::pool;
    l.in_elems = d.c * d.h * d.w;
    l.out_elems = d.c;
    net.layers.push_back(std::move(l));
    d.h = d.w = 1;
}

void add_fc(CostNet& net, Dims& d, std::size_t out, const std::string& label) {
    std::size_t fan_in = d.c * d.h * d.w;
    CostLayer l;
    l.label = label;
    l.kind = CostLayer::Kind::fc;
    l.in_elems = fan_in;
    l.out_elems = out;
    l.macs_fwd = static_cast<std::uint64_t>(fan_in) * out;
    l.params_train = l.params_read = static_cast<std::uint64_t>(fan_in) * out + out;
    net.split_candidates.push_back(net.layers.size());
    net.layers.push_back(std::move(l));
    d = {out, 1, 1};
}

void resnet_basic_block(CostNet& net, Dims& d, std::size_t planes, std::size_t stride,
                        const std::string& tag) {
    Dims in = d;
    add_conv(net, d, planes, 3, stride, 1, tag + ".conv1");
    add_bn(net, d, tag + ".bn1");
    add_act(net, d, tag + ".relu1");
    add_conv(net, d, planes, 3, 1, 1, tag + ".conv2");
    add_bn(net, d, tag + ".bn2");
    if (stride != 1 || in.c != planes) {
        Dims ds = in;
        add_conv(net, ds, planes, 1, stride, 0, tag + ".downsample", false);
        add_bn(net, ds, tag + ".downsample_bn");
    }
    add_act(net, d, tag + ".relu2");
}

void resnet_bottleneck_block(CostNet& net, Dims& d, std::size_t planes, std::size_t stride,
                             const std::string& tag) {
    Dims in = d;
    std::size_t expanded = planes * 4;
    add_conv(net, d, planes, 1, 1, 0, tag + ".conv1");
    add_bn(net, d, tag + ".bn1");
    add_act(net, d, tag + ".relu1");
    add_conv(net, d, planes, 3, stride, 1, tag + ".conv2");
    add_bn(net, d, tag + ".bn2");
    add_act(net, d, tag + ".relu2");
    add_conv(net, d, expanded, 1, 1, 0, tag + ".conv3");
    add_bn(net, d, tag + ".bn3");
    if (stride != 1 || in.c != expanded) {
        Dims ds = in;
        add_conv(net, ds, expanded, 1, stride, 0, tag + ".downsample", false);
        add_bn(net, ds, tag + ".downsample_bn");
    }
    add_act(net, d, tag + ".relu3");
}

CostNet resnet_stem(const std::string& name, std::size_t input_hw, Dims& d) {
    CostNet net;
    net.name = name;
    d = {3, input_hw, input_hw};
    add_conv(net, d, 64, 7, 2, 3, "conv1");
    add_bn(net, d, "bn1");
    add_act(net, d, "relu1");
    add_pool(net, d, 3, 2, 1, "maxpool");
    return net;
}

}  // namespace

CostNet resnet101_net(std::size_t classes, std::size_t input_hw) {
    Dims d{};
    CostNet net = resnet_stem("resnet101", input_hw, d);
    const std::size_t blocks[4] = {3, 4, 23, 3};
    const std::size_t planes[4] = {64, 128, 256, 512};
    for (std::size_t stage = 0; stage < 4; ++stage) {
        for (std::size_t b = 0; b < blocks[stage]; ++b) {
            std::size_t stride = (stage > 0 && b == 0) ? 2 : 1;
            resnet_bottleneck_block(net, d, planes[stage], stride,
                                    "layer" + std::to_string(stage + 1) + "." + std::to_string(b));
        }
    }
    add_global_avgpool(net, d, "avgpool");
    add_fc(net, d, classes, "fc");
    return net;
}

CostNet resnet34_net(std::size_t classes, std::size_t input_hw) {
    Dims d{};
    CostNet net = resnet_stem("resnet34", input_hw, d);
    const std::size_t blocks[4] = {3, 4, 6, 3};
    const std::size_t planes[4] = {64, 128, 256, 512};
    for (std::size_t stage = 0; stage < 4; ++stage) {
        for (std::size_t b = 0; b < blocks[stage]; ++b) {
            std::size_t stride = (stage > 0 && b == 0) ? 2 : 1;
            resnet_basic_block(net, d, planes[stage], stride,
                               "layer" + std::to_string(stage + 1) + "." + std::to_string(b));
        }
    }
    add_global_avgpool(net, d, "avgpool");
    add_fc(net, d, classes, "fc");
    return net;
}

PresetReference resnet101_reference() {
    PresetReference r;
    r.sharing_fraction = 0.80;
    r.compute_energy_ratio = 1.89;
    r.time_ratio_low = 2.3;
    r.time_ratio_high = 2.6;
    r.storage_low = 66.0;
    r.storage_high = 99.0;
    r.mem_saving_low = 32.0;
    r.mem_saving_high = 49.0;
    return r;
}

PresetReference resnet34_reference() {
    PresetReference r;
    r.sharing_fraction = 0.33;
    r.compute_energy_ratio = 1.61;
    r.time_ratio_low = 2.0;  // "training time per iteration reduced by 50%"
    r.time_ratio_high = 2.0;
    r.mem_saving_low = 0.0;
    r.mem_saving_high = 17.0;
    return r;
}

std::optional<CostNet> preset_net(const std::string& name, std::size_t classes) {
    if (name == "resnet101") return resnet101_net(classes ? classes : 100);
    if (name == "resnet34") return resnet34_net(classes ? classes : 1000);
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

OpCounts count_cost_layer(const CostLayer& layer, CostPhase phase, bool has_upstream,
                          const CostModelConfig& cfg, std::size_t batch_size) {
    if (batch_size == 0) throw ConfigError("batch size must be >= 1");
    std::uint64_t bsz = batch_size;
    std::uint64_t fwd = layer.macs_fwd;
    if (layer.kind == CostLayer::Kind::batchnorm && cfg.bn_macs) fwd = 2 * layer.out_elems;

    OpCounts c;
    c.params = layer.params_train;
    c.macs_forward = fwd * bsz;
    c.mem_reads = (layer.params_read + layer.in_elems) * bsz;
    c.mem_writes = layer.out_elems * bsz;
    if (phase != CostPhase::train_active) return c;  // inference/shared: forward only

    if (layer.params_train > 0) {
        std::uint64_t weight_grad = fwd * bsz;
        std::uint64_t input_grad = has_upstream ? fwd * bsz : 0;
        c.macs_backward = weight_grad + input_grad;
        c.macs_backward_input = input_grad;
        c.mem_reads += layer.in_elems * bsz;  // weight-grad pass re-reads activations
        if (has_upstream) c.mem_reads += layer.params_read * bsz;  // input-grad pass re-reads weights
        c.macs_update = static_cast<std::uint64_t>(
            std::llround(cfg.update_macs_per_param * static_cast<double>(layer.params_train)));
        c.mem_reads += layer.params_train;       // velocity, once per iteration
        c.mem_writes += 2 * layer.params_train;  // params + velocity
    }
    return c;
}

OpCounts count_layer(const LayerSpec& spec, const std::vector<std::size_t>& input_shape,
                     CostPhase phase, bool has_upstream, const CostModelConfig& cfg) {
    Topology t;
    t.input_shape = input_shape;
    LayerSpec resolved = spec;
    if (resolved.kind == LayerKind::conv) {
        if (input_shape.size() != 3) throw ShapeError("conv layer needs a [C,H,W] input");
        resolved.in_channels = input_shape[0];
    } else if (resolved.kind == LayerKind::fc || resolved.kind == LayerKind::softmax_head) {
        resolved.fan_in = shape_product(input_shape);
    }
    auto out_shape = resolved.output_shape(input_shape);

    CostLayer l;
    l.label = layer_kind_name(resolved.kind);
    l.in_elems = shape_product(input_shape);
    l.out_elems = shape_product(out_shape);
    switch (resolved.kind) {
        case LayerKind::conv:
            l.kind = CostLayer::Kind::conv;
            l.macs_fwd = static_cast<std::uint64_t>(out_shape[1]) * out_shape[2] *
                         resolved.out_channels * resolved.kernel * resolved.kernel *
                         resolved.in_channels;
            l.params_train = l.params_read = resolved.trainable_param_count();
            break;
        case LayerKind::fc:
        case LayerKind::softmax_head:
            l.kind = CostLayer::Kind::fc;
            l.macs_fwd = static_cast<std::uint64_t>(resolved.fan_in) * resolved.fan_out;
            l.params_train = l.params_read = resolved.trainable_param_count();
            break;
        case LayerKind::pool:
            l.kind = CostLayer::Kind::pool;
            break;
        default:
            l.kind = CostLayer::Kind::act;
            break;
    }
    return count_cost_layer(l, phase, has_upstream, cfg, 1);
}

CostReport count_network(const CostNet& net, std::optional<std::size_t> boundary,
                         std::size_t batch_size, const CostModelConfig& cfg) {
    if (net.layers.empty()) throw ConfigError("cost net has no layers");
    std::size_t split = boundary.value_or(0);
    if (split > net.layers.size()) throw ConfigError("sharing boundary beyond last layer");

    CostReport report;
    report.network = net.name;
    report.batch_size = batch_size;
    report.boundary = split;
    report.shared_fraction = split == 0 ? 0.0 : net.fraction_at(split);
    report.config = cfg;

    auto fill = [&](std::size_t shared_below, std::vector<LayerCountRow>& rows, OpCounts& totals) {
        // the first active parametric layer skips its input-grad pass
        std::size_t first_param = net.layers.size();
        for (std::size_t i = shared_below; i < net.layers.size(); ++i)
            if (net.layers[i].params_train > 0) {
                first_param = i;
                break;
            }
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            LayerCountRow row;
            row.label = net.layers[i].label;
            row.phase = i < shared_below ? CostPhase::train_shared : CostPhase::train_active;
            bool has_upstream = i > first_param;
            row.counts = count_cost_layer(net.layers[i], row.phase, has_upstream, cfg, batch_size);
            totals += row.counts;
            rows.push_back(std::move(row));
        }
    };
    fill(split, report.per_layer_with, report.totals_with);
    fill(0, report.per_layer_without, report.totals_without);
    return report;
}

CostReport count_network(const Topology& topology, const std::optional<SharingConfig>& sharing,
                         std::size_t batch_size, const CostModelConfig& cfg) {
    CostNet net = cost_net_from_topology(topology);
    std::optional<std::size_t> boundary;
    if (sharing) boundary = sharing->split_index;
    return count_network(net, boundary, batch_size, cfg);
}

namespace {

double charged_macs(const OpCounts& c, const CostModelConfig& cfg) {
    double macs = static_cast<double>(c.macs_forward) +
                  static_cast<double>(c.macs_backward - c.macs_backward_input) +
                  static_cast<double>(c.macs_update);
    if (cfg.charge_input_grad) macs += static_cast<double>(c.macs_backward_input);
    return macs;
}

}  // namespace

void energy_estimate(CostReport& report, const EnergyTable& table) {
    table.validate();
    auto energy = [&](const OpCounts& c) {
        return charged_macs(c, report.config) * table.e_mac +
               static_cast<double>(c.mem_reads) * table.e_read +
               static_cast<double>(c.mem_writes) * table.e_write;
    };
    report.energy_with = energy(report.totals_with);
    report.energy_without = energy(report.totals_without);
    report.energy_ratio = report.energy_without / report.energy_with;
    report.compute_energy_with = charged_macs(report.totals_with, report.config) * table.e_mac;
    report.compute_energy_without = charged_macs(report.totals_without, report.config) * table.e_mac;
    report.compute_energy_ratio = report.compute_energy_without / report.compute_energy_with;
}

void time_proxy(CostReport& report, double macs_per_second, double accesses_per_second) {
    if (macs_per_second <= 0.0 || accesses_per_second <= 0.0)
        throw ConfigError("time proxy rates must be strictly positive");
    auto seconds = [&](const OpCounts& c) {
        double compute = static_cast<double>(c.total_macs()) / macs_per_second;
        double memory = static_cast<double>(c.mem_reads + c.mem_writes) / accesses_per_second;
        return std::max(compute, memory);
    };
    report.seconds_with = seconds(report.totals_with);
    report.seconds_without = seconds(report.totals_without);
    report.time_ratio = report.seconds_without / report.seconds_with;
}

void storage_requirement(CostReport& report, const CostNet& net, const EnergyTable& table,
                         std::size_t branch_count) {
    table.validate();
    std::uint64_t total = net.total_params();
    std::uint64_t above = total - net.params_below(report.boundary);
    report.storage_total_bytes = total * table.word_bytes;
    report.storage_per_branch_bytes = above * table.word_bytes;
    report.storage_reduction_percent =
        100.0 * (1.0 - static_cast<double>(above) / static_cast<double>(total));
    (void)branch_count;  // aggregate model size = total + branch_count*above, derivable
}

void mem_access_saving(CostReport& report) {
    double with = static_cast<double>(report.totals_with.mem_reads + report.totals_with.mem_writes);
    double without =
        static_cast<double>(report.totals_without.mem_reads + report.totals_without.mem_writes);
    report.mem_access_saving_percent = without > 0.0 ? 100.0 * (1.0 - with / without) : 0.0;
}

std::string render_cost_summary(const CostReport& report, const PresetReference* reference) {
    std::ostringstream os;
    os.precision(4);
    os << "network: " << report.network << "\n";
    os << "sharing boundary: layer " << report.boundary << " (fraction "
       << report.shared_fraction << " of trainable params frozen)\n";
    os << "batch size: " << report.batch_size << "\n";
    os << "conventions: update=" << report.config.update_macs_per_param
       << " MACs/param, input-grad pass " << (report.config.charge_input_grad ? "charged" : "not charged")
       << " in energy, batchnorm MACs " << (report.config.bn_macs ? "counted" : "not counted") << "\n";
    auto line = [&](const char* name, double value, double ref_lo, double ref_hi,
                    const char* unit) {
        os << name << ": " << value << unit;
        if (reference && (ref_lo != 0.0 || ref_hi != 0.0)) {
            if (ref_lo == ref_hi)
                os << " (reference: " << ref_lo << unit << ")";
            else
                os << " (reference: " << ref_lo << "-" << ref_hi << unit << ")";
        }
        os << "\n";
    };
    line("compute energy ratio (without/with)", report.compute_energy_ratio,
         reference ? reference->compute_energy_ratio : 0.0,
         reference ? reference->compute_energy_ratio : 0.0, "x");
    os << "total energy ratio (incl. memory): " << report.energy_ratio << "x\n";
    line("time ratio (compute-bound)", report.time_ratio, reference ? reference->time_ratio_low : 0.0,
         reference ? reference->time_ratio_high : 0.0, "x");
    line("per-branch storage reduction", report.storage_reduction_percent,
         reference ? reference->storage_low : 0.0, reference ? reference->storage_high : 0.0, "%");
    line("memory access saving", report.mem_access_saving_percent,
         reference ? reference->mem_saving_low : 0.0, reference ? reference->mem_saving_high : 0.0,
         "%");
    os << "per-branch storage: " << report.storage_per_branch_bytes << " bytes of "
       << report.storage_total_bytes << " total\n";
    return os.str();
}

}  // namespace incnet
