#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "incnet/topology.hpp"

namespace incnet {

// ---------------------------------------------------------------------------
// Analytic accounting of training work. Counting conventions (all of them
// configurable and printed with every report):
//
//   forward MACs   conv: H'*W'*C_out*k^2*C_in, fc: fan_in*fan_out; bias adds,
//                  pooling comparisons and activations are not MACs.
//   backward MACs  weight-grad pass + input-grad pass, each equal to the
//                  forward count. The first layer with no trainable layer
//                  below it skips the input-grad pass (nothing consumes it).
//   update MACs    update_macs_per_param per trained parameter, per
//                  iteration (default 1).
//   memory         forward reads weights + input activations, writes output
//                  activations; the weight-grad pass re-reads input
//                  activations; the input-grad pass re-reads weights; the
//                  optimizer reads velocity and writes params + velocity.
//                  Gradient tensors stay in local accumulators. Activation
//                  terms and weight reads scale with batch size; update work
//                  happens once per iteration.
//   energy         charges forward + weight-grad + update MACs by default;
//                  the input-grad pass is charged only when
//                  charge_input_grad is set. Time uses every executed MAC.
// ---------------------------------------------------------------------------

struct OpCounts {
    std::uint64_t macs_forward = 0;
    std::uint64_t macs_backward = 0;        // input-grad + weight-grad
    std::uint64_t macs_backward_input = 0;  // input-grad share
    std::uint64_t macs_update = 0;
    std::uint64_t mem_reads = 0;
    std::uint64_t mem_writes = 0;
    std::uint64_t params = 0;

    OpCounts& operator+=(const OpCounts& o);
    std::uint64_t total_macs() const { return macs_forward + macs_backward + macs_update; }
};

enum class CostPhase { inference, train_shared, train_active };

const char* cost_phase_name(CostPhase phase);

struct EnergyTable {
    double e_mac = 1.0;   // joules/op (placeholder scale; ratios are the claim)
    double e_read = 5.0;  // joules/access
    double e_write = 5.0;
    std::size_t word_bytes = 4;

    void validate() const;
};

struct CostModelConfig {
    double update_macs_per_param = 1.0;
    bool charge_input_grad = false;
    bool bn_macs = false;  // count batchnorm as 2 MACs/element forward
};

// Normalized layer description the counters run on; built from a Topology or
// from an architecture preset.
struct CostLayer {
    enum class Kind { conv, fc, pool, act, batchnorm };
    std::string label;
    Kind kind = Kind::act;
    std::uint64_t macs_fwd = 0;      // per sample
    std::uint64_t params_train = 0;  // updated parameters
    std::uint64_t params_read = 0;   // read per forward (includes BN stats)
    std::uint64_t in_elems = 0;
    std::uint64_t out_elems = 0;
};

struct CostNet {
    std::string name;
    std::vector<CostLayer> layers;
    std::vector<std::size_t> split_candidates;  // boundaries: conv starts + head

    std::uint64_t total_params() const;
    std::uint64_t params_below(std::size_t boundary) const;
    double fraction_at(std::size_t boundary) const;
    // candidate boundary whose parameter fraction is closest to target
    std::size_t boundary_for_fraction(double target) const;
};

CostNet cost_net_from_topology(const Topology& topology, const std::string& name = "topology");

// Standard architecture encodings used for the analytic headline reports.
// reference_* are the savings reported for these architectures in the
// incremental-sharing literature, printed beside computed values.
struct PresetReference {
    double sharing_fraction = 0.0;
    double compute_energy_ratio = 0.0;
    double time_ratio_low = 0.0, time_ratio_high = 0.0;
    double storage_low = 0.0, storage_high = 0.0;
    double mem_saving_low = 0.0, mem_saving_high = 0.0;
};

CostNet resnet101_net(std::size_t classes = 100, std::size_t input_hw = 224);
CostNet resnet34_net(std::size_t classes = 1000, std::size_t input_hw = 224);
PresetReference resnet101_reference();
PresetReference resnet34_reference();
std::optional<CostNet> preset_net(const std::string& name, std::size_t classes = 0);

// Per-layer counts for one phase; batch 1, one update step. has_upstream
// false suppresses the input-grad pass.
OpCounts count_layer(const LayerSpec& spec, const std::vector<std::size_t>& input_shape,
                     CostPhase phase, bool has_upstream = true, const CostModelConfig& cfg = {});
OpCounts count_cost_layer(const CostLayer& layer, CostPhase phase, bool has_upstream,
                          const CostModelConfig& cfg, std::size_t batch_size = 1);

struct LayerCountRow {
    std::string label;
    CostPhase phase = CostPhase::train_active;
    OpCounts counts;
};

struct CostReport {
    std::string network;
    std::size_t batch_size = 1;
    std::size_t boundary = 0;  // sharing boundary (layer index); 0 = no sharing
    double shared_fraction = 0.0;
    CostModelConfig config;

    std::vector<LayerCountRow> per_layer_with;
    std::vector<LayerCountRow> per_layer_without;
    OpCounts totals_with;
    OpCounts totals_without;

    // filled by the estimate passes
    double energy_with = 0.0, energy_without = 0.0, energy_ratio = 0.0;
    double compute_energy_with = 0.0, compute_energy_without = 0.0, compute_energy_ratio = 0.0;
    double seconds_with = 0.0, seconds_without = 0.0, time_ratio = 0.0;
    std::uint64_t storage_total_bytes = 0, storage_per_branch_bytes = 0;
    double storage_reduction_percent = 0.0;
    double mem_access_saving_percent = 0.0;
};

// Shared layers (below the boundary) count in train_shared phase, the rest
// train_active; the without-sharing side counts everything train_active.
CostReport count_network(const CostNet& net, std::optional<std::size_t> boundary,
                         std::size_t batch_size, const CostModelConfig& cfg = {});
CostReport count_network(const Topology& topology, const std::optional<SharingConfig>& sharing,
                         std::size_t batch_size, const CostModelConfig& cfg = {});

// E = charged MACs * e_mac + reads * e_read + writes * e_write;
// ratio = E_without / E_with. Also fills the MAC-only compute ratio.
void energy_estimate(CostReport& report, const EnergyTable& table);

// seconds = max(total executed MACs / throughput, total accesses / bandwidth)
void time_proxy(CostReport& report, double macs_per_second, double accesses_per_second);

// per-branch new storage = params above the boundary (head included) * word
void storage_requirement(CostReport& report, const CostNet& net, const EnergyTable& table,
                         std::size_t branch_count = 1);

// percent of training memory accesses removed by sharing
void mem_access_saving(CostReport& report);

std::string render_cost_summary(const CostReport& report, const PresetReference* reference);

}  // namespace incnet
