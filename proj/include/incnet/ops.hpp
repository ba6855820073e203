#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "incnet/tensor.hpp"

namespace incnet {

// Gradients of one layer: gradient w.r.t. the input plus one gradient per
// parameter tensor, in parameter order (kernels/weights first, bias second).
struct LayerGrad {
    Tensor input_grad;
    std::vector<Tensor> param_grads;
};

enum class PoolKind { max, mean };

// Produced by pool_forward; pool_backward refuses a record that does not
// match the gradient it is given.
struct PoolRecord {
    PoolKind kind = PoolKind::mean;
    std::size_t window = 1;
    std::vector<std::size_t> in_shape;
    std::vector<std::size_t> out_shape;
    std::vector<std::size_t> argmax;  // flat input index per output element (max only)
};

struct SoftmaxXent {
    double loss = 0.0;
    Tensor logit_grad;
    Tensor probs;
};

struct SgdResult {
    Tensor params;
    Tensor velocity;
};

// ---------------------------------------------------------------------------
// Execution counters. When a counter is installed (thread-local), every op
// adds the MACs it actually executed, derived from its own runtime loop
// extents, plus memory traffic at the documented accounting granularity:
//   forward:   reads = params + input elems, writes = output elems
//   backward:  weight-grad pass reads input elems; input-grad pass reads params
//   update:    reads = params (velocity), writes = 2*params (params+velocity)
// Gradient tensors are treated as local accumulators and are not counted.
// The analytic cost model must reproduce these numbers exactly from layer
// specs alone; that equivalence is what the oracle tests pin down.
// ---------------------------------------------------------------------------
struct OpCounter {
    std::uint64_t macs_forward = 0;
    std::uint64_t macs_backward = 0;        // both backward passes
    std::uint64_t macs_backward_input = 0;  // input-grad share of macs_backward
    std::uint64_t macs_update = 0;
    std::uint64_t mem_reads = 0;
    std::uint64_t mem_writes = 0;
    std::uint64_t conv_forward_calls = 0;
    std::uint64_t fc_forward_calls = 0;
    std::uint64_t pool_forward_calls = 0;
    std::uint64_t act_forward_calls = 0;
};

OpCounter* active_op_counter();

// RAII: install a counter for the current thread.
class CountScope {
  public:
    explicit CountScope(OpCounter& counter);
    ~CountScope();
    CountScope(const CountScope&) = delete;
    CountScope& operator=(const CountScope&) = delete;

  private:
    OpCounter* prev_;
};

// ---------------------------------------------------------------------------
// Layer primitives. All pure: inputs untouched, outputs freshly allocated.
// Summation order is fixed (row-major over outputs, kernel order inside the
// dot product) so results are bit-reproducible.
// ---------------------------------------------------------------------------

// input [C_in,H,W], kernels [C_out,C_in,k,k], bias [C_out] -> [C_out,H',W']
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias,
                      std::size_t stride, std::size_t padding);

// param_grads = {kernel_grad, bias_grad}; input_grad skipped (empty tensor)
// when compute_input_grad is false — used for the first trainable layer,
// which has no upstream consumer.
LayerGrad conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& output_grad,
                          std::size_t stride, std::size_t padding, bool compute_input_grad = true);

std::pair<Tensor, PoolRecord> pool_forward(const Tensor& input, PoolKind kind, std::size_t window);
Tensor pool_backward(const PoolRecord& record, const Tensor& output_grad);

Tensor relu_forward(const Tensor& input);
// relu'(x) = 1 for x > 0, else 0 (derivative at 0 taken as 0)
Tensor relu_backward(const Tensor& forward_input, const Tensor& output_grad);

Tensor sigmoid_forward(const Tensor& input);
// takes the forward *output*: sigma' = y * (1 - y)
Tensor sigmoid_backward(const Tensor& forward_output, const Tensor& output_grad);

// input may be any shape with size() == fan_in; weights [M,N], bias [M] -> [M]
Tensor fc_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);
LayerGrad fc_backward(const Tensor& input, const Tensor& weights, const Tensor& output_grad,
                      bool compute_input_grad = true);

// Numerically stable (max subtraction); probs clamped at 1e-12 before log.
SoftmaxXent softmax_xent(const Tensor& logits, std::size_t target);
Tensor softmax(const Tensor& logits);

// velocity <- momentum*velocity - lr*grad; params <- params + velocity
SgdResult sgd_update(const Tensor& params, const Tensor& grad, const Tensor& velocity,
                     double lr, double momentum);

}  // namespace incnet
