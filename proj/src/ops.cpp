#include "incnet/ops.hpp"

#include <algorithm>
#include <cmath>

namespace incnet {

namespace {

thread_local OpCounter* g_counter = nullptr;

void require(bool cond, const char* msg) {
    if (!cond) throw ShapeError(msg);
}

void require_rank3(const Tensor& t, const char* what) {
    if (t.rank() != 3) throw ShapeError(std::string(what) + " must be rank-3, got " + t.shape_str());
}

struct ConvDims {
    std::size_t c_in, h, w, c_out, k, h_out, w_out;
};

ConvDims conv_dims(const Tensor& input, const Tensor& kernels, std::size_t stride,
                   std::size_t padding) {
    require_rank3(input, "conv input");
    if (kernels.rank() != 4) throw ShapeError("conv kernels must be rank-4 [C_out,C_in,k,k]");
    ConvDims d{};
    d.c_in = input.extent(0);
    d.h = input.extent(1);
    d.w = input.extent(2);
    d.c_out = kernels.extent(0);
    d.k = kernels.extent(2);
    if (kernels.extent(3) != d.k) throw ShapeError("conv kernels must be square");
    if (kernels.extent(1) != d.c_in)
        throw ShapeError("conv kernel input channels (" + std::to_string(kernels.extent(1)) +
                         ") do not match input channels (" + std::to_string(d.c_in) + ")");
    if (stride == 0) throw ShapeError("conv stride must be >= 1");
    if (d.k > d.h + 2 * padding || d.k > d.w + 2 * padding)
        throw ShapeError("conv kernel larger than padded input");
    d.h_out = (d.h + 2 * padding - d.k) / stride + 1;
    d.w_out = (d.w + 2 * padding - d.k) / stride + 1;
    return d;
}

}  // namespace

OpCounter* active_op_counter() { return g_counter; }

CountScope::CountScope(OpCounter& counter) : prev_(g_counter) { g_counter = &counter; }
CountScope::~CountScope() { g_counter = prev_; }

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias,
                      std::size_t stride, std::size_t padding) {
    ConvDims d = conv_dims(input, kernels, stride, padding);
    require(bias.rank() == 1 && bias.extent(0) == d.c_out, "conv bias must be [C_out]");

    Tensor out({d.c_out, d.h_out, d.w_out});
    for (std::size_t oc = 0; oc < d.c_out; ++oc) {
        for (std::size_t oh = 0; oh < d.h_out; ++oh) {
            for (std::size_t ow = 0; ow < d.w_out; ++ow) {
                double acc = 0.0;
                for (std::size_t ic = 0; ic < d.c_in; ++ic) {
                    for (std::size_t kh = 0; kh < d.k; ++kh) {
                        std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * stride + kh) -
                                            static_cast<std::ptrdiff_t>(padding);
                        if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(d.h)) continue;
                        for (std::size_t kw = 0; kw < d.k; ++kw) {
                            std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * stride + kw) -
                                                static_cast<std::ptrdiff_t>(padding);
                            if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(d.w)) continue;
                            acc += kernels.at4(oc, ic, kh, kw) *
                                   input.at3(ic, static_cast<std::size_t>(ih),
                                             static_cast<std::size_t>(iw));
                        }
                    }
                }
                out.at3(oc, oh, ow) = acc + bias[oc];
            }
        }
    }
    if (g_counter) {
        g_counter->macs_forward +=
            static_cast<std::uint64_t>(d.h_out) * d.w_out * d.c_out * d.k * d.k * d.c_in;
        g_counter->mem_reads += kernels.size() + bias.size() + input.size();
        g_counter->mem_writes += out.size();
        g_counter->conv_forward_calls += 1;
    }
    return out;
}

LayerGrad conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& output_grad,
                          std::size_t stride, std::size_t padding, bool compute_input_grad) {
    ConvDims d = conv_dims(input, kernels, stride, padding);
    require(output_grad.rank() == 3 && output_grad.extent(0) == d.c_out &&
                output_grad.extent(1) == d.h_out && output_grad.extent(2) == d.w_out,
            "conv output_grad shape does not match forward output");

    Tensor kernel_grad(kernels.shape());
    Tensor bias_grad({d.c_out});
    Tensor input_grad;
    if (compute_input_grad) input_grad = Tensor(input.shape());

    for (std::size_t oc = 0; oc < d.c_out; ++oc) {
        for (std::size_t oh = 0; oh < d.h_out; ++oh) {
            for (std::size_t ow = 0; ow < d.w_out; ++ow) {
                double go = output_grad.at3(oc, oh, ow);
                bias_grad[oc] += go;
                for (std::size_t ic = 0; ic < d.c_in; ++ic) {
                    for (std::size_t kh = 0; kh < d.k; ++kh) {
                        std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * stride + kh) -
                                            static_cast<std::ptrdiff_t>(padding);
                        if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(d.h)) continue;
                        for (std::size_t kw = 0; kw < d.k; ++kw) {
                            std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * stride + kw) -
                                                static_cast<std::ptrdiff_t>(padding);
                            if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(d.w)) continue;
                            auto ihs = static_cast<std::size_t>(ih);
                            auto iws = static_cast<std::size_t>(iw);
                            kernel_grad.at4(oc, ic, kh, kw) += go * input.at3(ic, ihs, iws);
                            if (compute_input_grad)
                                input_grad.at3(ic, ihs, iws) += go * kernels.at4(oc, ic, kh, kw);
                        }
                    }
                }
            }
        }
    }
    if (g_counter) {
        std::uint64_t pass = static_cast<std::uint64_t>(d.h_out) * d.w_out * d.c_out * d.k * d.k * d.c_in;
        g_counter->macs_backward += pass * (compute_input_grad ? 2 : 1);
        if (compute_input_grad) g_counter->macs_backward_input += pass;
        g_counter->mem_reads += input.size();  // weight-grad pass re-reads activations
        if (compute_input_grad) g_counter->mem_reads += kernels.size() + d.c_out;
    }
    LayerGrad g;
    g.input_grad = std::move(input_grad);
    g.param_grads.push_back(std::move(kernel_grad));
    g.param_grads.push_back(std::move(bias_grad));
    return g;
}

std::pair<Tensor, PoolRecord> pool_forward(const Tensor& input, PoolKind kind, std::size_t window) {
    require_rank3(input, "pool input");
    std::size_t c = input.extent(0), h = input.extent(1), w = input.extent(2);
    if (window == 0) throw ShapeError("pool window must be >= 1");
    if (window > h || window > w) throw ShapeError("pool window larger than spatial extent");
    if (h % window != 0 || w % window != 0)
        throw ShapeError("pool window must divide spatial extents (" + input.shape_str() + ")");
    std::size_t ho = h / window, wo = w / window;

    Tensor out({c, ho, wo});
    PoolRecord rec;
    rec.kind = kind;
    rec.window = window;
    rec.in_shape = input.shape();
    rec.out_shape = out.shape();
    if (kind == PoolKind::max) rec.argmax.assign(out.size(), 0);

    double inv_area = 1.0 / static_cast<double>(window * window);
    for (std::size_t ic = 0; ic < c; ++ic) {
        for (std::size_t oh = 0; oh < ho; ++oh) {
            for (std::size_t ow = 0; ow < wo; ++ow) {
                if (kind == PoolKind::mean) {
                    double acc = 0.0;
                    for (std::size_t dh = 0; dh < window; ++dh)
                        for (std::size_t dw = 0; dw < window; ++dw)
                            acc += input.at3(ic, oh * window + dh, ow * window + dw);
                    out.at3(ic, oh, ow) = acc * inv_area;
                } else {
                    double best = input.at3(ic, oh * window, ow * window);
                    std::size_t best_idx = (ic * h + oh * window) * w + ow * window;
                    for (std::size_t dh = 0; dh < window; ++dh) {
                        for (std::size_t dw = 0; dw < window; ++dw) {
                            std::size_t ih = oh * window + dh, iw = ow * window + dw;
                            double v = input.at3(ic, ih, iw);
                            if (v > best) {
                                best = v;
                                best_idx = (ic * h + ih) * w + iw;
                            }
                        }
                    }
                    out.at3(ic, oh, ow) = best;
                    rec.argmax[(ic * ho + oh) * wo + ow] = best_idx;
                }
            }
        }
    }
    if (g_counter) {
        g_counter->mem_reads += input.size();
        g_counter->mem_writes += out.size();
        g_counter->pool_forward_calls += 1;
    }
    return {std::move(out), std::move(rec)};
}

Tensor pool_backward(const PoolRecord& record, const Tensor& output_grad) {
    if (output_grad.shape() != record.out_shape)
        throw ShapeError("pool_backward gradient shape does not match record");
    Tensor input_grad(record.in_shape);
    std::size_t window = record.window;
    if (record.kind == PoolKind::max) {
        for (std::size_t i = 0; i < output_grad.size(); ++i)
            input_grad[record.argmax[i]] += output_grad[i];
        return input_grad;
    }
    double share = 1.0 / static_cast<double>(window * window);
    std::size_t c = record.out_shape[0], ho = record.out_shape[1], wo = record.out_shape[2];
    for (std::size_t ic = 0; ic < c; ++ic)
        for (std::size_t oh = 0; oh < ho; ++oh)
            for (std::size_t ow = 0; ow < wo; ++ow) {
                double g = output_grad.at3(ic, oh, ow) * share;
                for (std::size_t dh = 0; dh < window; ++dh)
                    for (std::size_t dw = 0; dw < window; ++dw)
                        input_grad.at3(ic, oh * window + dh, ow * window + dw) += g;
            }
    return input_grad;
}

Tensor relu_forward(const Tensor& input) {
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > 0.0 ? input[i] : 0.0;
    if (g_counter) {
        g_counter->mem_reads += input.size();
        g_counter->mem_writes += out.size();
        g_counter->act_forward_calls += 1;
    }
    return out;
}

Tensor relu_backward(const Tensor& forward_input, const Tensor& output_grad) {
    if (!forward_input.same_shape(output_grad))
        throw ShapeError("relu_backward shapes do not match");
    Tensor grad(output_grad.shape());
    for (std::size_t i = 0; i < grad.size(); ++i)
        grad[i] = forward_input[i] > 0.0 ? output_grad[i] : 0.0;
    return grad;
}

Tensor sigmoid_forward(const Tensor& input) {
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        double x = input[i];
        out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                          : std::exp(x) / (1.0 + std::exp(x));
    }
    if (g_counter) {
        g_counter->mem_reads += input.size();
        g_counter->mem_writes += out.size();
        g_counter->act_forward_calls += 1;
    }
    return out;
}

Tensor sigmoid_backward(const Tensor& forward_output, const Tensor& output_grad) {
    if (!forward_output.same_shape(output_grad))
        throw ShapeError("sigmoid_backward shapes do not match");
    Tensor grad(output_grad.shape());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        double y = forward_output[i];
        grad[i] = output_grad[i] * y * (1.0 - y);
    }
    return grad;
}

Tensor fc_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    if (weights.rank() != 2) throw ShapeError("fc weights must be rank-2 [M,N]");
    std::size_t m = weights.extent(0), n = weights.extent(1);
    if (input.size() != n)
        throw ShapeError("fc input size " + std::to_string(input.size()) +
                         " does not match fan-in " + std::to_string(n));
    require(bias.rank() == 1 && bias.extent(0) == m, "fc bias must be [M]");
    Tensor out({m});
    for (std::size_t r = 0; r < m; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += weights.at2(r, c) * input[c];
        out[r] = acc + bias[r];
    }
    if (g_counter) {
        g_counter->macs_forward += static_cast<std::uint64_t>(m) * n;
        g_counter->mem_reads += weights.size() + bias.size() + input.size();
        g_counter->mem_writes += out.size();
        g_counter->fc_forward_calls += 1;
    }
    return out;
}

LayerGrad fc_backward(const Tensor& input, const Tensor& weights, const Tensor& output_grad,
                      bool compute_input_grad) {
    if (weights.rank() != 2) throw ShapeError("fc weights must be rank-2 [M,N]");
    std::size_t m = weights.extent(0), n = weights.extent(1);
    if (input.size() != n) throw ShapeError("fc_backward input size does not match fan-in");
    if (output_grad.size() != m) throw ShapeError("fc_backward output_grad size does not match fan-out");

    Tensor weight_grad(weights.shape());
    Tensor bias_grad({m});
    Tensor input_grad;
    if (compute_input_grad) input_grad = Tensor(input.shape());

    for (std::size_t r = 0; r < m; ++r) {
        double go = output_grad[r];
        bias_grad[r] = go;
        for (std::size_t c = 0; c < n; ++c) {
            weight_grad.at2(r, c) = go * input[c];
            if (compute_input_grad) input_grad[c] += go * weights.at2(r, c);
        }
    }
    if (g_counter) {
        std::uint64_t pass = static_cast<std::uint64_t>(m) * n;
        g_counter->macs_backward += pass * (compute_input_grad ? 2 : 1);
        if (compute_input_grad) g_counter->macs_backward_input += pass;
        g_counter->mem_reads += input.size();
        if (compute_input_grad) g_counter->mem_reads += weights.size() + m;
    }
    LayerGrad g;
    g.input_grad = std::move(input_grad);
    g.param_grads.push_back(std::move(weight_grad));
    g.param_grads.push_back(std::move(bias_grad));
    return g;
}

Tensor softmax(const Tensor& logits) {
    if (logits.size() == 0) throw ShapeError("softmax of empty tensor");
    double mx = logits[0];
    for (std::size_t i = 1; i < logits.size(); ++i) mx = std::max(mx, logits[i]);
    Tensor probs(logits.shape());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - mx);
        sum += probs[i];
    }
    for (std::size_t i = 0; i < probs.size(); ++i) probs[i] /= sum;
    return probs;
}

SoftmaxXent softmax_xent(const Tensor& logits, std::size_t target) {
    if (target >= logits.size())
        throw ShapeError("softmax_xent target " + std::to_string(target) + " out of range for " +
                         std::to_string(logits.size()) + " logits");
    SoftmaxXent r;
    r.probs = softmax(logits);
    r.logit_grad = Tensor(logits.shape());
    for (std::size_t i = 0; i < logits.size(); ++i) r.logit_grad[i] = r.probs[i];
    r.logit_grad[target] -= 1.0;
    r.loss = -std::log(std::max(r.probs[target], 1e-12));
    return r;
}

SgdResult sgd_update(const Tensor& params, const Tensor& grad, const Tensor& velocity,
                     double lr, double momentum) {
    if (!params.same_shape(grad) || !params.same_shape(velocity))
        throw ShapeError("sgd_update shapes do not match");
    if (lr <= 0.0) throw ConfigError("learning rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
    SgdResult r{Tensor(params.shape()), Tensor(params.shape())};
    for (std::size_t i = 0; i < params.size(); ++i) {
        r.velocity[i] = momentum * velocity[i] - lr * grad[i];
        r.params[i] = params[i] + r.velocity[i];
    }
    if (g_counter) {
        // one MAC-equivalent per updated parameter, by convention
        g_counter->macs_update += params.size();
        g_counter->mem_reads += params.size();       // velocity
        g_counter->mem_writes += 2 * params.size();  // params + velocity
    }
    return r;
}

}  // namespace incnet
