#include <doctest.h>

#include <cmath>

#include "incnet/ops.hpp"
#include "incnet/rng.hpp"
#include "oracles.hpp"

using namespace incnet;

TEST_CASE("conv2d_forward basics") {
    SUBCASE("zero input gives bias planes") {
        Rng rng(7);
        Tensor input({2, 5, 5});
        Tensor kernels = oracle::random_tensor({3, 2, 3, 3}, rng);
        Tensor bias({3});
        bias[0] = 0.5;
        bias[1] = -1.25;
        bias[2] = 2.0;
        Tensor out = conv2d_forward(input, kernels, bias, 1, 0);
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < 9; ++i) CHECK(out[c * 9 + i] == bias[c]);
    }

    SUBCASE("1x1 identity kernel reproduces the input") {
        Rng rng(3);
        Tensor input = oracle::random_tensor({1, 4, 4}, rng);
        Tensor kernels({1, 1, 1, 1});
        kernels[0] = 1.0;
        Tensor bias({1});
        Tensor out = conv2d_forward(input, kernels, bias, 1, 0);
        CHECK(out == input);
    }

    SUBCASE("hand-computed 2x2 all-ones kernel on a 3x3 ramp") {
        Tensor input({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
        Tensor kernels = Tensor::full({1, 1, 2, 2}, 1.0);
        Tensor bias({1});
        Tensor out = conv2d_forward(input, kernels, bias, 1, 0);
        CHECK(out.shape() == std::vector<std::size_t>{1, 2, 2});
        CHECK(out[0] == 12.0);
        CHECK(out[1] == 16.0);
        CHECK(out[2] == 24.0);
        CHECK(out[3] == 28.0);
    }

    SUBCASE("channel mismatch rejected") {
        Tensor input({2, 4, 4});
        Tensor kernels({1, 3, 2, 2});
        Tensor bias({1});
        CHECK_THROWS_AS(conv2d_forward(input, kernels, bias, 1, 0), ShapeError);
    }
}

TEST_CASE("conv2d_forward equals the naive loop oracle on shapes up to 4x16x16") {
    Rng rng(11);
    for (int iter = 0; iter < 60; ++iter) {
        std::size_t c_in = 1 + rng.below(4);
        std::size_t h = 3 + rng.below(14);
        std::size_t w = 3 + rng.below(14);
        std::size_t c_out = 1 + rng.below(4);
        std::size_t k = 1 + rng.below(std::min<std::size_t>(3, std::min(h, w)));
        std::size_t stride = 1 + rng.below(2);
        std::size_t padding = rng.below(2);
        Tensor input = oracle::random_tensor({c_in, h, w}, rng);
        Tensor kernels = oracle::random_tensor({c_out, c_in, k, k}, rng);
        Tensor bias = oracle::random_tensor({c_out}, rng);
        Tensor got = conv2d_forward(input, kernels, bias, stride, padding);
        Tensor want = oracle::conv2d_naive(input, kernels, bias, stride, padding);
        REQUIRE(got.shape() == want.shape());
        for (std::size_t i = 0; i < got.size(); ++i)
            REQUIRE(oracle::grad_close(got[i], want[i], 1e-12, 1e-12));
        // with the documented summation order the match is bit-exact
        Tensor exact = oracle::conv2d_naive_ordered(input, kernels, bias, stride, padding);
        REQUIRE(got == exact);
    }
}

TEST_CASE("conv2d_backward") {
    SUBCASE("zero output_grad gives zero gradients") {
        Rng rng(5);
        Tensor input = oracle::random_tensor({2, 5, 5}, rng);
        Tensor kernels = oracle::random_tensor({3, 2, 3, 3}, rng);
        Tensor zero({3, 3, 3});
        LayerGrad g = conv2d_backward(input, kernels, zero, 1, 0);
        for (std::size_t i = 0; i < g.input_grad.size(); ++i) CHECK(g.input_grad[i] == 0.0);
        for (const auto& pg : g.param_grads)
            for (std::size_t i = 0; i < pg.size(); ++i) CHECK(pg[i] == 0.0);
    }

    SUBCASE("single pixel, 1x1 kernel: scalar chain rule") {
        Tensor input({1, 1, 1}, {3.0});
        Tensor kernels({1, 1, 1, 1}, {2.0});
        Tensor og({1, 1, 1}, {5.0});
        LayerGrad g = conv2d_backward(input, kernels, og, 1, 0);
        CHECK(g.param_grads[0][0] == 15.0);  // input * output_grad
        CHECK(g.param_grads[1][0] == 5.0);
        CHECK(g.input_grad[0] == 10.0);  // kernel * output_grad
    }

    SUBCASE("gradients match central finite differences") {
        Rng rng(17);
        Tensor input = oracle::random_tensor({1, 4, 4}, rng);
        Tensor kernels = oracle::random_tensor({2, 1, 3, 3}, rng);
        Tensor bias = oracle::random_tensor({2}, rng);
        Tensor og = oracle::random_tensor({2, 2, 2}, rng);

        auto loss_from = [&](const Tensor& in, const Tensor& ker, const Tensor& b) {
            Tensor out = conv2d_forward(in, ker, b, 1, 0);
            double s = 0.0;
            for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * og[i];
            return s;
        };
        LayerGrad g = conv2d_backward(input, kernels, og, 1, 0);
        // bias grad enters through the forward, so check it via the same loss
        for (std::size_t i = 0; i < input.size(); ++i) {
            double num = oracle::central_diff(
                [&](const Tensor& x) { return loss_from(x, kernels, bias); }, input, i);
            CHECK(oracle::grad_close(g.input_grad[i], num));
        }
        for (std::size_t i = 0; i < kernels.size(); ++i) {
            double num = oracle::central_diff(
                [&](const Tensor& x) { return loss_from(input, x, bias); }, kernels, i);
            CHECK(oracle::grad_close(g.param_grads[0][i], num));
        }
        for (std::size_t i = 0; i < bias.size(); ++i) {
            double num = oracle::central_diff(
                [&](const Tensor& x) { return loss_from(input, kernels, x); }, bias, i);
            CHECK(oracle::grad_close(g.param_grads[1][i], num));
        }
    }

    SUBCASE("shape mismatch rejected") {
        Tensor input({1, 4, 4});
        Tensor kernels({1, 1, 3, 3});
        Tensor og({1, 3, 3});  // forward output would be 2x2
        CHECK_THROWS_AS(conv2d_backward(input, kernels, og, 1, 0), ShapeError);
    }
}

TEST_CASE("pooling") {
    SUBCASE("constant input, mean pool stays constant") {
        Tensor input = Tensor::full({2, 4, 4}, 3.25);
        auto [out, rec] = pool_forward(input, PoolKind::mean, 2);
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 3.25);
    }

    SUBCASE("2x2 max pool of [[1,2],[3,4]]") {
        Tensor input({1, 2, 2}, {1, 2, 3, 4});
        auto [out, rec] = pool_forward(input, PoolKind::max, 2);
        CHECK(out.size() == 1);
        CHECK(out[0] == 4.0);
    }

    SUBCASE("4x4 ramp mean-pooled: hand-averaged windows") {
        std::vector<double> ramp(16);
        for (int i = 0; i < 16; ++i) ramp[i] = i + 1;
        Tensor input({1, 4, 4}, ramp);
        auto [out, rec] = pool_forward(input, PoolKind::mean, 2);
        CHECK(out[0] == 3.5);
        CHECK(out[1] == 5.5);
        CHECK(out[2] == 11.5);
        CHECK(out[3] == 13.5);
    }

    SUBCASE("window larger than extent rejected") {
        Tensor input({1, 2, 2});
        CHECK_THROWS_AS(pool_forward(input, PoolKind::max, 3), ShapeError);
    }

    SUBCASE("non-dividing window rejected") {
        Tensor input({1, 5, 5});
        CHECK_THROWS_AS(pool_forward(input, PoolKind::mean, 2), ShapeError);
    }

    SUBCASE("mean backward splits the gradient uniformly") {
        Tensor input({1, 2, 2}, {1, 2, 3, 4});
        auto [out, rec] = pool_forward(input, PoolKind::mean, 2);
        Tensor og({1, 1, 1}, {4.0});
        Tensor ig = pool_backward(rec, og);
        for (std::size_t i = 0; i < 4; ++i) CHECK(ig[i] == 1.0);
    }

    SUBCASE("max backward routes to the argmax, one nonzero per window") {
        Rng rng(23);
        for (int iter = 0; iter < 20; ++iter) {
            Tensor input = oracle::random_tensor({2, 6, 6}, rng);
            auto [out, rec] = pool_forward(input, PoolKind::max, 3);
            Tensor og = oracle::random_tensor(out.shape(), rng, 0.5, 1.0);
            Tensor ig = pool_backward(rec, og);
            // loop oracle: per window, gradient lands exactly on the max cell
            for (std::size_t c = 0; c < 2; ++c)
                for (std::size_t oh = 0; oh < 2; ++oh)
                    for (std::size_t ow = 0; ow < 2; ++ow) {
                        std::size_t nonzero = 0;
                        double best = -1e300;
                        std::size_t best_h = 0, best_w = 0;
                        for (std::size_t dh = 0; dh < 3; ++dh)
                            for (std::size_t dw = 0; dw < 3; ++dw) {
                                double v = input.at3(c, oh * 3 + dh, ow * 3 + dw);
                                if (v > best) {
                                    best = v;
                                    best_h = oh * 3 + dh;
                                    best_w = ow * 3 + dw;
                                }
                                if (ig.at3(c, oh * 3 + dh, ow * 3 + dw) != 0.0) ++nonzero;
                            }
                        CHECK(nonzero <= 1);
                        CHECK(ig.at3(c, best_h, best_w) == og.at3(c, oh, ow));
                    }
        }
    }

    SUBCASE("stale record rejected") {
        Tensor input({1, 4, 4});
        auto [out, rec] = pool_forward(input, PoolKind::mean, 2);
        Tensor bad({1, 3, 3});
        CHECK_THROWS_AS(pool_backward(rec, bad), ShapeError);
    }
}

TEST_CASE("activations") {
    SUBCASE("relu point values") {
        Tensor x({2}, {-1.0, 2.0});
        Tensor y = relu_forward(x);
        CHECK(y[0] == 0.0);
        CHECK(y[1] == 2.0);
    }

    SUBCASE("sigmoid(0) = 0.5") {
        Tensor x({1});
        CHECK(sigmoid_forward(x)[0] == 0.5);
    }

    SUBCASE("activation gradients match finite differences") {
        Rng rng(31);
        Tensor x = oracle::random_tensor({20}, rng, -2.0, 2.0);
        Tensor og = oracle::random_tensor({20}, rng);
        Tensor relu_grad = relu_backward(x, og);
        Tensor sig_out = sigmoid_forward(x);
        Tensor sig_grad = sigmoid_backward(sig_out, og);
        for (std::size_t i = 0; i < x.size(); ++i) {
            double num_relu = oracle::central_diff(
                [&](const Tensor& t) {
                    Tensor y = relu_forward(t);
                    double s = 0;
                    for (std::size_t j = 0; j < y.size(); ++j) s += y[j] * og[j];
                    return s;
                },
                x, i);
            double num_sig = oracle::central_diff(
                [&](const Tensor& t) {
                    Tensor y = sigmoid_forward(t);
                    double s = 0;
                    for (std::size_t j = 0; j < y.size(); ++j) s += y[j] * og[j];
                    return s;
                },
                x, i);
            CHECK(oracle::grad_close(relu_grad[i], num_relu));
            CHECK(oracle::grad_close(sig_grad[i], num_sig));
        }
    }
}

TEST_CASE("fully connected") {
    SUBCASE("identity weights, zero bias") {
        Tensor x({3}, {1.5, -2.0, 0.25});
        Tensor w({3, 3});
        for (std::size_t i = 0; i < 3; ++i) w.at2(i, i) = 1.0;
        Tensor b({3});
        CHECK(fc_forward(x, w, b) == x);
    }

    SUBCASE("zero input gives the bias") {
        Tensor x({4});
        Rng rng(37);
        Tensor w = oracle::random_tensor({2, 4}, rng);
        Tensor b({2}, {0.5, -0.5});
        Tensor y = fc_forward(x, w, b);
        CHECK(y[0] == 0.5);
        CHECK(y[1] == -0.5);
    }

    SUBCASE("random 8->5 gradients vs finite differences") {
        Rng rng(41);
        Tensor x = oracle::random_tensor({8}, rng);
        Tensor w = oracle::random_tensor({5, 8}, rng);
        Tensor b = oracle::random_tensor({5}, rng);
        Tensor og = oracle::random_tensor({5}, rng);
        auto loss = [&](const Tensor& xi, const Tensor& wi, const Tensor& bi) {
            Tensor y = fc_forward(xi, wi, bi);
            double s = 0;
            for (std::size_t j = 0; j < y.size(); ++j) s += y[j] * og[j];
            return s;
        };
        LayerGrad g = fc_backward(x, w, og);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(oracle::grad_close(g.input_grad[i], oracle::central_diff([&](const Tensor& t) {
                                         return loss(t, w, b);
                                     }, x, i)));
        for (std::size_t i = 0; i < w.size(); ++i)
            CHECK(oracle::grad_close(g.param_grads[0][i], oracle::central_diff([&](const Tensor& t) {
                                         return loss(x, t, b);
                                     }, w, i)));
        for (std::size_t i = 0; i < b.size(); ++i)
            CHECK(oracle::grad_close(g.param_grads[1][i], oracle::central_diff([&](const Tensor& t) {
                                         return loss(x, w, t);
                                     }, b, i)));
    }

    SUBCASE("dimension mismatch rejected") {
        Tensor x({3});
        Tensor w({2, 4});
        Tensor b({2});
        CHECK_THROWS_AS(fc_forward(x, w, b), ShapeError);
    }
}

TEST_CASE("softmax cross-entropy") {
    SUBCASE("uniform logits: probs 1/M, loss ln M") {
        Tensor logits({4});
        SoftmaxXent r = softmax_xent(logits, 2);
        for (std::size_t i = 0; i < 4; ++i) CHECK(r.probs[i] == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(r.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    }

    SUBCASE("dominant logit is overflow-safe") {
        Tensor logits({2}, {1000.0, 0.0});
        SoftmaxXent r = softmax_xent(logits, 0);
        CHECK(std::isfinite(r.loss));
        CHECK(r.loss < 1e-6);
        CHECK(r.probs[0] > 0.999);
    }

    SUBCASE("logit_grad sums to zero; probs sum to one up to |logit| 1e3") {
        Rng rng(43);
        for (int iter = 0; iter < 50; ++iter) {
            Tensor logits = oracle::random_tensor({1 + rng.below(8)}, rng, -1e3, 1e3);
            std::size_t target = rng.below(logits.size());
            SoftmaxXent r = softmax_xent(logits, target);
            double gsum = 0.0, psum = 0.0;
            for (std::size_t i = 0; i < logits.size(); ++i) {
                gsum += r.logit_grad[i];
                psum += r.probs[i];
                CHECK(r.probs[i] >= 0.0);
            }
            CHECK(std::abs(gsum) <= 1e-9);
            CHECK(std::abs(psum - 1.0) <= 1e-6);
        }
    }

    SUBCASE("target out of range rejected") {
        Tensor logits({3});
        CHECK_THROWS_AS(softmax_xent(logits, 3), ShapeError);
    }

    SUBCASE("loss gradient matches finite differences") {
        Rng rng(47);
        Tensor logits = oracle::random_tensor({6}, rng, -2.0, 2.0);
        SoftmaxXent r = softmax_xent(logits, 1);
        for (std::size_t i = 0; i < logits.size(); ++i) {
            double num = oracle::central_diff(
                [&](const Tensor& t) { return softmax_xent(t, 1).loss; }, logits, i);
            CHECK(oracle::grad_close(r.logit_grad[i], num));
        }
    }
}

TEST_CASE("sgd_update") {
    SUBCASE("zero grad, zero velocity: params unchanged") {
        Tensor p({3}, {1, 2, 3});
        Tensor g({3});
        Tensor v({3});
        SgdResult r = sgd_update(p, g, v, 0.1, 0.9);
        CHECK(r.params == p);
    }

    SUBCASE("momentum 0 is a plain step") {
        Tensor p({2}, {1.0, -1.0});
        Tensor g({2}, {0.5, 0.25});
        Tensor v({2});
        SgdResult r = sgd_update(p, g, v, 0.1, 0.0);
        CHECK(r.params[0] == doctest::Approx(1.0 - 0.05).epsilon(1e-15));
        CHECK(r.params[1] == doctest::Approx(-1.0 - 0.025).epsilon(1e-15));
    }

    SUBCASE("two momentum steps match the hand-unrolled recurrence") {
        Tensor p({1}, {1.0});
        Tensor g1({1}, {0.2});
        Tensor g2({1}, {-0.1});
        Tensor v({1});
        double lr = 0.5, mu = 0.9;
        SgdResult s1 = sgd_update(p, g1, v, lr, mu);
        SgdResult s2 = sgd_update(s1.params, g2, s1.velocity, lr, mu);
        double v1 = -lr * 0.2;
        double p1 = 1.0 + v1;
        double v2 = mu * v1 - lr * (-0.1);
        double p2 = p1 + v2;
        CHECK(s1.params[0] == doctest::Approx(p1).epsilon(1e-15));
        CHECK(s2.params[0] == doctest::Approx(p2).epsilon(1e-15));
        CHECK(s2.velocity[0] == doctest::Approx(v2).epsilon(1e-15));
    }

    SUBCASE("shape mismatch and bad hyperparameters rejected") {
        Tensor p({2});
        Tensor g({3});
        Tensor v({2});
        CHECK_THROWS_AS(sgd_update(p, g, v, 0.1, 0.9), ShapeError);
        Tensor g2({2});
        CHECK_THROWS_AS(sgd_update(p, g2, v, -1.0, 0.9), ConfigError);
        CHECK_THROWS_AS(sgd_update(p, g2, v, 0.1, 1.0), ConfigError);
    }
}
