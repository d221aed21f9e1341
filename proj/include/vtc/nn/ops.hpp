#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "vtc/detail/gemm.hpp"
#include "vtc/errors.hpp"
#include "vtc/tensor.hpp"

namespace vtc {

namespace detail {

/// Unpacks one image (CxHxW view) into a patch matrix of shape
/// (C*k*k) x (H*W) for a stride-1 "same" convolution with zero padding.
/// Row r = (c*k + dy)*k + dx holds the input plane c shifted by
/// (dy - pad, dx - pad), zeros outside the image.
template <typename T>
inline void im2col_same(const T* img, int C, int H, int W, int k, T* cols) {
    const int pad = (k - 1) / 2;
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    std::size_t r = 0;
    for (int c = 0; c < C; ++c) {
        const T* src_plane = img + static_cast<std::size_t>(c) * plane;
        for (int dy = 0; dy < k; ++dy) {
            for (int dx = 0; dx < k; ++dx, ++r) {
                T* dst = cols + r * plane;
                const int oy = dy - pad;
                const int ox = dx - pad;
                for (int y = 0; y < H; ++y) {
                    T* drow = dst + static_cast<std::size_t>(y) * W;
                    const int sy = y + oy;
                    if (sy < 0 || sy >= H) {
                        std::fill(drow, drow + W, T(0));
                        continue;
                    }
                    const T* srow = src_plane + static_cast<std::size_t>(sy) * W;
                    const int x0 = std::max(0, -ox);
                    const int x1 = std::min(W, W - ox);
                    if (x0 > 0) std::fill(drow, drow + x0, T(0));
                    for (int x = x0; x < x1; ++x) drow[x] = srow[x + ox];
                    if (x1 < W) std::fill(drow + std::max(x0, x1), drow + W, T(0));
                }
            }
        }
    }
}

/// Adjoint of im2col_same: scatter-adds a patch matrix back into an image.
template <typename T>
inline void col2im_same(const T* cols, int C, int H, int W, int k, T* img) {
    const int pad = (k - 1) / 2;
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    std::size_t r = 0;
    for (int c = 0; c < C; ++c) {
        T* dst_plane = img + static_cast<std::size_t>(c) * plane;
        for (int dy = 0; dy < k; ++dy) {
            for (int dx = 0; dx < k; ++dx, ++r) {
                const T* src = cols + r * plane;
                const int oy = dy - pad;
                const int ox = dx - pad;
                for (int y = 0; y < H; ++y) {
                    const int sy = y + oy;
                    if (sy < 0 || sy >= H) continue;
                    const T* srow = src + static_cast<std::size_t>(y) * W;
                    T* drow = dst_plane + static_cast<std::size_t>(sy) * W;
                    const int x0 = std::max(0, -ox);
                    const int x1 = std::min(W, W - ox);
                    for (int x = x0; x < x1; ++x) drow[x + ox] += srow[x];
                }
            }
        }
    }
}

template <typename T>
inline void require_rank(const TensorT<T>& t, int rank, const char* op, const char* what) {
    if (t.rank() != rank) {
        throw ShapeError(std::string(op) + ": " + what + " must have rank " +
                         std::to_string(rank) + ", got " + shape_str(t.shape()));
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Convolution ("same" zero padding, stride 1, odd square kernels)
// ---------------------------------------------------------------------------

template <typename T>
inline void check_conv_shapes(const TensorT<T>& input, const TensorT<T>& kernels,
                              const TensorT<T>& bias) {
    detail::require_rank(input, 4, "conv2d", "input");
    detail::require_rank(kernels, 4, "conv2d", "kernels");
    detail::require_rank(bias, 1, "conv2d", "bias");
    const int k = kernels.dim(2);
    if (kernels.dim(3) != k) {
        throw ShapeError("conv2d: kernel is not square: " + shape_str(kernels.shape()));
    }
    if (k % 2 == 0) {
        throw ShapeError("conv2d: kernel size " + std::to_string(k) + " must be odd");
    }
    if (kernels.dim(1) != input.dim(1)) {
        throw ShapeError("conv2d: input channels " + std::to_string(input.dim(1)) +
                         " != kernel channels " + std::to_string(kernels.dim(1)));
    }
    if (bias.dim(0) != kernels.dim(0)) {
        throw ShapeError("conv2d: bias length " + std::to_string(bias.dim(0)) +
                         " != output maps " + std::to_string(kernels.dim(0)));
    }
}

/// out[b,m,y,x] = bias[m] + sum_{c,dy,dx} input[b,c,y+dy-pad,x+dx-pad] * kernels[m,c,dy,dx]
/// with zeros outside the image; spatial dimensions are preserved.
template <typename T>
inline TensorT<T> conv2d_forward(const TensorT<T>& input, const TensorT<T>& kernels,
                                 const TensorT<T>& bias) {
    check_conv_shapes(input, kernels, bias);
    const int B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    const int M = kernels.dim(0), k = kernels.dim(2);
    const int K = C * k * k;
    const int N = H * W;

    TensorT<T> out({B, M, H, W});
    std::vector<T> cols(static_cast<std::size_t>(K) * N);
    for (int b = 0; b < B; ++b) {
        detail::im2col_same(input.data() + static_cast<std::size_t>(b) * C * N, C, H, W, k,
                            cols.data());
        T* out_b = out.data() + static_cast<std::size_t>(b) * M * N;
        for (int m = 0; m < M; ++m) {
            std::fill(out_b + static_cast<std::size_t>(m) * N,
                      out_b + static_cast<std::size_t>(m + 1) * N, bias[static_cast<std::size_t>(m)]);
        }
        detail::gemm_nn(M, N, K, kernels.data(), cols.data(), out_b);
    }
    return out;
}

template <typename T>
struct Conv2dGrads {
    TensorT<T> input;   // dL/dinput, shape of input
    TensorT<T> kernels; // dL/dkernels, shape of kernels
    TensorT<T> bias;    // dL/dbias, shape of bias
};

/// Exact adjoint of conv2d_forward (the map is linear in input and weights).
/// need_input_grad=false skips the input-gradient half (first-layer case);
/// the returned input grad is then all zero.
template <typename T>
inline Conv2dGrads<T> conv2d_backward(const TensorT<T>& grad_out, const TensorT<T>& input,
                                      const TensorT<T>& kernels, bool need_input_grad = true) {
    detail::require_rank(grad_out, 4, "conv2d_backward", "grad_out");
    const int B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    const int M = kernels.dim(0), k = kernels.dim(2);
    if (grad_out.dim(0) != B || grad_out.dim(1) != M || grad_out.dim(2) != H ||
        grad_out.dim(3) != W) {
        throw ShapeError("conv2d_backward: grad_out " + shape_str(grad_out.shape()) +
                         " does not match forward output [" + std::to_string(B) + "x" +
                         std::to_string(M) + "x" + std::to_string(H) + "x" + std::to_string(W) +
                         "]");
    }
    const int K = C * k * k;
    const int N = H * W;

    Conv2dGrads<T> g{TensorT<T>({B, C, H, W}), TensorT<T>({M, C, k, k}), TensorT<T>({M})};
    std::vector<T> cols(static_cast<std::size_t>(K) * N);
    std::vector<T> gcols(static_cast<std::size_t>(K) * N);
    for (int b = 0; b < B; ++b) {
        const T* gout_b = grad_out.data() + static_cast<std::size_t>(b) * M * N;

        // bias grad: plain sum over spatial positions
        for (int m = 0; m < M; ++m) {
            T acc = T(0);
            const T* row = gout_b + static_cast<std::size_t>(m) * N;
            for (int n = 0; n < N; ++n) acc += row[n];
            g.bias[static_cast<std::size_t>(m)] += acc;
        }

        // weight grad: dW += gout (MxN) . cols^T (NxK)
        detail::im2col_same(input.data() + static_cast<std::size_t>(b) * C * N, C, H, W, k,
                            cols.data());
        detail::gemm_nt(M, K, N, gout_b, cols.data(), g.kernels.data());

        // input grad: gcols (KxN) = W^T (KxM) . gout (MxN), then scatter
        if (need_input_grad) {
            std::fill(gcols.begin(), gcols.end(), T(0));
            detail::gemm_tn(K, N, M, kernels.data(), gout_b, gcols.data());
            detail::col2im_same(gcols.data(), C, H, W, k,
                                g.input.data() + static_cast<std::size_t>(b) * C * N);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// 2x2 max pooling
// ---------------------------------------------------------------------------

template <typename T>
struct MaxPoolResult {
    TensorT<T> output;           // B x C x H/2 x W/2
    std::vector<int32_t> argmax; // flat input index of each window winner
};

/// Disjoint 2x2 windows; ties go to the first position in row-major
/// window order so the backward pass is deterministic.
template <typename T>
inline MaxPoolResult<T> maxpool2_forward(const TensorT<T>& input) {
    detail::require_rank(input, 4, "maxpool2", "input");
    const int B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    if (H % 2 != 0 || W % 2 != 0) {
        throw ShapeError("maxpool2: spatial dims " + std::to_string(H) + "x" +
                         std::to_string(W) + " must be even");
    }
    const int Ho = H / 2, Wo = W / 2;
    MaxPoolResult<T> res{TensorT<T>({B, C, Ho, Wo}),
                         std::vector<int32_t>(static_cast<std::size_t>(B) * C * Ho * Wo)};
    const T* in = input.data();
    T* out = res.output.data();
    std::size_t o = 0;
    for (int bc = 0; bc < B * C; ++bc) {
        const std::size_t base = static_cast<std::size_t>(bc) * H * W;
        for (int y = 0; y < Ho; ++y) {
            for (int x = 0; x < Wo; ++x, ++o) {
                const std::size_t i00 = base + static_cast<std::size_t>(2 * y) * W + 2 * x;
                std::size_t best = i00;
                T bv = in[i00];
                const std::size_t cand[3] = {i00 + 1, i00 + W, i00 + W + 1};
                for (std::size_t idx : cand) {
                    if (in[idx] > bv) {
                        bv = in[idx];
                        best = idx;
                    }
                }
                out[o] = bv;
                res.argmax[o] = static_cast<int32_t>(best);
            }
        }
    }
    return res;
}

/// Routes each output gradient to its window's winning input position.
template <typename T>
inline TensorT<T> maxpool2_backward(const TensorT<T>& grad_out,
                                    const std::vector<int32_t>& argmax,
                                    const std::vector<int>& input_shape) {
    if (grad_out.size() != argmax.size()) {
        throw ShapeError("maxpool2_backward: grad_out size " + std::to_string(grad_out.size()) +
                         " != mask size " + std::to_string(argmax.size()));
    }
    TensorT<T> gin(input_shape);
    if (4 * grad_out.size() != gin.size()) {
        throw ShapeError("maxpool2_backward: mask does not match input shape " +
                         shape_str(input_shape));
    }
    for (std::size_t o = 0; o < argmax.size(); ++o) {
        gin[static_cast<std::size_t>(argmax[o])] += grad_out[o];
    }
    return gin;
}

// ---------------------------------------------------------------------------
// ReLU
// ---------------------------------------------------------------------------

template <typename T>
inline TensorT<T> relu(const TensorT<T>& input) {
    TensorT<T> out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > T(0) ? input[i] : T(0);
    return out;
}

/// Subgradient 0 at exactly x == 0.
template <typename T>
inline TensorT<T> relu_backward(const TensorT<T>& grad_out, const TensorT<T>& cached_input) {
    if (!grad_out.same_shape(cached_input)) {
        throw ShapeError("relu_backward: grad shape " + shape_str(grad_out.shape()) +
                         " != cached input shape " + shape_str(cached_input.shape()));
    }
    TensorT<T> gin(grad_out.shape());
    for (std::size_t i = 0; i < gin.size(); ++i) {
        gin[i] = cached_input[i] > T(0) ? grad_out[i] : T(0);
    }
    return gin;
}

// ---------------------------------------------------------------------------
// Dropout (inverted scaling: inference is an identity pass)
// ---------------------------------------------------------------------------

enum class DropoutMode { train, infer };

struct DropoutResult {
    Tensor output;
    std::vector<uint8_t> kept; // per-element keep mask (train mode)
};

inline DropoutResult dropout(const Tensor& input, float rate, DropoutMode mode,
                             std::mt19937& rng) {
    if (!(rate >= 0.0f && rate < 1.0f)) {
        throw ValueError("dropout: rate " + std::to_string(rate) + " must be in [0,1)");
    }
    DropoutResult res;
    if (mode == DropoutMode::infer || rate == 0.0f) {
        res.output = input;
        res.kept.assign(input.size(), 1);
        return res;
    }
    res.output = Tensor(input.shape());
    res.kept.resize(input.size());
    const float scale = 1.0f / (1.0f - rate);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (std::size_t i = 0; i < input.size(); ++i) {
        const bool keep = u(rng) >= rate;
        res.kept[i] = keep ? 1 : 0;
        res.output[i] = keep ? input[i] * scale : 0.0f;
    }
    return res;
}

inline Tensor dropout_backward(const Tensor& grad_out, const std::vector<uint8_t>& kept,
                               float rate) {
    if (grad_out.size() != kept.size()) {
        throw ShapeError("dropout_backward: grad size " + std::to_string(grad_out.size()) +
                         " != mask size " + std::to_string(kept.size()));
    }
    Tensor gin(grad_out.shape());
    const float scale = 1.0f / (1.0f - rate);
    for (std::size_t i = 0; i < gin.size(); ++i) {
        gin[i] = kept[i] ? grad_out[i] * scale : 0.0f;
    }
    return gin;
}

// ---------------------------------------------------------------------------
// Dense (fully connected)
// ---------------------------------------------------------------------------

/// out = input . weights^T + bias, input BxN, weights OxN, bias O.
template <typename T>
inline TensorT<T> dense_forward(const TensorT<T>& input, const TensorT<T>& weights,
                                const TensorT<T>& bias) {
    detail::require_rank(input, 2, "dense", "input");
    detail::require_rank(weights, 2, "dense", "weights");
    detail::require_rank(bias, 1, "dense", "bias");
    const int B = input.dim(0), N = input.dim(1), O = weights.dim(0);
    if (weights.dim(1) != N) {
        throw ShapeError("dense: input width " + std::to_string(N) + " != weight width " +
                         std::to_string(weights.dim(1)));
    }
    if (bias.dim(0) != O) {
        throw ShapeError("dense: bias length " + std::to_string(bias.dim(0)) +
                         " != output units " + std::to_string(O));
    }
    TensorT<T> out({B, O});
    for (int b = 0; b < B; ++b) {
        for (int o = 0; o < O; ++o) out.at(b, o) = bias[static_cast<std::size_t>(o)];
    }
    detail::gemm_nt(B, O, N, input.data(), weights.data(), out.data());
    return out;
}

template <typename T>
struct DenseGrads {
    TensorT<T> input;
    TensorT<T> weights;
    TensorT<T> bias;
};

template <typename T>
inline DenseGrads<T> dense_backward(const TensorT<T>& grad_out, const TensorT<T>& input,
                                    const TensorT<T>& weights) {
    detail::require_rank(grad_out, 2, "dense_backward", "grad_out");
    const int B = input.dim(0), N = input.dim(1), O = weights.dim(0);
    if (grad_out.dim(0) != B || grad_out.dim(1) != O) {
        throw ShapeError("dense_backward: grad_out " + shape_str(grad_out.shape()) +
                         " does not match output [" + std::to_string(B) + "x" +
                         std::to_string(O) + "]");
    }
    DenseGrads<T> g{TensorT<T>({B, N}), TensorT<T>({O, N}), TensorT<T>({O})};
    detail::gemm_nn(B, N, O, grad_out.data(), weights.data(), g.input.data());
    detail::gemm_tn(O, N, B, grad_out.data(), input.data(), g.weights.data());
    for (int b = 0; b < B; ++b) {
        for (int o = 0; o < O; ++o) {
            g.bias[static_cast<std::size_t>(o)] += grad_out.at(b, o);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Softmax + cross-entropy
// ---------------------------------------------------------------------------

template <typename T>
struct SoftmaxXentResult {
    double loss = 0.0;       // mean over the batch
    TensorT<T> probs;        // BxK, each row sums to 1
    TensorT<T> grad_logits;  // (probs - onehot)/B
};

/// Numerically stabilized: subtracts the row max and evaluates the loss in
/// log-sum-exp form, so it stays finite for logits up to ~1e4 in magnitude.
template <typename T>
inline SoftmaxXentResult<T> softmax_xent(const TensorT<T>& logits,
                                         const std::vector<int>& labels) {
    detail::require_rank(logits, 2, "softmax_xent", "logits");
    const int B = logits.dim(0), K = logits.dim(1);
    if (static_cast<int>(labels.size()) != B) {
        throw ShapeError("softmax_xent: labels length " + std::to_string(labels.size()) +
                         " != batch " + std::to_string(B));
    }
    for (int b = 0; b < B; ++b) {
        if (labels[static_cast<std::size_t>(b)] < 0 || labels[static_cast<std::size_t>(b)] >= K) {
            throw ValueError("softmax_xent: label " +
                             std::to_string(labels[static_cast<std::size_t>(b)]) +
                             " out of range [0," + std::to_string(K) + ")");
        }
    }
    SoftmaxXentResult<T> res;
    res.probs = TensorT<T>({B, K});
    res.grad_logits = TensorT<T>({B, K});
    double loss_sum = 0.0;
    const T inv_b = T(1) / static_cast<T>(B);
    for (int b = 0; b < B; ++b) {
        const T* z = logits.data() + static_cast<std::size_t>(b) * K;
        T* p = res.probs.data() + static_cast<std::size_t>(b) * K;
        T* g = res.grad_logits.data() + static_cast<std::size_t>(b) * K;
        T zmax = z[0];
        for (int k = 1; k < K; ++k) zmax = std::max(zmax, z[k]);
        double denom = 0.0;
        for (int k = 0; k < K; ++k) {
            const double e = std::exp(static_cast<double>(z[k] - zmax));
            p[k] = static_cast<T>(e);
            denom += e;
        }
        const int lbl = labels[static_cast<std::size_t>(b)];
        loss_sum += std::log(denom) - static_cast<double>(z[lbl] - zmax);
        const T inv_denom = static_cast<T>(1.0 / denom);
        for (int k = 0; k < K; ++k) {
            p[k] *= inv_denom;
            g[k] = p[k] * inv_b;
        }
        g[lbl] -= inv_b;
    }
    res.loss = loss_sum / B;
    return res;
}

/// Softmax over rows, for inference.
template <typename T>
inline TensorT<T> softmax_rows(const TensorT<T>& logits) {
    detail::require_rank(logits, 2, "softmax", "logits");
    const int B = logits.dim(0), K = logits.dim(1);
    TensorT<T> out({B, K});
    for (int b = 0; b < B; ++b) {
        const T* z = logits.data() + static_cast<std::size_t>(b) * K;
        T* p = out.data() + static_cast<std::size_t>(b) * K;
        T zmax = z[0];
        for (int k = 1; k < K; ++k) zmax = std::max(zmax, z[k]);
        double denom = 0.0;
        for (int k = 0; k < K; ++k) {
            const double e = std::exp(static_cast<double>(z[k] - zmax));
            p[k] = static_cast<T>(e);
            denom += e;
        }
        const T inv_denom = static_cast<T>(1.0 / denom);
        for (int k = 0; k < K; ++k) p[k] *= inv_denom;
    }
    return out;
}

// ---------------------------------------------------------------------------
// SGD
// ---------------------------------------------------------------------------

/// w <- w - lr * g, in place. Plain SGD, no momentum.
/// A non-finite gradient aborts the step before touching the parameters.
inline void sgd_step(Tensor& param, const Tensor& grad, float lr) {
    if (!(lr > 0.0f)) throw ValueError("sgd_step: lr " + std::to_string(lr) + " must be > 0");
    if (!param.same_shape(grad)) {
        throw ShapeError("sgd_step: grad shape " + shape_str(grad.shape()) +
                         " != param shape " + shape_str(param.shape()));
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!std::isfinite(grad[i])) {
            throw ValueError("sgd_step: non-finite gradient at flat index " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < param.size(); ++i) param[i] -= lr * grad[i];
}

} // namespace vtc
