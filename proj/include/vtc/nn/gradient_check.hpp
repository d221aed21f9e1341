#pragma once

#include <cmath>
#include <vector>

#include "vtc/nn/network.hpp"

namespace vtc {

namespace detail {

/// Loss of the network evaluated at a given precision. Dropout layers are
/// treated as identity (the check runs on the deterministic part of the
/// stack). Used as the finite-difference side of gradient_check with
/// T = double, per-layer parameters supplied separately so they can be
/// perturbed without touching the float network.
template <typename T>
inline double network_loss(const TrainedCnn& net, const std::vector<TensorT<T>>& weights,
                           const std::vector<TensorT<T>>& bias, const TensorT<T>& input,
                           const std::vector<int>& labels) {
    TensorT<T> x = input;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerState& l = net.layers[i];
        switch (l.kind) {
            case LayerKind::conv: x = conv2d_forward(x, weights[i], bias[i]); break;
            case LayerKind::relu: x = relu(x); break;
            case LayerKind::dropout: break;
            case LayerKind::maxpool: x = maxpool2_forward(x).output; break;
            case LayerKind::flatten:
                x = x.reshaped({x.dim(0), static_cast<int>(x.size()) / x.dim(0)});
                break;
            case LayerKind::dense: x = dense_forward(x, weights[i], bias[i]); break;
        }
    }
    return softmax_xent(x, labels).loss;
}

inline double rel_error(double a, double b) {
    // Floored relative error (atol/rtol style): values below 1e-2 are
    // compared absolutely at 1e-2 * tolerance.
    const double denom = std::max({std::fabs(a), std::fabs(b), 1e-2});
    return std::fabs(a - b) / denom;
}

} // namespace detail

/// Central finite differences on every parameter against the backprop
/// gradient; returns the maximum floored relative error. The FD side
/// evaluates the loss in double precision; the backprop side is the
/// production float path with dropout disabled. Intended for networks
/// of at most ~1e4 parameters.
inline double gradient_check(const TrainedCnn& reference, const Tensor& input,
                             const std::vector<int>& labels, double epsilon = 1e-4) {
    TrainedCnn net = reference;
    for (auto& l : net.layers) {
        if (l.kind == LayerKind::dropout) l.dropout_rate = 0.0f;
    }

    // backprop gradient on the float path
    std::mt19937 rng(0); // unused: dropout is off
    Tensor logits = forward_train(net, input, rng);
    auto sx = softmax_xent(logits, labels);
    GradientSet grads = backward(net, sx.grad_logits);

    // double copies for the FD oracle
    std::vector<TensorT<double>> w64(net.layers.size()), b64(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (net.layers[i].has_params()) {
            w64[i] = net.layers[i].weights.template cast<double>();
            b64[i] = net.layers[i].bias.template cast<double>();
        }
    }
    const TensorT<double> in64 = input.cast<double>();

    double max_err = 0.0;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (!net.layers[i].has_params()) continue;
        for (int part = 0; part < 2; ++part) {
            TensorT<double>& p = part == 0 ? w64[i] : b64[i];
            const Tensor& bp = part == 0 ? grads.weights[i] : grads.bias[i];
            for (std::size_t j = 0; j < p.size(); ++j) {
                const double saved = p[j];
                p[j] = saved + epsilon;
                const double lp = detail::network_loss(net, w64, b64, in64, labels);
                p[j] = saved - epsilon;
                const double lm = detail::network_loss(net, w64, b64, in64, labels);
                p[j] = saved;
                const double fd = (lp - lm) / (2.0 * epsilon);
                max_err = std::max(max_err, detail::rel_error(static_cast<double>(bp[j]), fd));
            }
        }
    }
    return max_err;
}

} // namespace vtc
