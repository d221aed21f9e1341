#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vtc/nn/ops.hpp"

namespace vtc {

inline const std::vector<std::string>& default_class_names() {
    static const std::vector<std::string> names{"bus", "truck", "van", "small_car"};
    return names;
}

constexpr int kNumClasses = 4;
constexpr int kDenseUnits = 100; // hidden dense layers are fixed at 100 units

/// One point in the hyperparameter search space.
struct HyperParams {
    int n_conv_layers = 2;       // 1..4
    int n_dense_layers = 2;      // 0..2
    int input_size = 96;         // {64, 96, 128, 160}
    int kernel_size = 5;         // {5, 9, 13, 17}
    int n_maps = 32;             // {16, 32, 48}
    float learning_rate = 1e-3f; // [1e-5, 1e-1]

    void validate() const {
        auto one_of = [](int v, std::initializer_list<int> set) {
            for (int s : set)
                if (v == s) return true;
            return false;
        };
        if (n_conv_layers < 1 || n_conv_layers > 4)
            throw ValueError("hyperparams: n_conv_layers " + std::to_string(n_conv_layers) +
                             " outside 1..4");
        if (n_dense_layers < 0 || n_dense_layers > 2)
            throw ValueError("hyperparams: n_dense_layers " + std::to_string(n_dense_layers) +
                             " outside 0..2");
        if (!one_of(input_size, {64, 96, 128, 160}))
            throw ValueError("hyperparams: input_size " + std::to_string(input_size) +
                             " not in {64,96,128,160}");
        if (!one_of(kernel_size, {5, 9, 13, 17}))
            throw ValueError("hyperparams: kernel_size " + std::to_string(kernel_size) +
                             " not in {5,9,13,17}");
        if (!one_of(n_maps, {16, 32, 48}))
            throw ValueError("hyperparams: n_maps " + std::to_string(n_maps) +
                             " not in {16,32,48}");
        if (!(learning_rate >= 1e-5f && learning_rate <= 1e-1f))
            throw ValueError("hyperparams: learning_rate " + std::to_string(learning_rate) +
                             " outside [1e-5, 1e-1]");
        if (input_size >> n_conv_layers < 1)
            throw ValueError("hyperparams: input_size " + std::to_string(input_size) +
                             " too small for " + std::to_string(n_conv_layers) +
                             " pooling stages");
    }
};

enum class LayerKind { conv, maxpool, relu, dropout, dense, flatten };

inline const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::conv: return "conv";
        case LayerKind::maxpool: return "maxpool";
        case LayerKind::relu: return "relu";
        case LayerKind::dropout: return "dropout";
        case LayerKind::dense: return "dense";
        case LayerKind::flatten: return "flatten";
    }
    return "?";
}

/// One layer of the stack: parameters plus whatever the backward pass needs
/// from the most recent training-mode forward.
struct LayerState {
    LayerKind kind = LayerKind::relu;
    Tensor weights; // conv: MxCxkxk, dense: OxN
    Tensor bias;    // conv: M, dense: O
    float dropout_rate = 0.0f;

    // training caches
    bool has_cache = false;
    Tensor cached_input;
    std::vector<int32_t> pool_argmax;
    std::vector<int> pool_input_shape;
    std::vector<uint8_t> drop_kept;

    bool has_params() const { return kind == LayerKind::conv || kind == LayerKind::dense; }
    void clear_cache() {
        has_cache = false;
        cached_input = Tensor();
        pool_argmax.clear();
        pool_input_shape.clear();
        drop_kept.clear();
    }
};

struct TrainingMeta {
    uint64_t seed = 0;
    int iterations = 0;
    float final_train_loss = 0.0f;
    float final_test_accuracy = 0.0f;
};

/// Ordered layer stack ready for forward inference and serialization.
/// Layer sequence: n_conv x [conv relu dropout maxpool], flatten,
/// n_dense x [dense(100) relu dropout], dense(4); softmax is applied by
/// the loss during training and by predict() at inference.
struct TrainedCnn {
    HyperParams hp;
    std::vector<LayerState> layers;
    std::vector<std::string> class_names = default_class_names();
    TrainingMeta meta;
    float dropout_rate = 0.5f;

    std::vector<Tensor*> parameters() {
        std::vector<Tensor*> out;
        for (auto& l : layers) {
            if (l.has_params()) {
                out.push_back(&l.weights);
                out.push_back(&l.bias);
            }
        }
        return out;
    }
    std::vector<const Tensor*> parameters() const {
        std::vector<const Tensor*> out;
        for (const auto& l : layers) {
            if (l.has_params()) {
                out.push_back(&l.weights);
                out.push_back(&l.bias);
            }
        }
        return out;
    }
};

/// Gradients aligned with TrainedCnn::layers; empty tensors for layers
/// without parameters. shape(grad) == shape(param) throughout.
struct GradientSet {
    std::vector<Tensor> weights;
    std::vector<Tensor> bias;
};

/// Activation shapes from input to logits, by symbolic propagation only
/// (no tensors are allocated). First entry is the input shape.
inline std::vector<std::vector<int>> shape_chain(const HyperParams& hp) {
    hp.validate();
    std::vector<std::vector<int>> chain;
    int c = 3, s = hp.input_size;
    chain.push_back({c, s, s});
    for (int i = 0; i < hp.n_conv_layers; ++i) {
        c = hp.n_maps;
        chain.push_back({c, s, s}); // conv (same padding) + relu + dropout
        s /= 2;
        chain.push_back({c, s, s}); // maxpool
    }
    int width = c * s * s;
    chain.push_back({width}); // flatten
    for (int i = 0; i < hp.n_dense_layers; ++i) {
        width = kDenseUnits;
        chain.push_back({width});
    }
    chain.push_back({kNumClasses}); // output logits
    return chain;
}

/// Trainable parameter count for a topology.
inline std::size_t count_parameters(const HyperParams& hp) {
    hp.validate();
    std::size_t total = 0;
    int c = 3, s = hp.input_size;
    for (int i = 0; i < hp.n_conv_layers; ++i) {
        total += static_cast<std::size_t>(hp.n_maps) * c * hp.kernel_size * hp.kernel_size +
                 hp.n_maps;
        c = hp.n_maps;
        s /= 2;
    }
    int width = c * s * s;
    for (int i = 0; i < hp.n_dense_layers; ++i) {
        total += static_cast<std::size_t>(kDenseUnits) * width + kDenseUnits;
        width = kDenseUnits;
    }
    total += static_cast<std::size_t>(kNumClasses) * width + kNumClasses;
    return total;
}

struct BuildOptions {
    float dropout_rate = 0.5f;
};

namespace detail {

/// Builds the layer stack with zero parameters (loader fills them in).
inline TrainedCnn make_topology(const HyperParams& hp, const BuildOptions& opts) {
    hp.validate();
    TrainedCnn net;
    net.hp = hp;
    net.dropout_rate = opts.dropout_rate;
    int c = 3, s = hp.input_size;
    for (int i = 0; i < hp.n_conv_layers; ++i) {
        LayerState conv;
        conv.kind = LayerKind::conv;
        conv.weights = Tensor({hp.n_maps, c, hp.kernel_size, hp.kernel_size});
        conv.bias = Tensor({hp.n_maps});
        net.layers.push_back(std::move(conv));
        net.layers.push_back({.kind = LayerKind::relu});
        LayerState drop;
        drop.kind = LayerKind::dropout;
        drop.dropout_rate = opts.dropout_rate;
        net.layers.push_back(std::move(drop));
        net.layers.push_back({.kind = LayerKind::maxpool});
        c = hp.n_maps;
        s /= 2;
    }
    net.layers.push_back({.kind = LayerKind::flatten});
    int width = c * s * s;
    for (int i = 0; i < hp.n_dense_layers; ++i) {
        LayerState dense;
        dense.kind = LayerKind::dense;
        dense.weights = Tensor({kDenseUnits, width});
        dense.bias = Tensor({kDenseUnits});
        net.layers.push_back(std::move(dense));
        net.layers.push_back({.kind = LayerKind::relu});
        LayerState drop;
        drop.kind = LayerKind::dropout;
        drop.dropout_rate = opts.dropout_rate;
        net.layers.push_back(std::move(drop));
        width = kDenseUnits;
    }
    LayerState out;
    out.kind = LayerKind::dense;
    out.weights = Tensor({kNumClasses, width});
    out.bias = Tensor({kNumClasses});
    net.layers.push_back(std::move(out));
    return net;
}

inline int fan_in(const LayerState& l) {
    if (l.kind == LayerKind::conv) return l.weights.dim(1) * l.weights.dim(2) * l.weights.dim(3);
    return l.weights.dim(1);
}

} // namespace detail

/// He initialization: zero-mean Gaussian with std sqrt(2 / fan_in), zero biases.
inline TrainedCnn build_network(const HyperParams& hp, std::mt19937& rng,
                                const BuildOptions& opts = {}) {
    TrainedCnn net = detail::make_topology(hp, opts);
    for (auto& l : net.layers) {
        if (!l.has_params()) continue;
        const float stddev = std::sqrt(2.0f / static_cast<float>(detail::fan_in(l)));
        std::normal_distribution<float> dist(0.0f, stddev);
        for (std::size_t i = 0; i < l.weights.size(); ++i) l.weights[i] = dist(rng);
    }
    return net;
}

/// Training-mode forward: caches per-layer inputs/masks for backward().
/// Returns logits (B x 4). Dropout draws come from `rng`.
inline Tensor forward_train(TrainedCnn& net, const Tensor& batch, std::mt19937& rng) {
    Tensor x = batch;
    for (auto& l : net.layers) {
        switch (l.kind) {
            case LayerKind::conv: {
                l.cached_input = x;
                x = conv2d_forward(x, l.weights, l.bias);
                break;
            }
            case LayerKind::relu: {
                l.cached_input = x;
                x = relu(x);
                break;
            }
            case LayerKind::dropout: {
                auto r = dropout(x, l.dropout_rate, DropoutMode::train, rng);
                l.drop_kept = std::move(r.kept);
                x = std::move(r.output);
                break;
            }
            case LayerKind::maxpool: {
                l.pool_input_shape = x.shape();
                auto r = maxpool2_forward(x);
                l.pool_argmax = std::move(r.argmax);
                x = std::move(r.output);
                break;
            }
            case LayerKind::flatten: {
                l.pool_input_shape = x.shape();
                x = x.reshaped({x.dim(0), static_cast<int>(x.size()) / x.dim(0)});
                break;
            }
            case LayerKind::dense: {
                l.cached_input = x;
                x = dense_forward(x, l.weights, l.bias);
                break;
            }
        }
        l.has_cache = true;
    }
    return x;
}

/// Inference forward: dropout is an identity pass, nothing is cached.
inline Tensor forward_infer(const TrainedCnn& net, const Tensor& batch) {
    Tensor x = batch;
    for (const auto& l : net.layers) {
        switch (l.kind) {
            case LayerKind::conv: x = conv2d_forward(x, l.weights, l.bias); break;
            case LayerKind::relu: x = relu(x); break;
            case LayerKind::dropout: break;
            case LayerKind::maxpool: x = maxpool2_forward(x).output; break;
            case LayerKind::flatten:
                x = x.reshaped({x.dim(0), static_cast<int>(x.size()) / x.dim(0)});
                break;
            case LayerKind::dense: x = dense_forward(x, l.weights, l.bias); break;
        }
    }
    return x;
}

/// Backpropagates grad_logits through the stack. Requires a prior
/// forward_train on the same batch.
inline GradientSet backward(TrainedCnn& net, const Tensor& grad_logits) {
    GradientSet grads;
    grads.weights.resize(net.layers.size());
    grads.bias.resize(net.layers.size());
    Tensor g = grad_logits;
    for (int i = static_cast<int>(net.layers.size()) - 1; i >= 0; --i) {
        LayerState& l = net.layers[static_cast<std::size_t>(i)];
        if (!l.has_cache) {
            throw StateError(std::string("backward: layer ") + std::to_string(i) + " (" +
                             layer_kind_name(l.kind) + ") has no cached forward state");
        }
        switch (l.kind) {
            case LayerKind::conv: {
                auto r = conv2d_backward(g, l.cached_input, l.weights, /*need_input_grad=*/i > 0);
                grads.weights[static_cast<std::size_t>(i)] = std::move(r.kernels);
                grads.bias[static_cast<std::size_t>(i)] = std::move(r.bias);
                g = std::move(r.input);
                break;
            }
            case LayerKind::relu: g = relu_backward(g, l.cached_input); break;
            case LayerKind::dropout: g = dropout_backward(g, l.drop_kept, l.dropout_rate); break;
            case LayerKind::maxpool: g = maxpool2_backward(g, l.pool_argmax, l.pool_input_shape); break;
            case LayerKind::flatten: g = g.reshaped(l.pool_input_shape); break;
            case LayerKind::dense: {
                auto r = dense_backward(g, l.cached_input, l.weights);
                grads.weights[static_cast<std::size_t>(i)] = std::move(r.weights);
                grads.bias[static_cast<std::size_t>(i)] = std::move(r.bias);
                g = std::move(r.input);
                break;
            }
        }
    }
    return grads;
}

inline void apply_sgd(TrainedCnn& net, const GradientSet& grads, float lr) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        LayerState& l = net.layers[i];
        if (!l.has_params()) continue;
        sgd_step(l.weights, grads.weights[i], lr);
        sgd_step(l.bias, grads.bias[i], lr);
    }
}

struct Prediction {
    int class_index = 0;
    std::array<float, kNumClasses> probabilities{};
};

/// Single-image inference. Ties in the argmax go to the lowest class index.
inline Prediction predict(const TrainedCnn& net, const Tensor& image) {
    if (image.rank() != 3 || image.dim(0) != 3 || image.dim(1) != net.hp.input_size ||
        image.dim(2) != net.hp.input_size) {
        throw ShapeError("predict: image " + shape_str(image.shape()) + " must be [3x" +
                         std::to_string(net.hp.input_size) + "x" +
                         std::to_string(net.hp.input_size) + "]");
    }
    Tensor batch = image.reshaped({1, 3, net.hp.input_size, net.hp.input_size});
    Tensor probs = softmax_rows(forward_infer(net, batch));
    Prediction p;
    for (int k = 0; k < kNumClasses; ++k) {
        p.probabilities[static_cast<std::size_t>(k)] = probs.at(0, k);
        if (probs.at(0, k) > p.probabilities[static_cast<std::size_t>(p.class_index)]) {
            p.class_index = k;
        }
    }
    return p;
}

/// Post-ReLU activation maps of the conv_index-th convolutional layer,
/// each min-max normalized to [0,1] (constant maps come back all zero).
inline std::vector<Tensor> dump_feature_maps(const TrainedCnn& net, const Tensor& image,
                                             int conv_index) {
    if (conv_index < 0 || conv_index >= net.hp.n_conv_layers) {
        throw ValueError("dump_feature_maps: conv layer index " + std::to_string(conv_index) +
                         " out of range [0," + std::to_string(net.hp.n_conv_layers) + ")");
    }
    Tensor x = image.reshaped({1, image.dim(0), image.dim(1), image.dim(2)});
    int seen = -1;
    for (const auto& l : net.layers) {
        switch (l.kind) {
            case LayerKind::conv:
                x = conv2d_forward(x, l.weights, l.bias);
                ++seen;
                break;
            case LayerKind::relu:
                x = relu(x);
                if (seen == conv_index) {
                    std::vector<Tensor> maps;
                    const int M = x.dim(1), H = x.dim(2), W = x.dim(3);
                    for (int m = 0; m < M; ++m) {
                        Tensor map({1, H, W});
                        const float* src = x.data() + static_cast<std::size_t>(m) * H * W;
                        float lo = src[0], hi = src[0];
                        for (int i = 1; i < H * W; ++i) {
                            lo = std::min(lo, src[i]);
                            hi = std::max(hi, src[i]);
                        }
                        const float range = hi - lo;
                        for (int i = 0; i < H * W; ++i) {
                            map[static_cast<std::size_t>(i)] =
                                range > 0.0f ? (src[i] - lo) / range : 0.0f;
                        }
                        maps.push_back(std::move(map));
                    }
                    return maps;
                }
                break;
            case LayerKind::dropout: break; // identity at inference
            case LayerKind::maxpool: x = maxpool2_forward(x).output; break;
            default:
                throw StateError("dump_feature_maps: walked past the conv stack");
        }
    }
    throw StateError("dump_feature_maps: conv layer not reached");
}

} // namespace vtc
