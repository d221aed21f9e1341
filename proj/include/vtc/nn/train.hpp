#pragma once

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "vtc/nn/network.hpp"

namespace vtc {

struct TrainConfig {
    int max_iterations = 30000; // mini-batch iterations, no early stopping
    int batch_size = 32;
    int eval_every = 500;
    uint64_t rng_seed = 0;
    bool augment = true;

    void validate() const {
        if (max_iterations < 0) throw ValueError("train: max_iterations must be >= 0");
        if (batch_size < 1) throw ValueError("train: batch_size must be >= 1");
        if (eval_every < 1) throw ValueError("train: eval_every must be >= 1");
    }
};

struct CurvePoint {
    int iteration = 0;
    float train_loss = 0.0f;    // mean batch loss since the previous record
    float test_accuracy = 0.0f; // full test-set accuracy at this iteration
};

using LearningCurve = std::vector<CurvePoint>;

struct TrainResult {
    LearningCurve curve;
    bool diverged = false;
    std::string message;
};

/// Random horizontal flip (p = 0.5) plus a random translation of up to
/// 5% of each dimension with edge replication. Draw order per call is
/// fixed: flip, dy, dx.
inline Tensor augment(const Tensor& image, std::mt19937& rng) {
    const int C = image.dim(0), H = image.dim(1), W = image.dim(2);
    const int ty = H / 20, tx = W / 20;
    std::uniform_int_distribution<int> flip_d(0, 1);
    std::uniform_int_distribution<int> dy_d(-ty, ty);
    std::uniform_int_distribution<int> dx_d(-tx, tx);
    const bool flip = flip_d(rng) == 1;
    const int dy = dy_d(rng);
    const int dx = dx_d(rng);
    if (!flip && dy == 0 && dx == 0) return image;
    Tensor out(image.shape());
    for (int c = 0; c < C; ++c) {
        for (int y = 0; y < H; ++y) {
            const int sy = std::clamp(y - dy, 0, H - 1);
            for (int x = 0; x < W; ++x) {
                int sx = std::clamp(x - dx, 0, W - 1);
                if (flip) sx = W - 1 - sx;
                out.at(c, y, x) = image.at(c, sy, sx);
            }
        }
    }
    return out;
}

/// Batched accuracy over a labeled image set (inference mode).
inline double evaluate_accuracy(const TrainedCnn& net, const std::vector<Tensor>& images,
                                const std::vector<int>& labels, int batch_size = 32) {
    if (images.empty()) return 0.0;
    const int n = static_cast<int>(images.size());
    const int C = images[0].dim(0), H = images[0].dim(1), W = images[0].dim(2);
    int correct = 0;
    for (int start = 0; start < n; start += batch_size) {
        const int b = std::min(batch_size, n - start);
        Tensor batch({b, C, H, W});
        const std::size_t img_sz = images[0].size();
        for (int i = 0; i < b; ++i) {
            std::copy(images[static_cast<std::size_t>(start + i)].data(),
                      images[static_cast<std::size_t>(start + i)].data() + img_sz,
                      batch.data() + static_cast<std::size_t>(i) * img_sz);
        }
        Tensor logits = forward_infer(net, batch);
        for (int i = 0; i < b; ++i) {
            int arg = 0;
            for (int k = 1; k < logits.dim(1); ++k) {
                if (logits.at(i, k) > logits.at(i, arg)) arg = k;
            }
            if (arg == labels[static_cast<std::size_t>(start + i)]) ++correct;
        }
    }
    return static_cast<double>(correct) / n;
}

/// Shuffled mini-batch SGD for cfg.max_iterations, recording
/// (iteration, train loss, test accuracy) every cfg.eval_every iterations
/// and at the final one. No accuracy-related stopping criterion.
/// Deterministic for a fixed cfg.rng_seed (with augmentation on or off).
/// A non-finite loss aborts the run and restores the last recorded
/// checkpoint; the result carries diverged=true plus diagnostics.
inline TrainResult train(TrainedCnn& net, const std::vector<Tensor>& train_images,
                         const std::vector<int>& train_labels,
                         const std::vector<Tensor>& test_images,
                         const std::vector<int>& test_labels, const TrainConfig& cfg) {
    cfg.validate();
    TrainResult result;
    if (cfg.max_iterations == 0) return result;
    if (train_images.empty()) throw ValueError("train: empty training set");
    if (train_images.size() != train_labels.size()) {
        throw ShapeError("train: image/label count mismatch");
    }
    const int n = static_cast<int>(train_images.size());
    const int C = train_images[0].dim(0);
    const int H = train_images[0].dim(1), W = train_images[0].dim(2);
    if (H != net.hp.input_size || W != net.hp.input_size) {
        throw ShapeError("train: images are " + std::to_string(H) + "x" + std::to_string(W) +
                         " but the network expects " + std::to_string(net.hp.input_size));
    }
    const int batch = std::min(cfg.batch_size, n);

    std::mt19937 rng(static_cast<uint32_t>(cfg.rng_seed));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    int pos = n; // forces an initial shuffle

    std::vector<Tensor> checkpoint;
    auto snapshot = [&net, &checkpoint]() {
        checkpoint.clear();
        for (const auto& l : net.layers) {
            if (l.has_params()) {
                checkpoint.push_back(l.weights);
                checkpoint.push_back(l.bias);
            }
        }
    };
    auto restore = [&net, &checkpoint]() {
        std::size_t j = 0;
        for (auto& l : net.layers) {
            if (l.has_params()) {
                l.weights = checkpoint[j++];
                l.bias = checkpoint[j++];
            }
        }
    };
    snapshot();

    Tensor batch_input({batch, C, H, W});
    std::vector<int> batch_labels(static_cast<std::size_t>(batch));
    double window_loss = 0.0;
    int window_count = 0;

    for (int it = 1; it <= cfg.max_iterations; ++it) {
        if (pos + batch > n) {
            std::shuffle(order.begin(), order.end(), rng);
            pos = 0;
        }
        const std::size_t img_sz = train_images[0].size();
        for (int i = 0; i < batch; ++i) {
            const int idx = order[static_cast<std::size_t>(pos + i)];
            const Tensor& src = train_images[static_cast<std::size_t>(idx)];
            if (cfg.augment) {
                Tensor aug = augment(src, rng);
                std::copy(aug.data(), aug.data() + img_sz,
                          batch_input.data() + static_cast<std::size_t>(i) * img_sz);
            } else {
                std::copy(src.data(), src.data() + img_sz,
                          batch_input.data() + static_cast<std::size_t>(i) * img_sz);
            }
            batch_labels[static_cast<std::size_t>(i)] = train_labels[static_cast<std::size_t>(idx)];
        }
        pos += batch;

        Tensor logits = forward_train(net, batch_input, rng);
        auto sx = softmax_xent(logits, batch_labels);
        if (!std::isfinite(sx.loss)) {
            restore();
            result.diverged = true;
            result.message = "non-finite loss at iteration " + std::to_string(it) +
                             "; restored checkpoint from iteration " +
                             std::to_string(result.curve.empty() ? 0 : result.curve.back().iteration);
            return result;
        }
        GradientSet grads = backward(net, sx.grad_logits);
        apply_sgd(net, grads, net.hp.learning_rate);
        window_loss += sx.loss;
        ++window_count;

        if (it % cfg.eval_every == 0 || it == cfg.max_iterations) {
            CurvePoint p;
            p.iteration = it;
            p.train_loss = static_cast<float>(window_loss / window_count);
            p.test_accuracy =
                static_cast<float>(evaluate_accuracy(net, test_images, test_labels, batch));
            result.curve.push_back(p);
            window_loss = 0.0;
            window_count = 0;
            snapshot();
        }
    }

    net.meta.seed = cfg.rng_seed;
    net.meta.iterations += cfg.max_iterations;
    if (!result.curve.empty()) {
        net.meta.final_train_loss = result.curve.back().train_loss;
        net.meta.final_test_accuracy = result.curve.back().test_accuracy;
    }
    return result;
}

/// Learning-curve CSV: header `iteration,train_loss,test_accuracy`.
inline void write_curve_csv(const std::string& path, const LearningCurve& curve) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open " + path + " for writing");
    std::fprintf(f, "iteration,train_loss,test_accuracy\n");
    for (const auto& p : curve) {
        std::fprintf(f, "%d,%.6f,%.6f\n", p.iteration, p.train_loss, p.test_accuracy);
    }
    std::fclose(f);
}

} // namespace vtc
