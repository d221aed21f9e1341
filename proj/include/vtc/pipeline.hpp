#pragma once

// End-to-end plumbing shared by the CLI and the acceptance suite: image
// loading/preprocessing for both pipelines, shallow-pipeline training
// (dense SIFT -> vocabulary -> spatial-pyramid BoW -> one-vs-one RBF SVM,
// optionally with a small C/gamma validation grid) and model evaluation.

#include <random>
#include <string>
#include <vector>

#include "vtc/bow.hpp"
#include "vtc/dataset.hpp"
#include "vtc/eval.hpp"
#include "vtc/image.hpp"
#include "vtc/kmeans.hpp"
#include "vtc/models.hpp"
#include "vtc/nn/network.hpp"
#include "vtc/nn/train.hpp"
#include "vtc/sift.hpp"
#include "vtc/svm.hpp"

namespace vtc {

/// decode -> resize (when resize_to > 0) -> brightness normalization.
inline Tensor load_cnn_input(const std::string& path, int resize_to) {
    Tensor img = decode_image(path);
    if (resize_to > 0) img = resize_bilinear(img, resize_to);
    return normalize_brightness(img);
}

struct LoadedImages {
    std::vector<Tensor> images;
    std::vector<int> labels;
};

inline LoadedImages load_cnn_inputs(const LabeledDataset& ds, int resize_to) {
    LoadedImages out;
    out.images.reserve(ds.samples.size());
    out.labels.reserve(ds.samples.size());
    for (const auto& s : ds.samples) {
        out.images.push_back(load_cnn_input(s.image_path, resize_to));
        out.labels.push_back(s.label);
    }
    return out;
}

// ---------------------------------------------------------------- shallow

/// decode -> optional resize -> brightness normalization -> grayscale.
inline Tensor load_sift_input(const std::string& path, int resize_to) {
    Tensor img = decode_image(path);
    if (resize_to > 0) img = resize_bilinear(img, resize_to);
    return to_grayscale(normalize_brightness(img));
}

struct SiftDataset {
    std::vector<std::vector<SiftDescriptor>> descriptors; // per image
    std::vector<int> labels;
    std::vector<int> widths; // per image (native sizes may differ)
    std::vector<int> heights;
};

inline SiftDataset extract_sift(const LabeledDataset& ds, int resize_to,
                                const DenseSiftParams& params) {
    SiftDataset out;
    out.descriptors.resize(ds.samples.size());
    out.labels.resize(ds.samples.size());
    out.widths.resize(ds.samples.size());
    out.heights.resize(ds.samples.size());
    std::exception_ptr failure;
    // per-image extraction is independent
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < static_cast<int>(ds.samples.size()); ++i) {
        try {
            const auto& s = ds.samples[static_cast<std::size_t>(i)];
            Tensor gray = load_sift_input(s.image_path, resize_to);
            out.descriptors[static_cast<std::size_t>(i)] = dense_sift(gray, params);
            out.labels[static_cast<std::size_t>(i)] = s.label;
            out.widths[static_cast<std::size_t>(i)] = gray.dim(2);
            out.heights[static_cast<std::size_t>(i)] = gray.dim(1);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

/// Uniform random sample of descriptors (capped) for vocabulary training.
inline std::vector<float> sample_descriptors(const SiftDataset& data, std::size_t cap,
                                             std::mt19937& rng) {
    std::vector<const SiftDescriptor*> all;
    for (const auto& per_image : data.descriptors) {
        for (const auto& d : per_image) all.push_back(&d);
    }
    if (all.size() > cap) {
        // seeded partial Fisher-Yates: the first `cap` entries are the sample
        for (std::size_t i = 0; i < cap; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
            std::swap(all[i], all[pick(rng)]);
        }
        all.resize(cap);
    }
    std::vector<float> flat;
    flat.reserve(all.size() * 128);
    for (const SiftDescriptor* d : all) flat.insert(flat.end(), d->v.begin(), d->v.end());
    return flat;
}

inline std::vector<float> encode_dataset(const SiftDataset& data, const Vocabulary& vocab) {
    const std::size_t dim =
        static_cast<std::size_t>(kPyramidCells) * static_cast<std::size_t>(vocab.k());
    std::vector<float> features(data.descriptors.size() * dim);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < static_cast<int>(data.descriptors.size()); ++i) {
        try {
            std::vector<float> bow =
                encode_bow(data.descriptors[static_cast<std::size_t>(i)], vocab,
                           data.widths[static_cast<std::size_t>(i)],
                           data.heights[static_cast<std::size_t>(i)]);
            std::copy(bow.begin(), bow.end(),
                      features.begin() + static_cast<std::ptrdiff_t>(i * dim));
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return features;
}

struct SvmTrainOptions {
    int vocab_size = 1000;
    std::size_t sample_cap = 200000; // descriptor sample for k-means
    int kmeans_max_iter = 25;
    double kmeans_tol = 1e-4;
    double C = 10.0;
    double gamma = -1.0; // <= 0: 1/feature_dim
    double tol = 1e-3;
    bool grid = false;   // select C/gamma on a held-out slice of train
    double grid_val_fraction = 0.10;
    uint64_t seed = 0;
    int resize_to = 0;
    DenseSiftParams sift;
};

struct SvmTrainResult {
    SvmModelBundle bundle;
    double chosen_C = 0.0;
    double chosen_gamma = 0.0;
    double grid_val_accuracy = -1.0; // -1 when the grid was not used
};

inline int svm_feature_dim(const Vocabulary& vocab) { return kPyramidCells * vocab.k(); }

inline std::vector<int> svm_predict_features(const MulticlassSvm& model,
                                             const std::vector<float>& features, int dim) {
    std::vector<int> out;
    const std::size_t n = features.size() / static_cast<std::size_t>(dim);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(classify_multiclass(model, features.data() + i * dim).class_index);
    }
    return out;
}

/// Full shallow-pipeline training on a labeled dataset.
inline SvmTrainResult train_svm_pipeline(const LabeledDataset& train_ds,
                                         const SvmTrainOptions& opts) {
    std::mt19937 rng(static_cast<uint32_t>(opts.seed));
    SiftDataset sift_data = extract_sift(train_ds, opts.resize_to, opts.sift);

    KmeansParams kp;
    kp.k = opts.vocab_size;
    kp.max_iter = opts.kmeans_max_iter;
    kp.tol = opts.kmeans_tol;
    std::vector<float> vocab_sample = sample_descriptors(sift_data, opts.sample_cap, rng);
    Vocabulary vocab = kmeans_fit(vocab_sample, 128, kp, rng);
    vocab.seed = opts.seed;

    const int dim = svm_feature_dim(vocab);
    std::vector<float> features = encode_dataset(sift_data, vocab);
    const std::vector<int>& labels = sift_data.labels;

    SmoParams smo;
    smo.C = opts.C;
    smo.gamma = opts.gamma > 0.0 ? opts.gamma : 1.0 / static_cast<double>(dim);
    smo.tol = opts.tol;

    SvmTrainResult result;
    if (opts.grid) {
        // split the training features into an inner train/validation pair
        const std::size_t n = labels.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const std::size_t n_val = std::max<std::size_t>(
            1, static_cast<std::size_t>(static_cast<double>(n) * opts.grid_val_fraction));
        std::vector<float> fit_x, val_x;
        std::vector<int> fit_y, val_y;
        for (std::size_t i = 0; i < n; ++i) {
            const float* row = features.data() + order[i] * static_cast<std::size_t>(dim);
            if (i < n_val) {
                val_x.insert(val_x.end(), row, row + dim);
                val_y.push_back(labels[order[i]]);
            } else {
                fit_x.insert(fit_x.end(), row, row + dim);
                fit_y.push_back(labels[order[i]]);
            }
        }
        const double base_gamma = 1.0 / static_cast<double>(dim);
        double best_acc = -1.0;
        for (double c : {1.0, 10.0, 100.0}) {
            for (double g : {0.1 * base_gamma, base_gamma, 10.0 * base_gamma}) {
                SmoParams cand = smo;
                cand.C = c;
                cand.gamma = g;
                std::mt19937 grid_rng(static_cast<uint32_t>(opts.seed) + 17);
                MulticlassSvm model = train_multiclass(fit_x, dim, fit_y, 4,
                                                       default_class_names(), cand, grid_rng);
                std::vector<int> pred = svm_predict_features(model, val_x, dim);
                int correct = 0;
                for (std::size_t i = 0; i < val_y.size(); ++i) {
                    if (pred[i] == val_y[i]) ++correct;
                }
                const double acc = static_cast<double>(correct) / static_cast<double>(val_y.size());
                if (acc > best_acc) {
                    best_acc = acc;
                    smo.C = c;
                    smo.gamma = g;
                }
            }
        }
        result.grid_val_accuracy = best_acc;
    }

    std::mt19937 final_rng(static_cast<uint32_t>(opts.seed) + 1);
    result.bundle.svm = train_multiclass(features, dim, labels, 4, default_class_names(), smo,
                                         final_rng);
    result.bundle.vocab = std::move(vocab);
    result.bundle.sift = opts.sift;
    result.bundle.resize_to = opts.resize_to;
    result.chosen_C = smo.C;
    result.chosen_gamma = smo.gamma;
    return result;
}

// ---------------------------------------------------------------- evaluation

/// Evaluates a CNN model over a dataset, collecting the misclassified list.
inline EvalReport evaluate_cnn(const TrainedCnn& net, const LabeledDataset& ds) {
    std::vector<int> truth, pred;
    EvalReport report;
    for (const auto& s : ds.samples) {
        Tensor img = load_cnn_input(s.image_path, net.hp.input_size);
        Prediction p = predict(net, img);
        truth.push_back(s.label);
        pred.push_back(p.class_index);
        if (p.class_index != s.label) {
            report.misclassified.push_back({s.image_path, s.label, p.class_index,
                                            p.probabilities});
        }
    }
    auto counted = compute_confusion(truth, pred);
    counted.misclassified = std::move(report.misclassified);
    return counted;
}

/// Evaluates an SVM bundle. The reported per-class scores are vote
/// fractions (votes / machines), not calibrated probabilities.
inline EvalReport evaluate_svm(const SvmModelBundle& bundle, const LabeledDataset& ds) {
    std::vector<int> truth, pred;
    std::vector<MisclassifiedSample> misses;
    for (const auto& s : ds.samples) {
        Tensor gray = load_sift_input(s.image_path, bundle.resize_to);
        std::vector<SiftDescriptor> descriptors = dense_sift(gray, bundle.sift);
        std::vector<float> bow = encode_bow(descriptors, bundle.vocab, gray.dim(2), gray.dim(1));
        MulticlassVote vote = classify_multiclass(bundle.svm, bow.data());
        truth.push_back(s.label);
        pred.push_back(vote.class_index);
        if (vote.class_index != s.label) {
            MisclassifiedSample m;
            m.path = s.image_path;
            m.true_label = s.label;
            m.predicted = vote.class_index;
            const double machines = static_cast<double>(bundle.svm.machines.size());
            for (int c = 0; c < 4; ++c) {
                m.probabilities[static_cast<std::size_t>(c)] =
                    static_cast<float>(vote.votes[static_cast<std::size_t>(c)] / machines);
            }
            misses.push_back(std::move(m));
        }
    }
    EvalReport report = compute_confusion(truth, pred);
    report.misclassified = std::move(misses);
    return report;
}

} // namespace vtc
