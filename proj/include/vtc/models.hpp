#pragma once

// Save/load for the three model kinds, all sharing the VTK1 container:
// section "cnn" (topology metadata + layer tensors), "vocab" (k-means
// centroids) and "svm" (pairwise machines + embedded vocabulary and
// feature-extraction settings, so a single file suffices for inference).

#include <cinttypes>
#include <cstdio>
#include <string>
#include <vector>

#include "vtc/bow.hpp"
#include "vtc/container.hpp"
#include "vtc/kmeans.hpp"
#include "vtc/nn/network.hpp"
#include "vtc/sift.hpp"
#include "vtc/svm.hpp"

namespace vtc {

namespace detail {

inline std::string fmt_float(float v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
    return buf;
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_u64(uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%" PRIu64, v);
    return buf;
}

inline std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ",";
        out += names[i];
    }
    return out;
}

inline std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

inline int meta_int(const Container& c, const std::string& key) {
    return std::stoi(c.require_meta(key));
}
inline float meta_float(const Container& c, const std::string& key) {
    return std::stof(c.require_meta(key));
}
inline double meta_double(const Container& c, const std::string& key) {
    return std::stod(c.require_meta(key));
}
inline uint64_t meta_u64(const Container& c, const std::string& key) {
    return std::stoull(c.require_meta(key));
}

} // namespace detail

// ---------------------------------------------------------------- cnn

inline void save_cnn(const std::string& path, const TrainedCnn& net) {
    Container c;
    c.section = "cnn";
    c.meta = {
        {"n_conv_layers", std::to_string(net.hp.n_conv_layers)},
        {"n_dense_layers", std::to_string(net.hp.n_dense_layers)},
        {"input_size", std::to_string(net.hp.input_size)},
        {"kernel_size", std::to_string(net.hp.kernel_size)},
        {"n_maps", std::to_string(net.hp.n_maps)},
        {"learning_rate", detail::fmt_float(net.hp.learning_rate)},
        {"dropout_rate", detail::fmt_float(net.dropout_rate)},
        {"class_names", detail::join_names(net.class_names)},
        {"seed", detail::fmt_u64(net.meta.seed)},
        {"iterations", std::to_string(net.meta.iterations)},
        {"final_train_loss", detail::fmt_float(net.meta.final_train_loss)},
        {"final_test_accuracy", detail::fmt_float(net.meta.final_test_accuracy)},
    };
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerState& l = net.layers[i];
        if (!l.has_params()) continue;
        c.tensors.push_back({"layer" + std::to_string(i) + ".weights", l.weights.shape(),
                             l.weights.vec()});
        c.tensors.push_back({"layer" + std::to_string(i) + ".bias", l.bias.shape(),
                             l.bias.vec()});
    }
    write_container(path, c);
}

inline TrainedCnn load_cnn_from(const Container& c, const std::string& path) {
    HyperParams hp;
    hp.n_conv_layers = detail::meta_int(c, "n_conv_layers");
    hp.n_dense_layers = detail::meta_int(c, "n_dense_layers");
    hp.input_size = detail::meta_int(c, "input_size");
    hp.kernel_size = detail::meta_int(c, "kernel_size");
    hp.n_maps = detail::meta_int(c, "n_maps");
    hp.learning_rate = detail::meta_float(c, "learning_rate");
    BuildOptions opts;
    opts.dropout_rate = detail::meta_float(c, "dropout_rate");
    TrainedCnn net = detail::make_topology(hp, opts);
    net.class_names = detail::split_names(c.require_meta("class_names"));
    net.meta.seed = detail::meta_u64(c, "seed");
    net.meta.iterations = detail::meta_int(c, "iterations");
    net.meta.final_train_loss = detail::meta_float(c, "final_train_loss");
    net.meta.final_test_accuracy = detail::meta_float(c, "final_test_accuracy");
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        LayerState& l = net.layers[i];
        if (!l.has_params()) continue;
        const NamedTensor& w = c.require_tensor("layer" + std::to_string(i) + ".weights");
        const NamedTensor& b = c.require_tensor("layer" + std::to_string(i) + ".bias");
        if (w.shape != l.weights.shape() || b.shape != l.bias.shape()) {
            throw FormatError(path + ": layer " + std::to_string(i) +
                              " tensor shape does not match the declared topology");
        }
        l.weights = Tensor(w.shape, w.data);
        l.bias = Tensor(b.shape, b.data);
    }
    return net;
}

inline TrainedCnn load_cnn(const std::string& path) {
    Container c = read_container(path);
    if (c.section != "cnn") {
        throw FormatError(path + ": expected a cnn model, found section '" + c.section + "'");
    }
    return load_cnn_from(c, path);
}

// ---------------------------------------------------------------- vocab

inline void save_vocabulary(const std::string& path, const Vocabulary& vocab) {
    Container c;
    c.section = "vocab";
    c.meta = {
        {"dim", std::to_string(vocab.dim)},
        {"iterations", std::to_string(vocab.iterations)},
        {"inertia", detail::fmt_double(vocab.inertia)},
        {"seed", detail::fmt_u64(vocab.seed)},
    };
    c.tensors.push_back({"centroids", {vocab.k(), vocab.dim}, vocab.centroids});
    write_container(path, c);
}

inline Vocabulary load_vocabulary_from(const Container& c) {
    Vocabulary vocab;
    vocab.dim = detail::meta_int(c, "dim");
    vocab.iterations = detail::meta_int(c, "iterations");
    vocab.inertia = detail::meta_double(c, "inertia");
    vocab.seed = detail::meta_u64(c, "seed");
    vocab.centroids = c.require_tensor("centroids").data;
    return vocab;
}

inline Vocabulary load_vocabulary(const std::string& path) {
    Container c = read_container(path);
    if (c.section != "vocab") {
        throw FormatError(path + ": expected a vocabulary, found section '" + c.section + "'");
    }
    return load_vocabulary_from(c);
}

// ---------------------------------------------------------------- svm

/// Everything the shallow pipeline needs at inference time.
struct SvmModelBundle {
    MulticlassSvm svm;
    Vocabulary vocab;
    DenseSiftParams sift;
    int resize_to = 0; // 0 = keep native image size
};

inline void save_svm(const std::string& path, const SvmModelBundle& bundle) {
    Container c;
    c.section = "svm";
    std::string bins;
    for (std::size_t i = 0; i < bundle.sift.bin_sizes.size(); ++i) {
        if (i) bins += ",";
        bins += std::to_string(bundle.sift.bin_sizes[i]);
    }
    c.meta = {
        {"class_names", detail::join_names(bundle.svm.class_names)},
        {"n_classes", std::to_string(bundle.svm.n_classes)},
        {"feature_dim", std::to_string(bundle.svm.dim)},
        {"vote_rule", "one-vs-one-majority/v1"},
        {"resize_to", std::to_string(bundle.resize_to)},
        {"sift_stride", std::to_string(bundle.sift.stride)},
        {"sift_bin_sizes", bins},
        {"sift_clamp", detail::fmt_float(bundle.sift.clamp)},
        {"vocab_dim", std::to_string(bundle.vocab.dim)},
        {"vocab_iterations", std::to_string(bundle.vocab.iterations)},
        {"vocab_inertia", detail::fmt_double(bundle.vocab.inertia)},
        {"vocab_seed", detail::fmt_u64(bundle.vocab.seed)},
    };
    c.tensors.push_back({"vocab.centroids", {bundle.vocab.k(), bundle.vocab.dim},
                         bundle.vocab.centroids});
    for (std::size_t m = 0; m < bundle.svm.machines.size(); ++m) {
        const BinarySvm& svm = bundle.svm.machines[m];
        const std::string tag = "m" + std::to_string(m);
        c.meta.emplace_back(tag + ".pair", std::to_string(bundle.svm.pairs[m].first) + "," +
                                               std::to_string(bundle.svm.pairs[m].second));
        c.meta.emplace_back(tag + ".n_sv", std::to_string(svm.n_sv()));
        c.tensors.push_back({tag + ".scalars", {3}, {svm.bias, svm.gamma, svm.C}});
        if (svm.n_sv() > 0) {
            c.tensors.push_back({tag + ".sv", {svm.n_sv(), svm.dim}, svm.support_vectors});
            c.tensors.push_back({tag + ".coef", {svm.n_sv()}, svm.dual_coefs});
        }
    }
    write_container(path, c);
}

inline SvmModelBundle load_svm_from(const Container& c, const std::string& path) {
    SvmModelBundle bundle;
    bundle.svm.class_names = detail::split_names(c.require_meta("class_names"));
    bundle.svm.n_classes = detail::meta_int(c, "n_classes");
    bundle.svm.dim = detail::meta_int(c, "feature_dim");
    bundle.resize_to = detail::meta_int(c, "resize_to");
    bundle.sift.stride = detail::meta_int(c, "sift_stride");
    bundle.sift.clamp = detail::meta_float(c, "sift_clamp");
    bundle.sift.bin_sizes.clear();
    for (const std::string& tok : detail::split_names(c.require_meta("sift_bin_sizes"))) {
        bundle.sift.bin_sizes.push_back(std::stoi(tok));
    }
    bundle.vocab.dim = detail::meta_int(c, "vocab_dim");
    bundle.vocab.iterations = detail::meta_int(c, "vocab_iterations");
    bundle.vocab.inertia = detail::meta_double(c, "vocab_inertia");
    bundle.vocab.seed = detail::meta_u64(c, "vocab_seed");
    bundle.vocab.centroids = c.require_tensor("vocab.centroids").data;

    const int n_machines = bundle.svm.n_classes * (bundle.svm.n_classes - 1) / 2;
    for (int m = 0; m < n_machines; ++m) {
        const std::string tag = "m" + std::to_string(m);
        const auto pair_parts = detail::split_names(c.require_meta(tag + ".pair"));
        if (pair_parts.size() != 2) throw FormatError(path + ": malformed " + tag + ".pair");
        bundle.svm.pairs.emplace_back(std::stoi(pair_parts[0]), std::stoi(pair_parts[1]));
        BinarySvm svm;
        svm.dim = bundle.svm.dim;
        const NamedTensor& scalars = c.require_tensor(tag + ".scalars");
        if (scalars.data.size() != 3) throw FormatError(path + ": malformed " + tag + ".scalars");
        svm.bias = scalars.data[0];
        svm.gamma = scalars.data[1];
        svm.C = scalars.data[2];
        if (detail::meta_int(c, tag + ".n_sv") > 0) {
            svm.support_vectors = c.require_tensor(tag + ".sv").data;
            svm.dual_coefs = c.require_tensor(tag + ".coef").data;
        }
        bundle.svm.machines.push_back(std::move(svm));
    }
    return bundle;
}

inline SvmModelBundle load_svm(const std::string& path) {
    Container c = read_container(path);
    if (c.section != "svm") {
        throw FormatError(path + ": expected an svm model, found section '" + c.section + "'");
    }
    return load_svm_from(c, path);
}

} // namespace vtc
