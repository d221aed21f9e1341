#pragma once

// Random hyperparameter search over the discrete topology dimensions and a
// log-uniform learning rate, selecting the best configuration by validation
// accuracy. Trials derive their seeds from (master seed + trial index) and
// results append to a CSV log that doubles as a crash-safe resume journal.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "vtc/image.hpp"
#include "vtc/nn/network.hpp"
#include "vtc/nn/train.hpp"

namespace vtc {

struct SearchSpace {
    std::vector<int> conv_layers{1, 2, 3, 4};
    std::vector<int> dense_layers{0, 1, 2};
    std::vector<int> input_sizes{64, 96, 128, 160};
    std::vector<int> kernel_sizes{5, 9, 13, 17};
    std::vector<int> map_counts{16, 32, 48};
    double lr_lo = 1e-5;
    double lr_hi = 1e-1;

    void validate() const {
        if (conv_layers.empty() || dense_layers.empty() || input_sizes.empty() ||
            kernel_sizes.empty() || map_counts.empty()) {
            throw ValueError("search space: empty dimension");
        }
        if (!(lr_lo > 0.0 && lr_lo < lr_hi)) {
            throw ValueError("search space: learning-rate bounds must satisfy 0 < lo < hi");
        }
    }
};

struct TrialResult {
    int trial = 0;
    HyperParams hp;
    double validation_accuracy = 0.0;
    double seconds = 0.0;
    uint64_t seed = 0;
    bool failed = false;
};

/// One draw: discrete dimensions uniform, learning rate log-uniform
/// (lr = 10^u with u ~ Uniform(log10 lo, log10 hi)).
inline HyperParams sample(const SearchSpace& space, std::mt19937& rng) {
    space.validate();
    auto pick = [&rng](const std::vector<int>& values) {
        std::uniform_int_distribution<std::size_t> d(0, values.size() - 1);
        return values[d(rng)];
    };
    HyperParams hp;
    hp.n_conv_layers = pick(space.conv_layers);
    hp.n_dense_layers = pick(space.dense_layers);
    hp.input_size = pick(space.input_sizes);
    hp.kernel_size = pick(space.kernel_sizes);
    hp.n_maps = pick(space.map_counts);
    std::uniform_real_distribution<double> u(std::log10(space.lr_lo), std::log10(space.lr_hi));
    hp.learning_rate = static_cast<float>(std::pow(10.0, u(rng)));
    return hp;
}

inline constexpr const char* kTrialCsvHeader =
    "trial,n_conv,n_dense,input_size,kernel,maps,lr,val_accuracy,seconds";

inline void append_trial_csv(const std::string& path, const TrialResult& t, bool write_header) {
    std::FILE* f = std::fopen(path.c_str(), write_header ? "wb" : "ab");
    if (!f) throw IoError("cannot open trial log " + path);
    if (write_header) std::fprintf(f, "%s\n", kTrialCsvHeader);
    std::fprintf(f, "%d,%d,%d,%d,%d,%d,%.9g,%.6f,%.3f\n", t.trial, t.hp.n_conv_layers,
                 t.hp.n_dense_layers, t.hp.input_size, t.hp.kernel_size, t.hp.n_maps,
                 static_cast<double>(t.hp.learning_rate), t.validation_accuracy, t.seconds);
    std::fclose(f);
}

/// Parses a trial log written by append_trial_csv; used for resume.
inline std::vector<TrialResult> read_trial_csv(const std::string& path) {
    std::ifstream in(path);
    std::vector<TrialResult> out;
    if (!in) return out;
    std::string line;
    if (!std::getline(in, line)) return out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TrialResult t;
        double lr = 0.0;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%d,%d,%lf,%lf,%lf", &t.trial,
                        &t.hp.n_conv_layers, &t.hp.n_dense_layers, &t.hp.input_size,
                        &t.hp.kernel_size, &t.hp.n_maps, &lr, &t.validation_accuracy,
                        &t.seconds) != 9) {
            throw FormatError(path + ": malformed trial row '" + line + "'");
        }
        t.hp.learning_rate = static_cast<float>(lr);
        out.push_back(t);
    }
    return out;
}

struct SearchResult {
    TrialResult best;
    std::vector<TrialResult> trials;
};

/// Runs `budget` independent trials. Trial t samples its configuration and
/// trains with seeds derived from master_seed + t, evaluating on the
/// validation set. A trial whose training diverges scores accuracy 0 and
/// the search continues. When log_path is non-empty, completed trials are
/// appended after each trial and already-logged trials are skipped on
/// restart (their training is not repeated). The best trial is the accuracy
/// argmax, ties to the lowest trial index.
inline SearchResult run_search(const SearchSpace& space, int budget,
                               const std::vector<Tensor>& train_images,
                               const std::vector<int>& train_labels,
                               const std::vector<Tensor>& val_images,
                               const std::vector<int>& val_labels, const TrainConfig& base_cfg,
                               uint64_t master_seed, const std::string& log_path = "") {
    space.validate();
    if (budget < 1) throw ValueError("run_search: budget must be >= 1");

    std::vector<TrialResult> done;
    if (!log_path.empty()) done = read_trial_csv(log_path);

    SearchResult result;
    for (int t = 0; t < budget; ++t) {
        TrialResult trial;
        const uint64_t trial_seed = master_seed + static_cast<uint64_t>(t);
        std::mt19937 rng(static_cast<uint32_t>(trial_seed));
        trial.trial = t;
        trial.seed = trial_seed;
        trial.hp = sample(space, rng); // drawn even when resuming, to keep the stream aligned

        if (static_cast<std::size_t>(t) < done.size()) {
            result.trials.push_back(done[static_cast<std::size_t>(t)]);
            continue;
        }

        const auto t0 = std::chrono::steady_clock::now();
        try {
            TrainedCnn net = build_network(trial.hp, rng);
            // resize cached images to this trial's input size if needed
            auto fit = [&](const std::vector<Tensor>& images) {
                if (images.empty() || images[0].dim(1) == trial.hp.input_size) {
                    return images;
                }
                std::vector<Tensor> out;
                out.reserve(images.size());
                for (const Tensor& img : images) out.push_back(resize_bilinear(img, trial.hp.input_size));
                return out;
            };
            const std::vector<Tensor> tr = fit(train_images);
            const std::vector<Tensor> va = fit(val_images);
            TrainConfig cfg = base_cfg;
            cfg.rng_seed = trial_seed;
            TrainResult tr_result = train(net, tr, train_labels, va, val_labels, cfg);
            if (tr_result.diverged) {
                trial.failed = true;
                trial.validation_accuracy = 0.0;
            } else {
                trial.validation_accuracy = evaluate_accuracy(net, va, val_labels, cfg.batch_size);
            }
        } catch (const Error&) {
            trial.failed = true;
            trial.validation_accuracy = 0.0;
        }
        trial.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.trials.push_back(trial);
        if (!log_path.empty()) append_trial_csv(log_path, trial, t == 0);
    }

    result.best = result.trials.front();
    for (const TrialResult& t : result.trials) {
        if (t.validation_accuracy > result.best.validation_accuracy) result.best = t;
    }
    return result;
}

} // namespace vtc
