// vtc: vehicle-type classification toolkit CLI.
//
// Subcommands wire the library end to end: synthetic data generation,
// stratified splitting, CNN and SIFT+SVM training, random hyperparameter
// search, evaluation with confusion reports, single-image prediction and
// feature-map export. All randomness flows from explicit --seed flags and
// outputs are files only, so identical invocations produce identical bytes.
//
// Exit codes: 0 ok, 2 usage, 3 I/O, 4 file format/schema, 5 bad value or
// shape, 6 state, 7 training diverged, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vtc/container.hpp"
#include "vtc/dataset.hpp"
#include "vtc/eval.hpp"
#include "vtc/image.hpp"
#include "vtc/models.hpp"
#include "vtc/nn/gradient_check.hpp"
#include "vtc/nn/train.hpp"
#include "vtc/pipeline.hpp"
#include "vtc/search.hpp"
#include "vtc/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitFormat = 4;
constexpr int kExitValue = 5;
constexpr int kExitState = 6;
constexpr int kExitDiverged = 7;

/// Warn-only advisory lock on an output directory.
class DirLock {
public:
    explicit DirLock(const std::string& dir) : path_(fs::path(dir) / ".vtc.lock") {
        std::error_code ec;
        if (fs::exists(path_, ec)) {
            std::fprintf(stderr,
                         "warning: %s exists; another invocation may be writing here\n",
                         path_.c_str());
            owned_ = false;
            return;
        }
        std::FILE* f = std::fopen(path_.c_str(), "wb");
        if (f) std::fclose(f);
    }
    ~DirLock() {
        if (owned_) {
            std::error_code ec;
            fs::remove(path_, ec);
        }
    }

private:
    fs::path path_;
    bool owned_ = true;
};

void require_file(const std::string& path, const char* what) {
    if (!fs::exists(path)) {
        throw vtc::IoError(std::string(what) + " not found: " + path);
    }
}

vtc::SearchSpace parse_space_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw vtc::IoError("cannot open space file " + path);
    vtc::SearchSpace space;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw vtc::FormatError(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        auto parse_ints = [&](std::vector<int>& out) {
            out.clear();
            std::size_t start = 0;
            while (start <= value.size()) {
                const std::size_t comma = value.find(',', start);
                const std::string tok = value.substr(
                    start, comma == std::string::npos ? std::string::npos : comma - start);
                if (!tok.empty()) out.push_back(std::stoi(tok));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            if (out.empty()) {
                throw vtc::FormatError(path + ":" + std::to_string(lineno) + ": empty list");
            }
        };
        if (key == "conv_layers") parse_ints(space.conv_layers);
        else if (key == "dense_layers") parse_ints(space.dense_layers);
        else if (key == "input_sizes") parse_ints(space.input_sizes);
        else if (key == "kernel_sizes") parse_ints(space.kernel_sizes);
        else if (key == "map_counts") parse_ints(space.map_counts);
        else if (key == "lr_lo") space.lr_lo = std::stod(value);
        else if (key == "lr_hi") space.lr_hi = std::stod(value);
        else {
            throw vtc::FormatError(path + ":" + std::to_string(lineno) + ": unknown key '" +
                                   key + "'");
        }
    }
    return space;
}

std::string probability_line(const std::string& label, const std::array<float, 4>& probs) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s %.6f %.6f %.6f %.6f", label.c_str(), probs[0], probs[1],
                  probs[2], probs[3]);
    return buf;
}

// ------------------------------------------------------------------ commands

struct GenerateArgs {
    std::string out;
    int per_class = 100;
    int size = 64;
    uint64_t seed = 0;
    float noise = 0.05f;
    float pos_jitter = 0.10f;
    float scale_jitter = 0.15f;
};

int cmd_generate(const GenerateArgs& a) {
    fs::create_directories(a.out);
    DirLock lock(a.out);
    vtc::SyntheticConfig cfg;
    cfg.n_per_class = a.per_class;
    cfg.image_size = a.size;
    cfg.seed = a.seed;
    cfg.noise_sigma = a.noise;
    cfg.position_jitter = a.pos_jitter;
    cfg.scale_jitter = a.scale_jitter;
    vtc::LabeledDataset ds = vtc::generate_synthetic(a.out, cfg);
    std::printf("generated %zu images (%d per class, %dx%d) under %s\n", ds.samples.size(),
                a.per_class, a.size, a.size, a.out.c_str());
    std::printf("manifest: %s\n", (fs::path(a.out) / "manifest.csv").c_str());
    return kExitOk;
}

struct SplitArgs {
    std::string manifest;
    double test_fraction = 0.10;
    uint64_t seed = 0;
    std::string out;
    std::string camera;
};

int cmd_split(const SplitArgs& a) {
    require_file(a.manifest, "manifest");
    fs::create_directories(a.out);
    DirLock lock(a.out);
    vtc::LabeledDataset ds = vtc::read_manifest(a.manifest).filter_camera(a.camera);
    auto [train, test] = vtc::stratified_split(ds, a.test_fraction, a.seed);
    vtc::write_manifest((fs::path(a.out) / "train.csv").string(), train);
    vtc::write_manifest((fs::path(a.out) / "test.csv").string(), test);
    std::printf("split %zu samples into %zu train / %zu test (fraction %.3f, seed %llu)\n",
                ds.samples.size(), train.samples.size(), test.samples.size(), a.test_fraction,
                static_cast<unsigned long long>(a.seed));
    return kExitOk;
}

struct TrainCnnArgs {
    std::string train_manifest, test_manifest;
    std::string out_model = "model.vtk";
    std::string curve_path;
    int iterations = 30000;
    int batch = 32;
    int eval_every = 500;
    uint64_t seed = 0;
    bool no_augment = false;
    float dropout = 0.5f;
    vtc::HyperParams hp;
};

int cmd_train_cnn(const TrainCnnArgs& a) {
    require_file(a.train_manifest, "train manifest");
    require_file(a.test_manifest, "test manifest");
    a.hp.validate();

    vtc::LabeledDataset train_ds = vtc::read_manifest(a.train_manifest);
    vtc::LabeledDataset test_ds = vtc::read_manifest(a.test_manifest);
    vtc::LoadedImages train = vtc::load_cnn_inputs(train_ds, a.hp.input_size);
    vtc::LoadedImages test = vtc::load_cnn_inputs(test_ds, a.hp.input_size);

    std::mt19937 rng(static_cast<uint32_t>(a.seed));
    vtc::BuildOptions opts;
    opts.dropout_rate = a.dropout;
    vtc::TrainedCnn net = vtc::build_network(a.hp, rng, opts);
    std::printf("network: %zu parameters, input %dx%d, %d conv / %d dense layers\n",
                vtc::count_parameters(a.hp), a.hp.input_size, a.hp.input_size,
                a.hp.n_conv_layers, a.hp.n_dense_layers);

    vtc::TrainConfig cfg;
    cfg.max_iterations = a.iterations;
    cfg.batch_size = a.batch;
    cfg.eval_every = a.eval_every;
    cfg.rng_seed = a.seed;
    cfg.augment = !a.no_augment;
    vtc::TrainResult result = vtc::train(net, train.images, train.labels, test.images,
                                         test.labels, cfg);
    for (const auto& p : result.curve) {
        std::printf("iter %6d  loss %.4f  test accuracy %.4f\n", p.iteration, p.train_loss,
                    p.test_accuracy);
    }
    if (!a.curve_path.empty()) vtc::write_curve_csv(a.curve_path, result.curve);
    vtc::save_cnn(a.out_model, net);
    if (result.diverged) {
        std::fprintf(stderr, "error[diverged]: %s\n", result.message.c_str());
        std::fprintf(stderr, "last-good checkpoint saved to %s\n", a.out_model.c_str());
        return kExitDiverged;
    }
    std::printf("model: %s\n", a.out_model.c_str());
    return kExitOk;
}

struct TrainSvmArgs {
    std::string train_manifest, test_manifest;
    std::string out_model = "model.vtk";
    std::string vocab_out;
    int vocab_size = 1000;
    std::size_t sample_cap = 200000;
    int kmeans_iter = 25;
    double C = 10.0;
    double gamma = -1.0;
    double tol = 1e-3;
    bool grid = false;
    uint64_t seed = 0;
    int size = 0;
};

int cmd_train_svm(const TrainSvmArgs& a) {
    require_file(a.train_manifest, "train manifest");
    if (!a.test_manifest.empty()) require_file(a.test_manifest, "test manifest");
    vtc::LabeledDataset train_ds = vtc::read_manifest(a.train_manifest);

    vtc::SvmTrainOptions opts;
    opts.vocab_size = a.vocab_size;
    opts.sample_cap = a.sample_cap;
    opts.kmeans_max_iter = a.kmeans_iter;
    opts.C = a.C;
    opts.gamma = a.gamma;
    opts.tol = a.tol;
    opts.grid = a.grid;
    opts.seed = a.seed;
    opts.resize_to = a.size;
    vtc::SvmTrainResult result = vtc::train_svm_pipeline(train_ds, opts);
    std::printf("vocabulary: %d words, inertia %.4f after %d iterations\n",
                result.bundle.vocab.k(), result.bundle.vocab.inertia,
                result.bundle.vocab.iterations);
    if (a.grid) {
        std::printf("grid pick: C=%g gamma=%g (inner validation accuracy %.4f)\n",
                    result.chosen_C, result.chosen_gamma, result.grid_val_accuracy);
    }
    vtc::save_svm(a.out_model, result.bundle);
    if (!a.vocab_out.empty()) vtc::save_vocabulary(a.vocab_out, result.bundle.vocab);
    std::printf("model: %s\n", a.out_model.c_str());
    if (!a.test_manifest.empty()) {
        vtc::LabeledDataset test_ds = vtc::read_manifest(a.test_manifest);
        vtc::EvalReport report = vtc::evaluate_svm(result.bundle, test_ds);
        std::printf("test accuracy: %.6f (%d samples)\n", report.accuracy, report.n);
    }
    return kExitOk;
}

struct SearchArgs {
    std::string train_manifest, test_manifest;
    std::string space = "default";
    std::string log = "trials.csv";
    int budget = 50;
    uint64_t seed = 0;
    int iterations = 300;
    int batch = 32;
    int eval_every = 100;
    int load_size = 64;
    bool no_augment = false;
};

int cmd_search(const SearchArgs& a) {
    require_file(a.train_manifest, "train manifest");
    require_file(a.test_manifest, "validation manifest");
    vtc::SearchSpace space;
    if (a.space != "default") {
        require_file(a.space, "space file");
        space = parse_space_file(a.space);
    }
    vtc::LabeledDataset train_ds = vtc::read_manifest(a.train_manifest);
    vtc::LabeledDataset val_ds = vtc::read_manifest(a.test_manifest);
    // images are cached at a common size and resized per trial as needed
    vtc::LoadedImages train = vtc::load_cnn_inputs(train_ds, a.load_size);
    vtc::LoadedImages val = vtc::load_cnn_inputs(val_ds, a.load_size);

    vtc::TrainConfig cfg;
    cfg.max_iterations = a.iterations;
    cfg.batch_size = a.batch;
    cfg.eval_every = a.eval_every;
    cfg.augment = !a.no_augment;
    vtc::SearchResult result = vtc::run_search(space, a.budget, train.images, train.labels,
                                               val.images, val.labels, cfg, a.seed, a.log);
    for (const auto& t : result.trials) {
        std::printf("trial %3d: conv=%d dense=%d input=%d kernel=%d maps=%d lr=%.3e -> %.4f%s\n",
                    t.trial, t.hp.n_conv_layers, t.hp.n_dense_layers, t.hp.input_size,
                    t.hp.kernel_size, t.hp.n_maps, static_cast<double>(t.hp.learning_rate),
                    t.validation_accuracy, t.failed ? " (failed)" : "");
    }
    const auto& b = result.best;
    std::printf("best: trial %d, accuracy %.4f, conv=%d dense=%d input=%d kernel=%d maps=%d "
                "lr=%.6e\n",
                b.trial, b.validation_accuracy, b.hp.n_conv_layers, b.hp.n_dense_layers,
                b.hp.input_size, b.hp.kernel_size, b.hp.n_maps,
                static_cast<double>(b.hp.learning_rate));
    std::printf("log: %s\n", a.log.c_str());
    return kExitOk;
}

struct EvalArgs {
    std::string model;
    std::string manifest;
    std::string report_dir = "report";
    std::string camera;
};

int cmd_eval(const EvalArgs& a) {
    require_file(a.model, "model");
    require_file(a.manifest, "manifest");
    fs::create_directories(a.report_dir);
    DirLock lock(a.report_dir);
    vtc::LabeledDataset ds = vtc::read_manifest(a.manifest).filter_camera(a.camera);
    vtc::Container c = vtc::read_container(a.model);
    vtc::EvalReport report;
    if (c.section == "cnn") {
        report = vtc::evaluate_cnn(vtc::load_cnn_from(c, a.model), ds);
    } else if (c.section == "svm") {
        report = vtc::evaluate_svm(vtc::load_svm_from(c, a.model), ds);
    } else {
        throw vtc::FormatError(a.model + ": section '" + c.section +
                               "' is not an evaluable model");
    }
    vtc::write_report_text((fs::path(a.report_dir) / "report.txt").string(), report);
    vtc::write_report_csv(a.report_dir, report);
    std::printf("accuracy: %.6f over %d samples; %zu misclassified\n", report.accuracy, report.n,
                report.misclassified.size());
    std::printf("report: %s\n", a.report_dir.c_str());
    return kExitOk;
}

struct PredictArgs {
    std::string model;
    std::string image;
};

int cmd_predict(const PredictArgs& a) {
    require_file(a.model, "model");
    require_file(a.image, "image");
    vtc::Container c = vtc::read_container(a.model);
    if (c.section == "cnn") {
        vtc::TrainedCnn net = vtc::load_cnn_from(c, a.model);
        vtc::Tensor img = vtc::load_cnn_input(a.image, net.hp.input_size);
        vtc::Prediction p = vtc::predict(net, img);
        std::printf("%s\n",
                    probability_line(net.class_names[static_cast<std::size_t>(p.class_index)],
                                     p.probabilities)
                        .c_str());
    } else if (c.section == "svm") {
        vtc::SvmModelBundle bundle = vtc::load_svm_from(c, a.model);
        vtc::Tensor gray = vtc::load_sift_input(a.image, bundle.resize_to);
        auto descriptors = vtc::dense_sift(gray, bundle.sift);
        if (descriptors.empty()) {
            std::fprintf(stderr, "warning: image too small for any descriptor window\n");
        }
        std::vector<float> bow =
            vtc::encode_bow(descriptors, bundle.vocab, gray.dim(2), gray.dim(1));
        vtc::MulticlassVote vote = vtc::classify_multiclass(bundle.svm, bow.data());
        std::array<float, 4> fractions{};
        for (int k = 0; k < 4; ++k) {
            fractions[static_cast<std::size_t>(k)] =
                static_cast<float>(vote.votes[static_cast<std::size_t>(k)] /
                                   static_cast<double>(bundle.svm.machines.size()));
        }
        std::printf("%s\n",
                    probability_line(
                        bundle.svm.class_names[static_cast<std::size_t>(vote.class_index)],
                        fractions)
                        .c_str());
    } else {
        throw vtc::FormatError(a.model + ": section '" + c.section + "' cannot predict");
    }
    return kExitOk;
}

struct DumpFeaturesArgs {
    std::string model;
    std::string image;
    int layer = 0;
    std::string out = "features";
};

int cmd_dump_features(const DumpFeaturesArgs& a) {
    require_file(a.model, "model");
    require_file(a.image, "image");
    vtc::TrainedCnn net = vtc::load_cnn(a.model);
    vtc::Tensor img = vtc::load_cnn_input(a.image, net.hp.input_size);
    std::vector<vtc::Tensor> maps = vtc::dump_feature_maps(net, img, a.layer);
    fs::create_directories(a.out);
    DirLock lock(a.out);
    for (std::size_t m = 0; m < maps.size(); ++m) {
        char name[32];
        std::snprintf(name, sizeof(name), "map_%03zu.pgm", m);
        vtc::encode_pgm((fs::path(a.out) / name).string(), maps[m]);
    }
    std::printf("wrote %zu maps of %dx%d to %s\n", maps.size(), maps[0].dim(1), maps[0].dim(2),
                a.out.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vehicle type classification toolkit (CNN and dense-SIFT/BoW/SVM pipelines)"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "render a synthetic 4-class dataset");
    generate->add_option("--out", gen.out, "output directory")->required();
    generate->add_option("--per-class", gen.per_class, "images per class");
    generate->add_option("--size", gen.size, "square image side in pixels");
    generate->add_option("--seed", gen.seed, "rng seed");
    generate->add_option("--noise", gen.noise, "additive gaussian noise sigma");
    generate->add_option("--pos-jitter", gen.pos_jitter, "horizontal position jitter fraction");
    generate->add_option("--scale-jitter", gen.scale_jitter, "scale jitter fraction");

    SplitArgs split;
    CLI::App* split_cmd = app.add_subcommand("split", "stratified train/test manifest split");
    split_cmd->add_option("--manifest", split.manifest, "input manifest csv")->required();
    split_cmd->add_option("--test-fraction", split.test_fraction, "test fraction (default 0.10)");
    split_cmd->add_option("--seed", split.seed, "rng seed");
    split_cmd->add_option("--out", split.out, "output directory for train.csv/test.csv")
        ->required();
    split_cmd->add_option("--camera", split.camera, "keep only this camera_id");

    TrainCnnArgs tc;
    CLI::App* train_cnn = app.add_subcommand("train-cnn", "train the convolutional network");
    train_cnn->set_config("--config", "", "read options from an ini file");
    train_cnn->add_option("--train", tc.train_manifest, "training manifest")->required();
    train_cnn->add_option("--test", tc.test_manifest, "test manifest")->required();
    train_cnn->add_option("--out", tc.out_model, "output model path");
    train_cnn->add_option("--curve", tc.curve_path, "learning-curve csv path");
    train_cnn->add_option("--iterations", tc.iterations, "mini-batch iterations");
    train_cnn->add_option("--batch", tc.batch, "batch size");
    train_cnn->add_option("--eval-every", tc.eval_every, "evaluation interval");
    train_cnn->add_option("--seed", tc.seed, "rng seed");
    train_cnn->add_flag("--no-augment", tc.no_augment, "disable data augmentation");
    train_cnn->add_option("--dropout", tc.dropout, "dropout rate (default 0.5)");
    train_cnn->add_option("--n-conv", tc.hp.n_conv_layers, "conv layers (1-4)");
    train_cnn->add_option("--n-dense", tc.hp.n_dense_layers, "dense layers (0-2)");
    train_cnn->add_option("--input-size", tc.hp.input_size, "input side (64|96|128|160)");
    train_cnn->add_option("--kernel", tc.hp.kernel_size, "kernel size (5|9|13|17)");
    train_cnn->add_option("--maps", tc.hp.n_maps, "conv maps (16|32|48)");
    train_cnn->add_option("--lr", tc.hp.learning_rate, "learning rate [1e-5,1e-1]");

    TrainSvmArgs ts;
    CLI::App* train_svm = app.add_subcommand("train-svm", "train the dense-SIFT/BoW/SVM pipeline");
    train_svm->add_option("--train", ts.train_manifest, "training manifest")->required();
    train_svm->add_option("--test", ts.test_manifest, "optional test manifest for a final score");
    train_svm->add_option("--out", ts.out_model, "output model path");
    train_svm->add_option("--vocab-out", ts.vocab_out, "also save the vocabulary separately");
    train_svm->add_option("--vocab-size", ts.vocab_size, "k-means vocabulary size");
    train_svm->add_option("--sample", ts.sample_cap, "descriptor sample cap for k-means");
    train_svm->add_option("--kmeans-iter", ts.kmeans_iter, "k-means max iterations");
    train_svm->add_option("--C", ts.C, "soft-margin C");
    train_svm->add_option("--gamma", ts.gamma, "RBF gamma (default 1/feature_dim)");
    train_svm->add_option("--tol", ts.tol, "SMO KKT tolerance");
    train_svm->add_flag("--grid", ts.grid, "select C/gamma on a held-out slice of train");
    train_svm->add_option("--seed", ts.seed, "rng seed");
    train_svm->add_option("--size", ts.size, "resize images to this side first (0 = native)");

    SearchArgs sa;
    CLI::App* search = app.add_subcommand("search", "random hyperparameter search");
    search->add_option("--train", sa.train_manifest, "training manifest")->required();
    search->add_option("--test", sa.test_manifest, "validation manifest")->required();
    search->add_option("--space", sa.space, "'default' or a key=value space file");
    search->add_option("--budget", sa.budget, "number of trials");
    search->add_option("--seed", sa.seed, "master seed");
    search->add_option("--log", sa.log, "trial log csv (supports resume)");
    search->add_option("--iterations", sa.iterations, "training iterations per trial");
    search->add_option("--batch", sa.batch, "batch size per trial");
    search->add_option("--eval-every", sa.eval_every, "evaluation interval per trial");
    search->add_flag("--no-augment", sa.no_augment, "disable data augmentation");

    EvalArgs ev;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a model against a manifest");
    eval_cmd->add_option("--model", ev.model, "model file (cnn or svm)")->required();
    eval_cmd->add_option("--manifest", ev.manifest, "labeled manifest")->required();
    eval_cmd->add_option("--report-dir", ev.report_dir, "report output directory");
    eval_cmd->add_option("--camera", ev.camera, "keep only this camera_id");

    PredictArgs pr;
    CLI::App* predict_cmd = app.add_subcommand("predict", "classify one image");
    predict_cmd->add_option("--model", pr.model, "model file (cnn or svm)")->required();
    predict_cmd->add_option("--image", pr.image, "PPM/PGM image")->required();

    DumpFeaturesArgs df;
    CLI::App* dump_cmd = app.add_subcommand("dump-features", "export conv feature maps as PGM");
    dump_cmd->add_option("--model", df.model, "cnn model file")->required();
    dump_cmd->add_option("--image", df.image, "PPM/PGM image")->required();
    dump_cmd->add_option("--layer", df.layer, "conv layer index (0-based)");
    dump_cmd->add_option("--out", df.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen);
        if (split_cmd->parsed()) return cmd_split(split);
        if (train_cnn->parsed()) return cmd_train_cnn(tc);
        if (train_svm->parsed()) return cmd_train_svm(ts);
        if (search->parsed()) return cmd_search(sa);
        if (eval_cmd->parsed()) return cmd_eval(ev);
        if (predict_cmd->parsed()) return cmd_predict(pr);
        if (dump_cmd->parsed()) return cmd_dump_features(df);
    } catch (const vtc::FormatError& e) {
        std::fprintf(stderr, "error[format]: %s\n", e.what());
        return kExitFormat;
    } catch (const vtc::VersionError& e) {
        std::fprintf(stderr, "error[version]: %s\n", e.what());
        return kExitFormat;
    } catch (const vtc::TruncatedError& e) {
        std::fprintf(stderr, "error[truncated]: %s\n", e.what());
        return kExitFormat;
    } catch (const vtc::ChecksumError& e) {
        std::fprintf(stderr, "error[checksum]: %s\n", e.what());
        return kExitFormat;
    } catch (const vtc::IoError& e) {
        std::fprintf(stderr, "error[io]: %s\n", e.what());
        return kExitIo;
    } catch (const vtc::ShapeError& e) {
        std::fprintf(stderr, "error[shape]: %s\n", e.what());
        return kExitValue;
    } catch (const vtc::ValueError& e) {
        std::fprintf(stderr, "error[value]: %s\n", e.what());
        return kExitValue;
    } catch (const vtc::StateError& e) {
        std::fprintf(stderr, "error[state]: %s\n", e.what());
        return kExitState;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitUsage;
}
