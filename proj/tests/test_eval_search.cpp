#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "support/temp_dir.hpp"
#include "support/tiny_net.hpp"
#include "vtc/eval.hpp"
#include "vtc/search.hpp"

using namespace vtc;
using testsupport::TempDir;

// ---------------------------------------------------------------- confusion

TEST(Confusion, AllCorrectIsDiagonal) {
    std::vector<int> truth{0, 1, 2, 3, 0, 1};
    EvalReport r = compute_confusion(truth, truth);
    EXPECT_EQ(r.accuracy, 1.0);
    for (int t = 0; t < 4; ++t)
        for (int p = 0; p < 4; ++p) {
            if (t != p) EXPECT_EQ(r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)], 0);
        }
    EXPECT_EQ(r.confusion[0][0], 2);
    EXPECT_EQ(r.confusion[1][1], 2);
}

TEST(Confusion, DirectCountExample) {
    // true = [bus, van], predicted = [van, van]
    EvalReport r = compute_confusion({0, 2}, {2, 2});
    EXPECT_EQ(r.accuracy, 0.5);
    EXPECT_EQ(r.confusion[0][2], 1);
    EXPECT_EQ(r.confusion[2][2], 1);
    // bus is never predicted: precision undefined, reported 0 with flag
    EXPECT_FALSE(r.precision_defined[0]);
    EXPECT_EQ(r.precision[0], 0.0);
    EXPECT_TRUE(r.recall_defined[0]);
    EXPECT_EQ(r.recall[0], 0.0);
    EXPECT_NEAR(r.precision[2], 0.5, 1e-12);
    EXPECT_EQ(r.recall[2], 1.0);
}

TEST(Confusion, RandomBalancedLabelsLandAtChanceLevel) {
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> cls(0, 3);
    std::vector<int> truth, pred;
    for (int i = 0; i < 10000; ++i) {
        truth.push_back(cls(rng));
        pred.push_back(cls(rng));
    }
    EvalReport r = compute_confusion(truth, pred);
    EXPECT_NEAR(r.accuracy, 0.25, 0.02);
}

TEST(Confusion, AccuracyEqualsTraceOverSum) {
    std::mt19937 rng(2);
    std::uniform_int_distribution<int> cls(0, 3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> truth, pred;
        const int n = 50 + trial * 13;
        for (int i = 0; i < n; ++i) {
            truth.push_back(cls(rng));
            pred.push_back(cls(rng));
        }
        EvalReport r = compute_confusion(truth, pred);
        int trace = 0, sum = 0;
        for (int t = 0; t < 4; ++t)
            for (int p = 0; p < 4; ++p) {
                sum += r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
                if (t == p) trace += r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
            }
        ASSERT_EQ(sum, r.n);
        ASSERT_EQ(r.accuracy, static_cast<double>(trace) / sum);
    }
}

TEST(Confusion, LengthMismatchRejected) {
    EXPECT_THROW(compute_confusion({0, 1}, {0}), ShapeError);
}

TEST(Confusion, ReportFilesAreWritten) {
    TempDir tmp("report");
    EvalReport r = compute_confusion({0, 1, 2, 3}, {0, 1, 2, 2});
    r.misclassified.push_back({"x.ppm", 3, 2, {0.1f, 0.2f, 0.4f, 0.3f}});
    write_report_text(tmp.str("report.txt"), r);
    write_report_csv(tmp.str(), r);

    std::ifstream txt(tmp.str("report.txt"));
    std::string all((std::istreambuf_iterator<char>(txt)), std::istreambuf_iterator<char>());
    EXPECT_NE(all.find("accuracy: 0.750000"), std::string::npos);
    EXPECT_NE(all.find("small_car"), std::string::npos);
    EXPECT_NE(all.find("x.ppm"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(tmp.str("summary.csv")));
    EXPECT_TRUE(std::filesystem::exists(tmp.str("confusion.csv")));
    EXPECT_TRUE(std::filesystem::exists(tmp.str("misclassified.csv")));
}

// ---------------------------------------------------------------- sampler

TEST(Sampler, AllDrawsInsideRanges) {
    SearchSpace space;
    std::mt19937 rng(3);
    for (int i = 0; i < 10000; ++i) {
        HyperParams hp = sample(space, rng);
        ASSERT_NO_THROW(hp.validate());
    }
}

TEST(Sampler, LogUniformQuartilesAndDiscreteUniformity) {
    SearchSpace space;
    std::mt19937 rng(4);
    const int n = 10000;
    int lr_first_quartile = 0;
    std::array<int, 4> kernel_counts{};
    for (int i = 0; i < n; ++i) {
        HyperParams hp = sample(space, rng);
        if (hp.learning_rate >= 1e-5f && hp.learning_rate <= 1e-4f) ++lr_first_quartile;
        for (int k = 0; k < 4; ++k) {
            if (hp.kernel_size == space.kernel_sizes[static_cast<std::size_t>(k)]) {
                ++kernel_counts[static_cast<std::size_t>(k)];
            }
        }
    }
    EXPECT_NEAR(lr_first_quartile / static_cast<double>(n), 0.25, 0.02);
    for (int k = 0; k < 4; ++k) {
        EXPECT_NEAR(kernel_counts[static_cast<std::size_t>(k)] / static_cast<double>(n), 0.25,
                    0.02);
    }
}

// ---------------------------------------------------------------- search

namespace {

SearchSpace tiny_space() {
    SearchSpace space;
    space.conv_layers = {1};
    space.dense_layers = {0};
    space.input_sizes = {64};
    space.kernel_sizes = {5};
    space.map_counts = {16};
    space.lr_lo = 1e-3;
    space.lr_hi = 1e-2;
    return space;
}

struct TinyData {
    std::vector<Tensor> train_images, val_images;
    std::vector<int> train_labels, val_labels;
};

TinyData tiny_data() {
    TinyData d;
    std::mt19937 rng(5);
    testsupport::quadrant_dataset(6, 64, rng, d.train_images, d.train_labels);
    testsupport::quadrant_dataset(2, 64, rng, d.val_images, d.val_labels);
    return d;
}

TrainConfig tiny_cfg() {
    TrainConfig cfg;
    cfg.max_iterations = 10;
    cfg.batch_size = 8;
    cfg.eval_every = 10;
    cfg.augment = false;
    return cfg;
}

} // namespace

TEST(RunSearch, BudgetOneBestIsOnlyTrial) {
    TinyData d = tiny_data();
    SearchResult r = run_search(tiny_space(), 1, d.train_images, d.train_labels, d.val_images,
                                d.val_labels, tiny_cfg(), 42);
    ASSERT_EQ(r.trials.size(), 1u);
    EXPECT_EQ(r.best.trial, 0);
    EXPECT_EQ(r.best.validation_accuracy, r.trials[0].validation_accuracy);
}

TEST(RunSearch, DeterministicForMasterSeed) {
    TinyData d = tiny_data();
    SearchResult a = run_search(tiny_space(), 2, d.train_images, d.train_labels, d.val_images,
                                d.val_labels, tiny_cfg(), 7);
    SearchResult b = run_search(tiny_space(), 2, d.train_images, d.train_labels, d.val_images,
                                d.val_labels, tiny_cfg(), 7);
    ASSERT_EQ(a.trials.size(), b.trials.size());
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
        EXPECT_EQ(a.trials[i].hp.learning_rate, b.trials[i].hp.learning_rate);
        EXPECT_EQ(a.trials[i].validation_accuracy, b.trials[i].validation_accuracy);
    }
    EXPECT_EQ(a.best.trial, b.best.trial);
}

TEST(RunSearch, BestIsArgmaxWithLowestIndexTie) {
    TinyData d = tiny_data();
    SearchResult r = run_search(tiny_space(), 3, d.train_images, d.train_labels, d.val_images,
                                d.val_labels, tiny_cfg(), 11);
    for (const TrialResult& t : r.trials) {
        EXPECT_GE(r.best.validation_accuracy, t.validation_accuracy);
    }
    for (const TrialResult& t : r.trials) {
        if (t.validation_accuracy == r.best.validation_accuracy) {
            EXPECT_EQ(r.best.trial, t.trial); // first max wins
            break;
        }
    }
}

TEST(RunSearch, LogSupportsResume) {
    TempDir tmp("resume");
    const std::string log = tmp.str("trials.csv");
    TinyData d = tiny_data();
    SearchResult first = run_search(tiny_space(), 2, d.train_images, d.train_labels,
                                    d.val_images, d.val_labels, tiny_cfg(), 3, log);
    SearchResult second = run_search(tiny_space(), 4, d.train_images, d.train_labels,
                                     d.val_images, d.val_labels, tiny_cfg(), 3, log);
    ASSERT_EQ(second.trials.size(), 4u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_NEAR(second.trials[i].validation_accuracy, first.trials[i].validation_accuracy,
                    1e-6);
    }
    std::ifstream in(log);
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 5); // header + 4 rows
}

TEST(RunSearch, DivergedTrialScoresZeroAndSearchContinues) {
    TinyData d = tiny_data();
    // saturate the inputs so the first forward pass overflows
    for (auto& img : d.train_images) {
        for (std::size_t i = 0; i < img.size(); ++i) img[i] = 1e30f;
    }
    SearchResult r = run_search(tiny_space(), 2, d.train_images, d.train_labels, d.val_images,
                                d.val_labels, tiny_cfg(), 21);
    ASSERT_EQ(r.trials.size(), 2u);
    for (const TrialResult& t : r.trials) {
        EXPECT_TRUE(t.failed);
        EXPECT_EQ(t.validation_accuracy, 0.0);
    }
}
