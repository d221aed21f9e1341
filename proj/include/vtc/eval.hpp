#pragma once

// Confusion-matrix evaluation: counts, accuracy, per-class precision and
// recall (0/0 reported as 0 and flagged undefined), misclassified sample
// list, plus text/CSV report writers.

#include <array>
#include <cstdio>
#include <string>
#include <vector>

#include "vtc/dataset.hpp"
#include "vtc/errors.hpp"

namespace vtc {

struct MisclassifiedSample {
    std::string path;
    int true_label = 0;
    int predicted = 0;
    std::array<float, 4> probabilities{};
};

struct EvalReport {
    int n = 0;
    std::array<std::array<int, 4>, 4> confusion{}; // [true][predicted]
    double accuracy = 0.0;
    std::array<double, 4> precision{};
    std::array<double, 4> recall{};
    std::array<bool, 4> precision_defined{};
    std::array<bool, 4> recall_defined{};
    std::vector<MisclassifiedSample> misclassified;
};

inline EvalReport compute_confusion(const std::vector<int>& truth,
                                    const std::vector<int>& predicted) {
    if (truth.size() != predicted.size()) {
        throw ShapeError("compute_confusion: " + std::to_string(truth.size()) + " truths vs " +
                         std::to_string(predicted.size()) + " predictions");
    }
    EvalReport r;
    r.n = static_cast<int>(truth.size());
    int correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i], p = predicted[i];
        if (t < 0 || t >= 4 || p < 0 || p >= 4) {
            throw ValueError("compute_confusion: label out of range at index " +
                             std::to_string(i));
        }
        ++r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
        if (t == p) ++correct;
    }
    r.accuracy = r.n > 0 ? static_cast<double>(correct) / r.n : 0.0;
    for (int c = 0; c < 4; ++c) {
        int col = 0, row = 0;
        for (int o = 0; o < 4; ++o) {
            col += r.confusion[static_cast<std::size_t>(o)][static_cast<std::size_t>(c)];
            row += r.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(o)];
        }
        const int tp = r.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        r.precision_defined[static_cast<std::size_t>(c)] = col > 0;
        r.recall_defined[static_cast<std::size_t>(c)] = row > 0;
        r.precision[static_cast<std::size_t>(c)] = col > 0 ? static_cast<double>(tp) / col : 0.0;
        r.recall[static_cast<std::size_t>(c)] = row > 0 ? static_cast<double>(tp) / row : 0.0;
    }
    return r;
}

/// Human-readable report.
inline void write_report_text(const std::string& path, const EvalReport& r) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open " + path + " for writing");
    std::fprintf(f, "samples:  %d\n", r.n);
    std::fprintf(f, "accuracy: %.6f\n\n", r.accuracy);
    std::fprintf(f, "confusion matrix (rows = true, cols = predicted)\n%12s", "");
    for (int c = 0; c < 4; ++c) std::fprintf(f, "%12s", kClassNames[static_cast<std::size_t>(c)]);
    std::fprintf(f, "\n");
    for (int t = 0; t < 4; ++t) {
        std::fprintf(f, "%12s", kClassNames[static_cast<std::size_t>(t)]);
        for (int p = 0; p < 4; ++p) {
            std::fprintf(f, "%12d", r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]);
        }
        std::fprintf(f, "\n");
    }
    std::fprintf(f, "\n%12s  precision     recall\n", "");
    for (int c = 0; c < 4; ++c) {
        std::fprintf(f, "%12s   %8.6f%s  %8.6f%s\n", kClassNames[static_cast<std::size_t>(c)],
                     r.precision[static_cast<std::size_t>(c)],
                     r.precision_defined[static_cast<std::size_t>(c)] ? " " : "*",
                     r.recall[static_cast<std::size_t>(c)],
                     r.recall_defined[static_cast<std::size_t>(c)] ? " " : "*");
    }
    std::fprintf(f, "(* = undefined 0/0, reported as 0)\n");
    if (!r.misclassified.empty()) {
        std::fprintf(f, "\nmisclassified (%zu):\n", r.misclassified.size());
        for (const auto& m : r.misclassified) {
            std::fprintf(f, "  %s  true=%s predicted=%s  probs=[%.6f %.6f %.6f %.6f]\n",
                         m.path.c_str(), kClassNames[static_cast<std::size_t>(m.true_label)],
                         kClassNames[static_cast<std::size_t>(m.predicted)], m.probabilities[0],
                         m.probabilities[1], m.probabilities[2], m.probabilities[3]);
        }
    }
    std::fclose(f);
}

/// Machine-readable CSVs: summary + confusion + misclassified gallery.
inline void write_report_csv(const std::string& dir, const EvalReport& r) {
    {
        std::FILE* f = std::fopen((dir + "/summary.csv").c_str(), "wb");
        if (!f) throw IoError("cannot open " + dir + "/summary.csv for writing");
        std::fprintf(f, "metric,class,value\n");
        std::fprintf(f, "samples,,%d\n", r.n);
        std::fprintf(f, "accuracy,,%.6f\n", r.accuracy);
        for (int c = 0; c < 4; ++c) {
            std::fprintf(f, "precision,%s,%.6f\n", kClassNames[static_cast<std::size_t>(c)],
                         r.precision[static_cast<std::size_t>(c)]);
            std::fprintf(f, "recall,%s,%.6f\n", kClassNames[static_cast<std::size_t>(c)],
                         r.recall[static_cast<std::size_t>(c)]);
        }
        std::fclose(f);
    }
    {
        std::FILE* f = std::fopen((dir + "/confusion.csv").c_str(), "wb");
        if (!f) throw IoError("cannot open " + dir + "/confusion.csv for writing");
        std::fprintf(f, "true\\predicted,bus,truck,van,small_car\n");
        for (int t = 0; t < 4; ++t) {
            std::fprintf(f, "%s", kClassNames[static_cast<std::size_t>(t)]);
            for (int p = 0; p < 4; ++p) {
                std::fprintf(f, ",%d",
                             r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]);
            }
            std::fprintf(f, "\n");
        }
        std::fclose(f);
    }
    {
        std::FILE* f = std::fopen((dir + "/misclassified.csv").c_str(), "wb");
        if (!f) throw IoError("cannot open " + dir + "/misclassified.csv for writing");
        std::fprintf(f, "path,true,predicted,p_bus,p_truck,p_van,p_small_car\n");
        for (const auto& m : r.misclassified) {
            std::fprintf(f, "%s,%s,%s,%.6f,%.6f,%.6f,%.6f\n", m.path.c_str(),
                         kClassNames[static_cast<std::size_t>(m.true_label)],
                         kClassNames[static_cast<std::size_t>(m.predicted)], m.probabilities[0],
                         m.probabilities[1], m.probabilities[2], m.probabilities[3]);
        }
        std::fclose(f);
    }
}

} // namespace vtc
