#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "vtc/errors.hpp"

namespace vtc {

inline constexpr std::array<const char*, 4> kClassNames{"bus", "truck", "van", "small_car"};

/// Parses a class label. The alias "normal_vehicle" is accepted for
/// small_car on read and normalized on write.
inline int parse_label(const std::string& s) {
    for (int i = 0; i < 4; ++i) {
        if (s == kClassNames[static_cast<std::size_t>(i)]) return i;
    }
    if (s == "normal_vehicle") return 3;
    throw FormatError("unknown class label '" + s +
                      "' (expected bus|truck|van|small_car)");
}

struct LabeledSample {
    std::string image_path;
    int label = 0;          // index into kClassNames
    std::string camera_id;  // optional tag, may be empty
};

struct LabeledDataset {
    std::vector<LabeledSample> samples;

    std::array<int, 4> class_counts() const {
        std::array<int, 4> counts{};
        for (const auto& s : samples) ++counts[static_cast<std::size_t>(s.label)];
        return counts;
    }

    /// Samples whose camera_id matches (empty filter keeps everything).
    LabeledDataset filter_camera(const std::string& camera_id) const {
        if (camera_id.empty()) return *this;
        LabeledDataset out;
        for (const auto& s : samples) {
            if (s.camera_id == camera_id) out.samples.push_back(s);
        }
        return out;
    }
};

/// Reads a `path,label,camera_id` manifest. Relative image paths are
/// resolved against the manifest's directory.
inline LabeledDataset read_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest " + manifest_path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError(manifest_path + ": empty manifest");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "path,label,camera_id") {
        throw FormatError(manifest_path + ": bad manifest header '" + line +
                          "' (expected path,label,camera_id)");
    }
    const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
    LabeledDataset ds;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw FormatError(manifest_path + ":" + std::to_string(lineno) +
                              ": expected 3 comma-separated fields");
        }
        LabeledSample s;
        std::filesystem::path p(line.substr(0, c1));
        s.image_path = p.is_absolute() ? p.string() : (base / p).string();
        s.label = parse_label(line.substr(c1 + 1, c2 - c1 - 1));
        s.camera_id = line.substr(c2 + 1);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

/// Writes a manifest with normalized labels. Relative paths are absolutized
/// so the manifest stays valid wherever it is written.
inline void write_manifest(const std::string& path, const LabeledDataset& ds,
                           bool absolutize = true) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open " + path + " for writing");
    std::fprintf(f, "path,label,camera_id\n");
    for (const auto& s : ds.samples) {
        std::filesystem::path p(s.image_path);
        const std::string out =
            absolutize && !p.is_absolute()
                ? std::filesystem::absolute(p).lexically_normal().string()
                : s.image_path;
        std::fprintf(f, "%s,%s,%s\n", out.c_str(),
                     kClassNames[static_cast<std::size_t>(s.label)], s.camera_id.c_str());
    }
    std::fclose(f);
}

/// Deterministic stratified split: per class, round(count * test_fraction)
/// samples go to the test set, chosen by a seeded shuffle. The two parts
/// are disjoint and exhaustive.
inline std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& ds,
                                                                  double test_fraction,
                                                                  uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ValueError("stratified_split: test_fraction " + std::to_string(test_fraction) +
                         " must be in (0,1)");
    }
    std::array<std::vector<std::size_t>, 4> by_class;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        by_class[static_cast<std::size_t>(ds.samples[i].label)].push_back(i);
    }
    for (int c = 0; c < 4; ++c) {
        const auto& idx = by_class[static_cast<std::size_t>(c)];
        if (!idx.empty() && static_cast<double>(idx.size()) * test_fraction < 1.0) {
            throw ValueError(std::string("stratified_split: class '") +
                             kClassNames[static_cast<std::size_t>(c)] + "' has only " +
                             std::to_string(idx.size()) +
                             " samples, too few for test fraction " +
                             std::to_string(test_fraction));
        }
    }
    std::mt19937 rng(static_cast<uint32_t>(seed));
    LabeledDataset train, test;
    for (int c = 0; c < 4; ++c) {
        auto idx = by_class[static_cast<std::size_t>(c)];
        std::shuffle(idx.begin(), idx.end(), rng);
        const std::size_t n_test =
            static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * test_fraction));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            (i < n_test ? test : train).samples.push_back(ds.samples[idx[i]]);
        }
    }
    return {std::move(train), std::move(test)};
}

} // namespace vtc
