#pragma once

// Spatial-pyramid bag of visual words: a shared vocabulary, one global
// (1x1) histogram plus four 2x2 quadrant histograms, each L1-normalized
// independently, concatenated global-first then quadrants row-major.
// Output length is 5 * k (5000 for the reference 1000-word vocabulary).

#include <vector>

#include "vtc/errors.hpp"
#include "vtc/kmeans.hpp"
#include "vtc/sift.hpp"

namespace vtc {

constexpr int kPyramidCells = 5; // 1x1 + 2x2

/// Encodes descriptors against a vocabulary. Each descriptor counts once in
/// the global cell and once in the quadrant containing its center (boundary
/// centers go to the lower-index cell). Cells without descriptors stay all
/// zero. An empty descriptor list yields the all-zero vector.
inline std::vector<float> encode_bow(const std::vector<SiftDescriptor>& descriptors,
                                     const Vocabulary& vocab, int image_w, int image_h) {
    if (vocab.k() < 1) throw ValueError("encode_bow: vocabulary is empty");
    if (vocab.dim != 128) {
        throw ShapeError("encode_bow: vocabulary dim " + std::to_string(vocab.dim) +
                         " != descriptor dim 128");
    }
    const int k = vocab.k();
    std::vector<double> counts(static_cast<std::size_t>(kPyramidCells) * k, 0.0);
    for (const SiftDescriptor& d : descriptors) {
        const int word = nearest_centroid(vocab, d.v.data());
        const int qx = d.x <= 0.5f * static_cast<float>(image_w) ? 0 : 1;
        const int qy = d.y <= 0.5f * static_cast<float>(image_h) ? 0 : 1;
        const int cell = 1 + qy * 2 + qx;
        counts[static_cast<std::size_t>(word)] += 1.0;
        counts[static_cast<std::size_t>(cell) * k + word] += 1.0;
    }
    std::vector<float> out(static_cast<std::size_t>(kPyramidCells) * k, 0.0f);
    for (int cell = 0; cell < kPyramidCells; ++cell) {
        double total = 0.0;
        for (int w = 0; w < k; ++w) total += counts[static_cast<std::size_t>(cell) * k + w];
        if (total <= 0.0) continue;
        for (int w = 0; w < k; ++w) {
            out[static_cast<std::size_t>(cell) * k + w] =
                static_cast<float>(counts[static_cast<std::size_t>(cell) * k + w] / total);
        }
    }
    return out;
}

} // namespace vtc
