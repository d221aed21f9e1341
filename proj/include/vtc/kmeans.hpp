#pragma once

// K-means over descriptor vectors: k-means++ seeding, Lloyd iterations with
// double-precision centroid/inertia accumulation, empty-cluster reseeding to
// the point farthest from its assigned centroid. Inertia is non-increasing
// across iterations.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "vtc/errors.hpp"

namespace vtc {

struct Vocabulary {
    int dim = 0;
    std::vector<float> centroids; // k x dim, row-major
    int iterations = 0;
    double inertia = 0.0;
    uint64_t seed = 0;

    int k() const { return dim == 0 ? 0 : static_cast<int>(centroids.size()) / dim; }
    const float* centroid(int i) const { return centroids.data() + static_cast<std::size_t>(i) * dim; }
};

struct KmeansParams {
    int k = 1000;
    int max_iter = 100;
    double tol = 1e-4; // stop when max centroid movement (L2) falls below
};

/// Nearest centroid by squared Euclidean distance, ties to the lowest index.
inline int nearest_centroid(const Vocabulary& vocab, const float* x) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < vocab.k(); ++c) {
        const float* ctr = vocab.centroid(c);
        double d = 0.0;
        for (int j = 0; j < vocab.dim; ++j) {
            const double diff = static_cast<double>(x[j]) - ctr[j];
            d += diff * diff;
        }
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

namespace detail {

/// Number of distinct rows, stopping early once `enough` are found.
inline std::size_t count_distinct_rows(const std::vector<float>& pts, int dim,
                                       std::size_t enough) {
    const std::size_t n = pts.size() / static_cast<std::size_t>(dim);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto row = [&](std::size_t i) { return pts.data() + i * static_cast<std::size_t>(dim); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const float* ra = row(a);
        const float* rb = row(b);
        for (int j = 0; j < dim; ++j) {
            if (ra[j] != rb[j]) return ra[j] < rb[j];
        }
        return false;
    });
    std::size_t distinct = n > 0 ? 1 : 0;
    for (std::size_t i = 1; i < n && distinct < enough; ++i) {
        const float* ra = row(order[i - 1]);
        const float* rb = row(order[i]);
        for (int j = 0; j < dim; ++j) {
            if (ra[j] != rb[j]) {
                ++distinct;
                break;
            }
        }
    }
    return distinct;
}

} // namespace detail

/// Fits k centroids to row-major points (n x dim). Requires at least k
/// distinct points. When `inertia_trace` is given, it receives the inertia
/// measured at each assignment step.
inline Vocabulary kmeans_fit(const std::vector<float>& points, int dim, const KmeansParams& params,
                             std::mt19937& rng, std::vector<double>* inertia_trace = nullptr) {
    if (dim < 1) throw ValueError("kmeans: dim must be >= 1");
    if (params.k < 1) throw ValueError("kmeans: k must be >= 1");
    if (points.size() % static_cast<std::size_t>(dim) != 0) {
        throw ShapeError("kmeans: point buffer is not a multiple of dim");
    }
    const std::size_t n = points.size() / static_cast<std::size_t>(dim);
    const std::size_t k = static_cast<std::size_t>(params.k);
    if (detail::count_distinct_rows(points, dim, k) < k) {
        throw ValueError("kmeans: fewer than k=" + std::to_string(params.k) +
                         " distinct points");
    }
    auto point = [&](std::size_t i) { return points.data() + i * static_cast<std::size_t>(dim); };

    // k-means++ seeding on squared distances
    std::vector<double> centroids(k * static_cast<std::size_t>(dim));
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    {
        std::uniform_int_distribution<std::size_t> first(0, n - 1);
        std::size_t chosen = first(rng);
        for (std::size_t c = 0; c < k; ++c) {
            const float* src = point(chosen);
            for (int j = 0; j < dim; ++j) centroids[c * dim + j] = src[j];
            if (c + 1 == k) break;
#pragma omp parallel for schedule(static)
            for (long long i = 0; i < static_cast<long long>(n); ++i) {
                double d = 0.0;
                const float* p = point(static_cast<std::size_t>(i));
                for (int j = 0; j < dim; ++j) {
                    const double diff = p[j] - centroids[c * dim + j];
                    d += diff * diff;
                }
                if (d < min_d[static_cast<std::size_t>(i)]) min_d[static_cast<std::size_t>(i)] = d;
            }
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += min_d[i];
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng);
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                target -= min_d[i];
                if (target <= 0.0) {
                    chosen = i;
                    break;
                }
            }
        }
    }

    std::vector<int> assign(n, 0);
    std::vector<double> cnorm(k);
    std::vector<double> sums(k * static_cast<std::size_t>(dim));
    std::vector<std::size_t> counts(k);
    double inertia = 0.0;
    int iterations = 0;

    for (int iter = 0; iter < params.max_iter; ++iter) {
        // assignment (and inertia at the current centroids)
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) s += centroids[c * dim + j] * centroids[c * dim + j];
            cnorm[c] = s;
        }
        // per-point assignment in parallel; the inertia reduction stays
        // sequential in index order so results are run-to-run identical
        std::vector<double> best_d(n);
#pragma omp parallel for schedule(static)
        for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            const float* p = point(i);
            double pn = 0.0;
            for (int j = 0; j < dim; ++j) pn += static_cast<double>(p[j]) * p[j];
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (std::size_t c = 0; c < k; ++c) {
                double dot = 0.0;
                const double* ctr = &centroids[c * dim];
                for (int j = 0; j < dim; ++j) dot += p[j] * ctr[j];
                const double d = pn - 2.0 * dot + cnorm[c];
                if (d < best) {
                    best = d;
                    best_c = static_cast<int>(c);
                }
            }
            assign[i] = best_c;
            best_d[i] = std::max(best, 0.0);
        }
        inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) inertia += best_d[i];
        if (inertia_trace) inertia_trace->push_back(inertia);
        iterations = iter + 1;

        // update
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const float* p = point(i);
            double* dst = &sums[static_cast<std::size_t>(assign[i]) * dim];
            for (int j = 0; j < dim; ++j) dst[j] += p[j];
            ++counts[static_cast<std::size_t>(assign[i])];
        }

        // reseed empty clusters to the point farthest from its centroid;
        // the moved centroid had no members, so inertia cannot increase
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            std::size_t far_i = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(assign[i])] <= 1) continue;
                const float* p = point(i);
                const double* ctr = &centroids[static_cast<std::size_t>(assign[i]) * dim];
                double d = 0.0;
                for (int j = 0; j < dim; ++j) {
                    const double diff = p[j] - ctr[j];
                    d += diff * diff;
                }
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            const float* p = point(far_i);
            double* dst = &sums[static_cast<std::size_t>(assign[far_i]) * dim];
            for (int j = 0; j < dim; ++j) dst[j] -= p[j];
            --counts[static_cast<std::size_t>(assign[far_i])];
            assign[far_i] = static_cast<int>(c);
            for (int j = 0; j < dim; ++j) sums[c * dim + j] = p[j];
            counts[c] = 1;
        }

        double moved = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            double d = 0.0;
            for (int j = 0; j < dim; ++j) {
                const double next = sums[c * dim + j] / static_cast<double>(counts[c]);
                const double diff = next - centroids[c * dim + j];
                d += diff * diff;
                centroids[c * dim + j] = next;
            }
            moved = std::max(moved, d);
        }
        if (std::sqrt(moved) < params.tol) break;
    }

    // final inertia at the converged centroids
    {
        std::vector<double> best_d(n);
#pragma omp parallel for schedule(static)
        for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            const float* p = point(i);
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                double d = 0.0;
                const double* ctr = &centroids[c * dim];
                for (int j = 0; j < dim; ++j) {
                    const double diff = p[j] - ctr[j];
                    d += diff * diff;
                }
                best = std::min(best, d);
            }
            best_d[i] = best;
        }
        inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) inertia += best_d[i];
    }
    if (inertia_trace) inertia_trace->push_back(inertia);

    Vocabulary vocab;
    vocab.dim = dim;
    vocab.iterations = iterations;
    vocab.inertia = inertia;
    vocab.centroids.resize(k * static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < vocab.centroids.size(); ++i) {
        vocab.centroids[i] = static_cast<float>(centroids[i]);
    }
    return vocab;
}

} // namespace vtc
