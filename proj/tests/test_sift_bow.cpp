#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/oracles.hpp"
#include "support/temp_dir.hpp"
#include "vtc/bow.hpp"
#include "vtc/kmeans.hpp"
#include "vtc/sift.hpp"
#include "vtc/synthetic.hpp"

using namespace vtc;

// ---------------------------------------------------------------- grayscale

TEST(Grayscale, LumaWeights) {
    Tensor white = Tensor::full({3, 2, 2}, 1.0f);
    Tensor g = to_grayscale(white);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], 1.0f, 1e-6f);

    Tensor red({3, 1, 1});
    red.at(0, 0, 0) = 1.0f;
    EXPECT_NEAR(to_grayscale(red)[0], 0.299f, 1e-6f);
}

TEST(Grayscale, GrayInputPassesThrough) {
    std::mt19937 rng(1);
    Tensor plane = oracle::random_tensor({1, 4, 5}, rng, 0.0f, 1.0f);
    Tensor rgb({3, 4, 5});
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < plane.size(); ++i)
            rgb[static_cast<std::size_t>(c) * plane.size() + i] = plane[i];
    Tensor g = to_grayscale(rgb);
    for (std::size_t i = 0; i < plane.size(); ++i) EXPECT_NEAR(g[i], plane[i], 1e-6f);
}

TEST(Grayscale, WrongChannelCountRejected) {
    EXPECT_THROW(to_grayscale(Tensor({1, 4, 4})), ShapeError);
    EXPECT_THROW(to_grayscale(Tensor({4, 4})), ShapeError);
}

// ---------------------------------------------------------------- dense sift

TEST(DenseSift, GridCountAt96) {
    EXPECT_EQ(dense_grid_count(96, 4, 6), 14); // floor((96-16)/6)+1
    std::mt19937 rng(2);
    Tensor img = oracle::random_tensor({1, 96, 96}, rng, 0.0f, 1.0f);
    auto descriptors = dense_sift(img);
    int at_scale4 = 0;
    for (const auto& d : descriptors) {
        if (d.scale == 4) ++at_scale4;
    }
    EXPECT_EQ(at_scale4, 196);
}

TEST(DenseSift, CountMatchesGridFormulaOnRandomSizes) {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> dims(8, 140);
    for (int trial = 0; trial < 50; ++trial) {
        const int H = dims(rng), W = dims(rng);
        Tensor img = oracle::random_tensor({1, H, W}, rng, 0.0f, 1.0f);
        auto descriptors = dense_sift(img);
        std::size_t expected = 0;
        for (int s : {4, 6, 8, 10}) {
            expected += static_cast<std::size_t>(dense_grid_count(W, s, 6)) *
                        static_cast<std::size_t>(dense_grid_count(H, s, 6));
        }
        ASSERT_EQ(descriptors.size(), expected) << H << "x" << W;
    }
}

TEST(DenseSift, ConstantImageGivesZeroDescriptors) {
    Tensor img = Tensor::full({1, 48, 48}, 0.42f);
    auto descriptors = dense_sift(img);
    ASSERT_FALSE(descriptors.empty());
    for (const auto& d : descriptors) {
        for (float v : d.v) ASSERT_EQ(v, 0.0f);
    }
}

TEST(DenseSift, TooSmallImageGivesEmptyList) {
    Tensor img = Tensor::full({1, 10, 10}, 0.5f); // smallest window is 16
    EXPECT_TRUE(dense_sift(img).empty());
}

TEST(DenseSift, VerticalStepEdgeMassInHorizontalBins) {
    // dark-to-bright vertical edge: gradients are +x, orientation bin 0
    // (with bin 4 holding any -x response)
    const int S = 40;
    Tensor img({1, S, S});
    for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x) img.at(0, y, x) = x < S / 2 ? 0.2f : 0.8f;
    auto descriptors = dense_sift(img);
    int checked = 0;
    for (const auto& d : descriptors) {
        // windows that contain the edge column
        const float half_window = 2.0f * static_cast<float>(d.scale);
        if (d.x - half_window > S / 2.0f || d.x + half_window < S / 2.0f) continue;
        double total = 0.0, horizontal = 0.0;
        for (int bin = 0; bin < 128; ++bin) {
            total += d.v[static_cast<std::size_t>(bin)];
            const int orient = bin % 8;
            if (orient == 0 || orient == 4) horizontal += d.v[static_cast<std::size_t>(bin)];
        }
        if (total == 0.0) continue;
        ASSERT_GE(horizontal / total, 0.9) << "descriptor at x=" << d.x << " scale " << d.scale;
        ++checked;
    }
    EXPECT_GT(checked, 10);
}

TEST(DenseSift, UnitNormAndClampInvariantsOnRenderedImages) {
    testsupport::TempDir tmp("siftinv");
    SyntheticConfig cfg;
    cfg.n_per_class = 2;
    cfg.image_size = 64;
    cfg.seed = 5;
    LabeledDataset ds = generate_synthetic(tmp.str(), cfg);
    int non_flat = 0;
    for (const auto& s : ds.samples) {
        Tensor gray = to_grayscale(decode_image(s.image_path));
        for (const auto& d : dense_sift(gray)) {
            double norm_sq = 0.0;
            float max_c = 0.0f;
            for (float v : d.v) {
                norm_sq += static_cast<double>(v) * v;
                max_c = std::max(max_c, v);
            }
            if (norm_sq == 0.0) continue;
            ++non_flat;
            ASSERT_NEAR(std::sqrt(norm_sq), 1.0, 1e-5);
            ASSERT_LE(max_c, 0.2f + 1e-5f);
        }
    }
    EXPECT_GT(non_flat, 500);
}

// ---------------------------------------------------------------- kmeans

TEST(Kmeans, KPointsKClustersZeroInertia) {
    std::mt19937 rng(4);
    const int dim = 8, k = 6;
    std::vector<float> pts;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < dim; ++j) pts.push_back(static_cast<float>(i * dim + j) * 0.1f);
    KmeansParams params;
    params.k = k;
    params.max_iter = 20;
    Vocabulary vocab = kmeans_fit(pts, dim, params, rng);
    EXPECT_EQ(vocab.k(), k);
    EXPECT_NEAR(vocab.inertia, 0.0, 1e-12);
    // centroids are exactly the points, in some order
    for (int i = 0; i < k; ++i) {
        bool found = false;
        for (int c = 0; c < k && !found; ++c) {
            bool match = true;
            for (int j = 0; j < dim; ++j) {
                if (vocab.centroid(c)[j] != pts[static_cast<std::size_t>(i * dim + j)]) {
                    match = false;
                    break;
                }
            }
            found = match;
        }
        EXPECT_TRUE(found) << "point " << i;
    }
}

TEST(Kmeans, SingleClusterIsTheMean) {
    std::mt19937 rng(5);
    const int dim = 3;
    std::vector<float> pts;
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    const int n = 50;
    std::vector<double> mean(dim, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) {
            const float v = u(rng);
            pts.push_back(v);
            mean[static_cast<std::size_t>(j)] += v;
        }
    for (auto& m : mean) m /= n;
    KmeansParams params;
    params.k = 1;
    Vocabulary vocab = kmeans_fit(pts, dim, params, rng);
    for (int j = 0; j < dim; ++j) {
        EXPECT_NEAR(vocab.centroid(0)[j], mean[static_cast<std::size_t>(j)], 1e-5);
    }
}

TEST(Kmeans, RecoversThreeSeparatedBlobs) {
    std::mt19937 rng(6);
    const int dim = 128;
    std::vector<std::vector<double>> centers(3, std::vector<double>(dim, 0.0));
    centers[1][0] = 10.0;
    centers[2][1] = 10.0;
    std::normal_distribution<float> jitter(0.0f, 0.01f);
    std::vector<float> pts;
    std::vector<double> trace;
    for (int b = 0; b < 3; ++b)
        for (int i = 0; i < 80; ++i)
            for (int j = 0; j < dim; ++j)
                pts.push_back(static_cast<float>(centers[static_cast<std::size_t>(b)]
                                                        [static_cast<std::size_t>(j)]) +
                              jitter(rng));
    KmeansParams params;
    params.k = 3;
    params.max_iter = 50;
    Vocabulary vocab = kmeans_fit(pts, dim, params, rng, &trace);
    for (int b = 0; b < 3; ++b) {
        double best = 1e300;
        for (int c = 0; c < 3; ++c) {
            double d = 0.0;
            for (int j = 0; j < dim; ++j) {
                const double diff = vocab.centroid(c)[j] -
                                    centers[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
                d += diff * diff;
            }
            best = std::min(best, std::sqrt(d));
        }
        EXPECT_LT(best, 0.1) << "blob " << b;
    }
    for (std::size_t i = 1; i < trace.size(); ++i) {
        EXPECT_LE(trace[i], trace[i - 1] * (1.0 + 1e-12) + 1e-12) << "iteration " << i;
    }
}

TEST(Kmeans, InertiaNonIncreasingOnRandomData) {
    for (uint32_t seed = 0; seed < 5; ++seed) {
        std::mt19937 rng(100 + seed);
        std::uniform_real_distribution<float> u(0.0f, 1.0f);
        std::vector<float> pts(400 * 16);
        for (auto& v : pts) v = u(rng);
        KmeansParams params;
        params.k = 10;
        params.max_iter = 30;
        params.tol = 0.0; // run all iterations
        std::vector<double> trace;
        kmeans_fit(pts, 16, params, rng, &trace);
        for (std::size_t i = 1; i < trace.size(); ++i) {
            ASSERT_LE(trace[i], trace[i - 1] * (1.0 + 1e-12) + 1e-12)
                << "seed " << seed << " iteration " << i;
        }
    }
}

TEST(Kmeans, FewerDistinctPointsThanKRejected) {
    std::mt19937 rng(7);
    std::vector<float> pts;
    for (int i = 0; i < 10; ++i) { // only 2 distinct rows
        pts.push_back(i % 2 ? 1.0f : 0.0f);
        pts.push_back(0.5f);
    }
    KmeansParams params;
    params.k = 3;
    EXPECT_THROW(kmeans_fit(pts, 2, params, rng), ValueError);
}

// ---------------------------------------------------------------- bow

namespace {

Vocabulary toy_vocab(int k) {
    // centroid c is the unit vector e_c scaled so assignments are unambiguous
    Vocabulary vocab;
    vocab.dim = 128;
    vocab.centroids.assign(static_cast<std::size_t>(k) * 128, 0.0f);
    for (int c = 0; c < k; ++c) {
        vocab.centroids[static_cast<std::size_t>(c) * 128 + (c % 128)] = 1.0f;
    }
    return vocab;
}

SiftDescriptor descriptor_at(float x, float y, int word) {
    SiftDescriptor d;
    d.x = x;
    d.y = y;
    d.scale = 4;
    d.v[static_cast<std::size_t>(word % 128)] = 1.0f;
    return d;
}

} // namespace

TEST(Bow, SingleDescriptorSingleCounts) {
    Vocabulary vocab = toy_vocab(10);
    std::vector<SiftDescriptor> ds{descriptor_at(10.0f, 12.0f, 7)}; // top-left of 64x64
    std::vector<float> bow = encode_bow(ds, vocab, 64, 64);
    ASSERT_EQ(bow.size(), 50u);
    for (std::size_t i = 0; i < bow.size(); ++i) {
        if (i == 7 || i == 10 + 7) {
            EXPECT_EQ(bow[i], 1.0f);
        } else {
            EXPECT_EQ(bow[i], 0.0f);
        }
    }
}

TEST(Bow, OutputLengthIs5000ForThousandWords) {
    Vocabulary vocab = toy_vocab(1000);
    std::vector<SiftDescriptor> ds{descriptor_at(5.0f, 5.0f, 3)};
    EXPECT_EQ(encode_bow(ds, vocab, 96, 96).size(), 5000u);
}

TEST(Bow, EmptyDescriptorListGivesZeroVector) {
    Vocabulary vocab = toy_vocab(10);
    std::vector<float> bow = encode_bow({}, vocab, 64, 64);
    for (float v : bow) EXPECT_EQ(v, 0.0f);
}

TEST(Bow, GlobalCellIsDescriptorWeightedAverageOfQuadrants) {
    Vocabulary vocab = toy_vocab(16);
    std::mt19937 rng(8);
    std::uniform_real_distribution<float> pos(0.0f, 64.0f);
    std::uniform_int_distribution<int> word(0, 15);
    std::vector<SiftDescriptor> ds;
    for (int i = 0; i < 500; ++i) ds.push_back(descriptor_at(pos(rng), pos(rng), word(rng)));
    std::vector<float> bow = encode_bow(ds, vocab, 64, 64);

    // brute-force recount: assignments via nearest_centroid, counting by hand
    std::vector<double> quad_counts(4 * 16, 0.0);
    std::vector<double> quad_totals(4, 0.0);
    for (const auto& d : ds) {
        const int w = nearest_centroid(vocab, d.v.data());
        const int qx = d.x <= 32.0f ? 0 : 1;
        const int qy = d.y <= 32.0f ? 0 : 1;
        quad_counts[static_cast<std::size_t>((qy * 2 + qx) * 16 + w)] += 1.0;
        quad_totals[static_cast<std::size_t>(qy * 2 + qx)] += 1.0;
    }
    for (int w = 0; w < 16; ++w) {
        double denorm_sum = 0.0;
        for (int q = 0; q < 4; ++q) {
            denorm_sum += quad_counts[static_cast<std::size_t>(q * 16 + w)];
        }
        EXPECT_NEAR(bow[static_cast<std::size_t>(w)], denorm_sum / 500.0, 1e-6) << "word " << w;
        for (int q = 0; q < 4; ++q) {
            if (quad_totals[static_cast<std::size_t>(q)] == 0.0) continue;
            EXPECT_NEAR(bow[static_cast<std::size_t>((1 + q) * 16 + w)],
                        quad_counts[static_cast<std::size_t>(q * 16 + w)] /
                            quad_totals[static_cast<std::size_t>(q)],
                        1e-6);
        }
    }
}

TEST(Bow, PermutationInvariant) {
    Vocabulary vocab = toy_vocab(12);
    std::mt19937 rng(9);
    std::uniform_real_distribution<float> pos(0.0f, 48.0f);
    std::uniform_int_distribution<int> word(0, 11);
    std::vector<SiftDescriptor> ds;
    for (int i = 0; i < 100; ++i) ds.push_back(descriptor_at(pos(rng), pos(rng), word(rng)));
    std::vector<float> a = encode_bow(ds, vocab, 48, 48);
    std::shuffle(ds.begin(), ds.end(), rng);
    std::vector<float> b = encode_bow(ds, vocab, 48, 48);
    EXPECT_EQ(a, b);
}

TEST(Bow, CellBlocksAreL1NormalizedOrZero) {
    Vocabulary vocab = toy_vocab(8);
    std::mt19937 rng(10);
    std::uniform_real_distribution<float> pos(0.0f, 20.0f); // top-left quadrant only
    std::uniform_int_distribution<int> word(0, 7);
    std::vector<SiftDescriptor> ds;
    for (int i = 0; i < 60; ++i) ds.push_back(descriptor_at(pos(rng), pos(rng), word(rng)));
    std::vector<float> bow = encode_bow(ds, vocab, 64, 64);
    for (int cell = 0; cell < 5; ++cell) {
        double sum = 0.0;
        for (int w = 0; w < 8; ++w) sum += bow[static_cast<std::size_t>(cell * 8 + w)];
        if (cell == 0 || cell == 1) {
            EXPECT_NEAR(sum, 1.0, 1e-6) << "cell " << cell;
        } else {
            EXPECT_EQ(sum, 0.0) << "cell " << cell; // empty quadrants stay zero
        }
    }
}

TEST(NearestCentroid, MatchesBruteForceScan) {
    std::mt19937 rng(11);
    Vocabulary vocab;
    vocab.dim = 128;
    const int k = 40;
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    vocab.centroids.resize(static_cast<std::size_t>(k) * 128);
    for (auto& v : vocab.centroids) v = u(rng);
    for (int trial = 0; trial < 1000; ++trial) {
        std::array<float, 128> q;
        for (auto& v : q) v = u(rng);
        const int got = nearest_centroid(vocab, q.data());
        int best = 0;
        double best_d = 1e300;
        for (int c = 0; c < k; ++c) {
            double d = 0.0;
            for (int j = 0; j < 128; ++j) {
                const double diff = static_cast<double>(q[static_cast<std::size_t>(j)]) -
                                    vocab.centroid(c)[j];
                d += diff * diff;
            }
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        ASSERT_EQ(got, best) << "trial " << trial;
    }
}
