#pragma once

// Dense SIFT: upright 128-dimensional descriptors (4x4 spatial bins x 8
// orientation bins) extracted on a fixed stride-6 grid at bin sizes
// {4,6,8,10}. Gradients are clamped central differences; gradient
// magnitude is soft-assigned trilinearly over space and orientation;
// descriptors are L2-normalized, clamped at 0.2 and renormalized.

#include <array>
#include <cmath>
#include <vector>

#include "vtc/errors.hpp"
#include "vtc/tensor.hpp"

namespace vtc {

struct SiftDescriptor {
    float x = 0.0f; // window center, pixels
    float y = 0.0f;
    int scale = 0; // bin size in pixels
    std::array<float, 128> v{};
};

struct DenseSiftParams {
    int stride = 6;
    std::vector<int> bin_sizes{4, 6, 8, 10};
    float clamp = 0.2f;
};

/// luma = 0.299 R + 0.587 G + 0.114 B
inline Tensor to_grayscale(const Tensor& rgb) {
    if (rgb.rank() != 3 || rgb.dim(0) != 3) {
        throw ShapeError("to_grayscale: expected 3xHxW, got " + shape_str(rgb.shape()));
    }
    const int H = rgb.dim(1), W = rgb.dim(2);
    Tensor gray({1, H, W});
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    for (std::size_t i = 0; i < plane; ++i) {
        gray[i] = 0.299f * rgb[i] + 0.587f * rgb[plane + i] + 0.114f * rgb[2 * plane + i];
    }
    return gray;
}

/// Grid positions per axis for one scale: floor((dim - 4s)/stride) + 1,
/// zero when the window does not fit.
inline int dense_grid_count(int dim, int bin_size, int stride) {
    const int window = 4 * bin_size;
    if (dim < window) return 0;
    return (dim - window) / stride + 1;
}

namespace detail {

struct PixelGradient {
    float w0, w1;   // magnitude split over the two orientation bins
    int bin0, bin1; // adjacent orientation bins (mod 8)
};

inline void compute_gradients(const float* img, int H, int W, std::vector<PixelGradient>& out) {
    constexpr float kTwoPi = 6.28318530717958647692f;
    constexpr float kBinsOverTwoPi = 8.0f / kTwoPi;
    out.resize(static_cast<std::size_t>(H) * W);
    for (int y = 0; y < H; ++y) {
        const int ym = y > 0 ? y - 1 : 0;
        const int yp = y < H - 1 ? y + 1 : H - 1;
        for (int x = 0; x < W; ++x) {
            const int xm = x > 0 ? x - 1 : 0;
            const int xp = x < W - 1 ? x + 1 : W - 1;
            const float gx = 0.5f * (img[y * W + xp] - img[y * W + xm]);
            const float gy = 0.5f * (img[yp * W + x] - img[ym * W + x]);
            const float mag = std::sqrt(gx * gx + gy * gy);
            PixelGradient& pg = out[static_cast<std::size_t>(y) * W + x];
            if (mag == 0.0f) {
                pg = {0.0f, 0.0f, 0, 1};
                continue;
            }
            float theta = std::atan2(gy, gx);
            if (theta < 0.0f) theta += kTwoPi;
            float f = theta * kBinsOverTwoPi; // [0, 8)
            if (f >= 8.0f) f = 0.0f;
            const int i0 = static_cast<int>(f);
            const float frac = f - static_cast<float>(i0);
            pg.bin0 = i0 & 7;
            pg.bin1 = (i0 + 1) & 7;
            pg.w0 = mag * (1.0f - frac);
            pg.w1 = mag * frac;
        }
    }
}

} // namespace detail

/// Extracts descriptors at every grid position and scale. Images smaller
/// than the smallest window produce an empty list.
inline std::vector<SiftDescriptor> dense_sift(const Tensor& gray,
                                              const DenseSiftParams& params = {}) {
    if (gray.rank() != 3 || gray.dim(0) != 1) {
        throw ShapeError("dense_sift: expected grayscale 1xHxW, got " + shape_str(gray.shape()));
    }
    const int H = gray.dim(1), W = gray.dim(2);
    std::vector<detail::PixelGradient> grad;
    detail::compute_gradients(gray.data(), H, W, grad);

    std::vector<SiftDescriptor> descriptors;
    std::array<float, 128> hist;
    for (int s : params.bin_sizes) {
        const int window = 4 * s;
        const int nx = dense_grid_count(W, s, params.stride);
        const int ny = dense_grid_count(H, s, params.stride);
        const float inv_s = 1.0f / static_cast<float>(s);
        for (int gy = 0; gy < ny; ++gy) {
            const int y0 = gy * params.stride;
            for (int gx = 0; gx < nx; ++gx) {
                const int x0 = gx * params.stride;
                hist.fill(0.0f);
                for (int py = y0; py < y0 + window; ++py) {
                    const float v = (static_cast<float>(py - y0) + 0.5f) * inv_s - 0.5f;
                    const int iv = static_cast<int>(std::floor(v));
                    const float fv = v - static_cast<float>(iv);
                    for (int px = x0; px < x0 + window; ++px) {
                        const detail::PixelGradient& pg =
                            grad[static_cast<std::size_t>(py) * W + px];
                        if (pg.w0 == 0.0f && pg.w1 == 0.0f) continue;
                        const float u = (static_cast<float>(px - x0) + 0.5f) * inv_s - 0.5f;
                        const int iu = static_cast<int>(std::floor(u));
                        const float fu = u - static_cast<float>(iu);
                        for (int dv = 0; dv < 2; ++dv) {
                            const int vb = iv + dv;
                            if (vb < 0 || vb > 3) continue;
                            const float wv = dv ? fv : 1.0f - fv;
                            for (int du = 0; du < 2; ++du) {
                                const int ub = iu + du;
                                if (ub < 0 || ub > 3) continue;
                                const float w = wv * (du ? fu : 1.0f - fu);
                                float* cell = hist.data() + (vb * 4 + ub) * 8;
                                cell[pg.bin0] += w * pg.w0;
                                cell[pg.bin1] += w * pg.w1;
                            }
                        }
                    }
                }

                SiftDescriptor d;
                d.scale = s;
                d.x = static_cast<float>(x0) + 2.0f * static_cast<float>(s);
                d.y = static_cast<float>(y0) + 2.0f * static_cast<float>(s);
                double norm_sq = 0.0;
                for (float h : hist) norm_sq += static_cast<double>(h) * h;
                if (norm_sq > 1e-24) {
                    const float inv = static_cast<float>(1.0 / std::sqrt(norm_sq));
                    for (std::size_t i = 0; i < 128; ++i) d.v[i] = hist[i] * inv;
                    // clamp-renormalize iterated to its fixed point, so the
                    // final vector has unit norm AND respects the 0.2 cap
                    // (single-pass clamping leaves components above the cap
                    // after the trailing renormalization)
                    for (int pass = 0; pass < 64; ++pass) {
                        bool clamped = false;
                        for (std::size_t i = 0; i < 128; ++i) {
                            if (d.v[i] > params.clamp) {
                                d.v[i] = params.clamp;
                                clamped = true;
                            }
                        }
                        norm_sq = 0.0;
                        for (float h : d.v) norm_sq += static_cast<double>(h) * h;
                        const float renorm = static_cast<float>(1.0 / std::sqrt(norm_sq));
                        for (std::size_t i = 0; i < 128; ++i) d.v[i] *= renorm;
                        if (!clamped || renorm <= 1.0f + 1e-6f) break;
                    }
                }
                descriptors.push_back(d);
            }
        }
    }
    return descriptors;
}

} // namespace vtc
