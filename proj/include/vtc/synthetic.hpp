#pragma once

// Procedural 4-class vehicle image generator. Stands in for the private
// gate-camera database: frontal views with class-dependent geometry,
// jittered position/scale/intensity, two background styles keyed to a
// synthetic camera id, and additive Gaussian noise. Deterministic per seed.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "vtc/dataset.hpp"
#include "vtc/image.hpp"
#include "vtc/tensor.hpp"

namespace vtc {

struct SyntheticConfig {
    int n_per_class = 100;
    int image_size = 64;
    uint64_t seed = 0;
    float position_jitter = 0.10f; // horizontal center offset, fraction of width
    float scale_jitter = 0.15f;
    float noise_sigma = 0.05f;
};

namespace detail {

struct Rgb {
    float r, g, b;
};

inline void fill_rect(Tensor& img, float x0f, float y0f, float x1f, float y1f, Rgb c) {
    const int H = img.dim(1), W = img.dim(2);
    const int y0 = std::clamp(static_cast<int>(std::lround(y0f)), 0, H);
    const int y1 = std::clamp(static_cast<int>(std::lround(y1f)), 0, H);
    const int x0 = std::clamp(static_cast<int>(std::lround(x0f)), 0, W);
    const int x1 = std::clamp(static_cast<int>(std::lround(x1f)), 0, W);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            img.at(0, y, x) = c.r;
            img.at(1, y, x) = c.g;
            img.at(2, y, x) = c.b;
        }
}

/// Upper half-ellipse: fills rows above cy between the ellipse arcs.
inline void fill_dome(Tensor& img, float cx, float cy, float rx, float ry, Rgb c) {
    const int H = img.dim(1), W = img.dim(2);
    const int ytop = std::clamp(static_cast<int>(std::lround(cy - ry)), 0, H);
    const int ybot = std::clamp(static_cast<int>(std::lround(cy)), 0, H);
    for (int y = ytop; y < ybot; ++y) {
        const float t = (cy - (static_cast<float>(y) + 0.5f)) / ry;
        if (t > 1.0f) continue;
        const float half = rx * std::sqrt(std::max(0.0f, 1.0f - t * t));
        const int x0 = std::clamp(static_cast<int>(std::lround(cx - half)), 0, W);
        const int x1 = std::clamp(static_cast<int>(std::lround(cx + half)), 0, W);
        for (int x = x0; x < x1; ++x) {
            img.at(0, y, x) = c.r;
            img.at(1, y, x) = c.g;
            img.at(2, y, x) = c.b;
        }
    }
}

/// One rendered vehicle image. Consumes rng draws in a fixed order.
inline Tensor render_vehicle(int label, int side, const SyntheticConfig& cfg, std::mt19937& rng,
                             std::string& camera_id) {
    std::uniform_real_distribution<float> u01(0.0f, 1.0f);
    auto uni = [&](float lo, float hi) { return lo + (hi - lo) * u01(rng); };

    const float S = static_cast<float>(side);
    Tensor img({3, side, side});

    // camera and its background style
    const bool cam1 = u01(rng) < 0.5f;
    camera_id = cam1 ? "cam1" : "cam0";
    const float sky = cam1 ? uni(0.45f, 0.70f) : uni(0.55f, 0.80f);
    const float ground_tone = cam1 ? uni(0.20f, 0.38f) : uni(0.28f, 0.45f);
    const float warm = cam1 ? uni(0.02f, 0.08f) : 0.0f;
    for (int y = 0; y < side; ++y) {
        const float t = static_cast<float>(y) / S;
        const float v = sky * (1.0f - t) + ground_tone * t;
        for (int x = 0; x < side; ++x) {
            img.at(0, y, x) = v + warm;
            img.at(1, y, x) = v;
            img.at(2, y, x) = v - warm * 0.5f;
        }
    }
    if (cam1) {
        // horizontal gate bar near the top of the frame
        const float bar_y = uni(0.10f, 0.18f) * S;
        fill_rect(img, 0.0f, bar_y, S, bar_y + std::max(1.0f, 0.03f * S),
                  {0.85f, 0.85f, 0.80f});
    }

    // background clutter, drawn before the vehicle so it never occludes it:
    // rectangles (signage, containers), thin bars (poles, fencing) and
    // striped patches (gratings) that pump class-irrelevant gradient energy
    // into the scene
    {
        std::uniform_int_distribution<int> n_boxes_d(4, 9);
        const int n_boxes = n_boxes_d(rng);
        for (int i = 0; i < n_boxes; ++i) {
            const float bx = uni(0.0f, 0.9f) * S;
            const float by = uni(0.0f, 0.75f) * S;
            const float bw = uni(0.06f, 0.28f) * S;
            const float bh = uni(0.05f, 0.22f) * S;
            const float t = uni(0.10f, 0.90f);
            fill_rect(img, bx, by, bx + bw, by + bh,
                      {std::clamp(t + uni(-0.05f, 0.05f), 0.0f, 1.0f), t,
                       std::clamp(t + uni(-0.05f, 0.05f), 0.0f, 1.0f)});
        }
        std::uniform_int_distribution<int> n_bars_d(1, 3);
        const int n_bars = n_bars_d(rng);
        for (int i = 0; i < n_bars; ++i) {
            const float t = uni(0.05f, 0.85f);
            const Rgb tone{t, t, t};
            const float thick = std::max(1.0f, uni(0.01f, 0.03f) * S);
            if (u01(rng) < 0.5f) {
                const float bx = uni(0.0f, 1.0f) * S;
                fill_rect(img, bx, 0.0f, bx + thick, uni(0.4f, 1.0f) * S, tone);
            } else {
                const float by = uni(0.0f, 0.75f) * S;
                fill_rect(img, 0.0f, by, uni(0.4f, 1.0f) * S, by + thick, tone);
            }
        }
        std::uniform_int_distribution<int> n_grates_d(1, 2);
        const int n_grates = n_grates_d(rng);
        for (int i = 0; i < n_grates; ++i) {
            const float gx = uni(0.0f, 0.7f) * S;
            const float gy = uni(0.0f, 0.6f) * S;
            const float gw = uni(0.15f, 0.40f) * S;
            const float gh = uni(0.12f, 0.30f) * S;
            const float pitch = std::max(2.0f, uni(0.03f, 0.08f) * S);
            const float t0 = uni(0.15f, 0.45f), t1 = uni(0.55f, 0.90f);
            const bool vertical = u01(rng) < 0.5f;
            const float extent = vertical ? gw : gh;
            for (float off = 0.0f; off < extent; off += pitch) {
                const float half = pitch * 0.5f;
                const Rgb tone = (static_cast<int>(off / pitch) % 2 == 0)
                                     ? Rgb{t0, t0, t0}
                                     : Rgb{t1, t1, t1};
                if (vertical) {
                    fill_rect(img, gx + off, gy, std::min(gx + off + half, gx + gw), gy + gh,
                              tone);
                    fill_rect(img, std::min(gx + off + half, gx + gw), gy,
                              std::min(gx + off + pitch, gx + gw), gy + gh,
                              (static_cast<int>(off / pitch) % 2 == 0) ? Rgb{t1, t1, t1}
                                                                       : Rgb{t0, t0, t0});
                } else {
                    fill_rect(img, gx, gy + off, gx + gw, std::min(gy + off + half, gy + gh),
                              tone);
                    fill_rect(img, gx, std::min(gy + off + half, gy + gh), gx + gw,
                              std::min(gy + off + pitch, gy + gh),
                              (static_cast<int>(off / pitch) % 2 == 0) ? Rgb{t1, t1, t1}
                                                                       : Rgb{t0, t0, t0});
                }
            }
        }
    }

    // pose and paint
    const float cx = S * (0.5f + uni(-cfg.position_jitter, cfg.position_jitter));
    const float ground = S * (0.82f + uni(-0.05f, 0.05f));
    const float scale = 1.0f + uni(-cfg.scale_jitter, cfg.scale_jitter);
    const float tone = uni(0.25f, 0.85f);
    const float tint = uni(-0.06f, 0.06f);
    const Rgb body{std::clamp(tone + tint, 0.0f, 1.0f), tone,
                   std::clamp(tone - tint, 0.0f, 1.0f)};
    const Rgb dark{uni(0.04f, 0.16f), uni(0.04f, 0.16f), uni(0.04f, 0.16f)};
    const float glass_tone = uni(0.08f, 0.24f);
    const Rgb glass{glass_tone, glass_tone, std::clamp(glass_tone + 0.05f, 0.0f, 1.0f)};
    const float light_tone = uni(0.85f, 1.0f);
    const Rgb light{light_tone, light_tone, uni(0.70f, 0.95f)};

    // per-image jitter of the detail geometry, so local appearance varies
    // within a class while the silhouette stays class-typical
    auto jit = [&] { return uni(0.75f, 1.30f); };
    auto wheels = [&](float bw) {
        const float r = 0.045f * S * scale * jit();
        fill_rect(img, cx - bw / 2 + r, ground - r, cx - bw / 2 + 3 * r, ground + r, dark);
        fill_rect(img, cx + bw / 2 - 3 * r, ground - r, cx + bw / 2 - r, ground + r, dark);
    };
    auto headlights = [&](float bw, float y0_frac, float y1_frac, float width_frac,
                          float bh) {
        const float w = width_frac * bw * jit();
        const float yj = uni(-0.04f, 0.04f) * bh;
        fill_rect(img, cx - bw / 2 + 0.04f * bw, ground - y1_frac * bh + yj,
                  cx - bw / 2 + 0.04f * bw + w, ground - y0_frac * bh + yj, light);
        fill_rect(img, cx + bw / 2 - 0.04f * bw - w, ground - y1_frac * bh + yj,
                  cx + bw / 2 - 0.04f * bw, ground - y0_frac * bh + yj, light);
    };

    switch (label) {
        case 0: { // bus: tall wide body, a row of windows under a flat roof
            const float bw = 0.62f * S * scale, bh = 0.58f * S * scale;
            const float top = ground - bh;
            fill_rect(img, cx - bw / 2, top, cx + bw / 2, ground, body);
            std::uniform_int_distribution<int> n_win_d(3, 5);
            const int n_win = n_win_d(rng);
            const float wh = 0.16f * bh * jit();
            const float wy = top + (0.10f + uni(0.0f, 0.06f)) * bh;
            const float pitch = bw / (n_win + 1.0f);
            for (int w = 0; w < n_win; ++w) {
                const float wx = cx - bw / 2 + pitch * (0.55f + static_cast<float>(w));
                fill_rect(img, wx, wy, wx + pitch * 0.75f, wy + wh, glass);
            }
            const float gw = 0.30f * jit();
            fill_rect(img, cx - bw * gw, ground - 0.22f * bh, cx + bw * gw,
                      ground - 0.10f * bh, dark); // grille strip
            headlights(bw, 0.12f, 0.20f, 0.08f, bh);
            wheels(bw);
            break;
        }
        case 1: { // truck: narrow cab stacked on a wide body with a big grille
            const float bw = 0.68f * S * scale, bh = 0.30f * S * scale;
            const float cw = 0.42f * S * scale * jit(), ch = 0.26f * S * scale;
            const float body_top = ground - bh;
            fill_rect(img, cx - bw / 2, body_top, cx + bw / 2, ground, body);
            fill_rect(img, cx - cw / 2, body_top - ch, cx + cw / 2, body_top, body);
            fill_rect(img, cx - cw * 0.38f, body_top - ch * 0.85f, cx + cw * 0.38f,
                      body_top - ch * (0.35f * jit()), glass); // cab windshield
            const float gw = 0.42f * uni(0.8f, 1.0f);
            fill_rect(img, cx - bw * gw, body_top + 0.25f * bh, cx + bw * gw,
                      ground - 0.15f * bh, dark); // wide grille
            headlights(bw, 0.12f, 0.30f, 0.08f, bh);
            wheels(bw);
            break;
        }
        case 2: { // van: boxy mid-height body with one wide windshield
            const float bw = 0.50f * S * scale, bh = 0.44f * S * scale;
            const float top = ground - bh;
            fill_rect(img, cx - bw / 2, top, cx + bw / 2, ground, body);
            const float ww = 0.40f * uni(0.8f, 1.1f);
            fill_rect(img, cx - bw * ww, top + 0.10f * bh, cx + bw * ww,
                      top + (0.38f * jit()) * bh, glass);
            const float gw = 0.28f * jit();
            fill_rect(img, cx - bw * gw, ground - 0.20f * bh, cx + bw * gw,
                      ground - 0.08f * bh, dark);
            headlights(bw, 0.20f, 0.32f, 0.11f, bh);
            wheels(bw);
            break;
        }
        default: { // small car: low rounded body, slanted windshield
            const float bw = 0.46f * S * scale, bh = 0.24f * S * scale;
            const float top = ground - bh;
            fill_rect(img, cx - bw / 2, top, cx + bw / 2, ground, body);
            fill_dome(img, cx, top + 0.02f * bh, bw * 0.34f * jit(), 0.55f * bh, body);
            fill_dome(img, cx, top, bw * 0.26f * jit(), 0.38f * bh, glass); // windshield arc
            const float gw = 0.22f * jit();
            fill_rect(img, cx - bw * gw, ground - 0.26f * bh, cx + bw * gw,
                      ground - 0.10f * bh, dark);
            headlights(bw, 0.25f, 0.45f, 0.11f, bh);
            wheels(bw);
            break;
        }
    }

    std::normal_distribution<float> noise(0.0f, cfg.noise_sigma);
    for (std::size_t i = 0; i < img.size(); ++i) {
        img[i] = std::clamp(img[i] + noise(rng), 0.0f, 1.0f);
    }
    return img;
}

} // namespace detail

/// Renders n_per_class images per class into out_dir/images/, writes
/// out_dir/manifest.csv (relative paths) and returns the dataset with
/// resolved paths. Bitwise deterministic for a fixed config.
inline LabeledDataset generate_synthetic(const std::string& out_dir, const SyntheticConfig& cfg) {
    if (cfg.n_per_class < 1) throw ValueError("generate_synthetic: n_per_class must be >= 1");
    if (cfg.image_size < 16) throw ValueError("generate_synthetic: image_size must be >= 16");
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "images");

    std::mt19937 rng(static_cast<uint32_t>(cfg.seed));
    LabeledDataset relative; // as written into the manifest
    LabeledDataset resolved; // as returned
    char name[64];
    for (int label = 0; label < 4; ++label) {
        for (int i = 0; i < cfg.n_per_class; ++i) {
            std::string camera_id;
            Tensor img = detail::render_vehicle(label, cfg.image_size, cfg, rng, camera_id);
            std::snprintf(name, sizeof(name), "images/%s_%04d.ppm",
                          kClassNames[static_cast<std::size_t>(label)], i);
            const std::string rel(name);
            const std::string abs = (fs::path(out_dir) / rel).string();
            encode_ppm(abs, img);
            relative.samples.push_back({rel, label, camera_id});
            resolved.samples.push_back({abs, label, camera_id});
        }
    }
    // the generated corpus keeps relative paths so the directory is portable
    write_manifest((fs::path(out_dir) / "manifest.csv").string(), relative,
                   /*absolutize=*/false);
    return resolved;
}

} // namespace vtc
