#pragma once

// Binary PPM (P6) / PGM (P5) codec, bilinear resize and per-image
// brightness normalization. Images are CxHxW float tensors; decoded
// 8-bit samples are scaled by 1/255 into [0,1].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "vtc/errors.hpp"
#include "vtc/tensor.hpp"

namespace vtc {

namespace detail {

struct PnmHeader {
    bool color = false; // P6 vs P5
    int width = 0;
    int height = 0;
    std::size_t payload_offset = 0;
};

/// Parses a PNM header: magic, optional '#' comments, width, height,
/// maxval (must be 255), then exactly one whitespace byte before payload.
inline PnmHeader parse_pnm_header(const std::vector<uint8_t>& bytes, const std::string& path) {
    std::size_t pos = 0;
    auto at_end = [&] { return pos >= bytes.size(); };
    auto skip_space = [&] {
        while (!at_end()) {
            const uint8_t c = bytes[pos];
            if (c == '#') {
                while (!at_end() && bytes[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() -> long {
        skip_space();
        if (at_end() || bytes[pos] < '0' || bytes[pos] > '9') {
            throw FormatError(path + ": malformed PNM header (expected integer)");
        }
        long v = 0;
        while (!at_end() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1 << 20) throw FormatError(path + ": absurd dimension in PNM header");
            ++pos;
        }
        return v;
    };

    if (bytes.size() < 2) throw TruncatedError(path + ": too small for a PNM header");
    PnmHeader h;
    if (bytes[0] == 'P' && bytes[1] == '6') {
        h.color = true;
    } else if (bytes[0] == 'P' && bytes[1] == '5') {
        h.color = false;
    } else {
        throw FormatError(path + ": unsupported format (only binary P5/P6 PNM is accepted)");
    }
    pos = 2;
    h.width = static_cast<int>(read_int());
    h.height = static_cast<int>(read_int());
    const long maxval = read_int();
    if (h.width < 1 || h.height < 1) throw FormatError(path + ": non-positive PNM dimensions");
    if (maxval != 255) {
        throw FormatError(path + ": PNM maxval " + std::to_string(maxval) +
                          " unsupported (must be 255)");
    }
    if (at_end()) throw TruncatedError(path + ": header ends before payload");
    ++pos; // the single whitespace byte after maxval
    h.payload_offset = pos;
    return h;
}

inline std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open " + path + " for reading");
    std::fseek(f, 0, SEEK_END);
    const long n = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    std::vector<uint8_t> bytes(static_cast<std::size_t>(n > 0 ? n : 0));
    if (!bytes.empty() && std::fread(bytes.data(), 1, bytes.size(), f) != bytes.size()) {
        std::fclose(f);
        throw IoError("read failure on " + path);
    }
    std::fclose(f);
    return bytes;
}

} // namespace detail

/// Decodes a binary PPM/PGM file into a 3xHxW tensor with values in [0,1].
/// Grayscale inputs are replicated across the three channels.
inline Tensor decode_image(const std::string& path) {
    const std::vector<uint8_t> bytes = detail::read_file_bytes(path);
    const detail::PnmHeader h = detail::parse_pnm_header(bytes, path);
    const std::size_t pixels = static_cast<std::size_t>(h.width) * h.height;
    const std::size_t expected = h.payload_offset + pixels * (h.color ? 3 : 1);
    if (bytes.size() < expected) {
        throw TruncatedError(path + ": payload is " + std::to_string(expected - bytes.size()) +
                             " bytes short");
    }
    if (bytes.size() > expected) {
        throw FormatError(path + ": " + std::to_string(bytes.size() - expected) +
                          " trailing bytes after payload");
    }
    Tensor img({3, h.height, h.width});
    const uint8_t* p = bytes.data() + h.payload_offset;
    if (h.color) {
        for (std::size_t i = 0; i < pixels; ++i) {
            img[i] = static_cast<float>(p[3 * i]) / 255.0f;
            img[pixels + i] = static_cast<float>(p[3 * i + 1]) / 255.0f;
            img[2 * pixels + i] = static_cast<float>(p[3 * i + 2]) / 255.0f;
        }
    } else {
        for (std::size_t i = 0; i < pixels; ++i) {
            const float v = static_cast<float>(p[i]) / 255.0f;
            img[i] = v;
            img[pixels + i] = v;
            img[2 * pixels + i] = v;
        }
    }
    return img;
}

inline uint8_t quantize_sample(float v) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<uint8_t>(std::lround(c * 255.0f));
}

/// Writes a 3xHxW tensor as binary PPM (values clamped to [0,1]).
inline void encode_ppm(const std::string& path, const Tensor& img) {
    if (img.rank() != 3 || img.dim(0) != 3) {
        throw ShapeError("encode_ppm: image must be 3xHxW, got " + shape_str(img.shape()));
    }
    const int H = img.dim(1), W = img.dim(2);
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open " + path + " for writing");
    std::fprintf(f, "P6\n%d %d\n255\n", W, H);
    const std::size_t pixels = static_cast<std::size_t>(H) * W;
    std::vector<uint8_t> row(pixels * 3);
    for (std::size_t i = 0; i < pixels; ++i) {
        row[3 * i] = quantize_sample(img[i]);
        row[3 * i + 1] = quantize_sample(img[pixels + i]);
        row[3 * i + 2] = quantize_sample(img[2 * pixels + i]);
    }
    const std::size_t written = std::fwrite(row.data(), 1, row.size(), f);
    std::fclose(f);
    if (written != row.size()) throw IoError("short write to " + path);
}

/// Writes a single-channel tensor (1xHxW or HxW) as binary PGM.
inline void encode_pgm(const std::string& path, const Tensor& img) {
    int H, W;
    if (img.rank() == 3 && img.dim(0) == 1) {
        H = img.dim(1);
        W = img.dim(2);
    } else if (img.rank() == 2) {
        H = img.dim(0);
        W = img.dim(1);
    } else {
        throw ShapeError("encode_pgm: image must be 1xHxW or HxW, got " + shape_str(img.shape()));
    }
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open " + path + " for writing");
    std::fprintf(f, "P5\n%d %d\n255\n", W, H);
    std::vector<uint8_t> row(static_cast<std::size_t>(H) * W);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = quantize_sample(img[i]);
    const std::size_t written = std::fwrite(row.data(), 1, row.size(), f);
    std::fclose(f);
    if (written != row.size()) throw IoError("short write to " + path);
}

/// Square bilinear resize with half-pixel center alignment. Aspect ratio is
/// not preserved; both axes are scaled independently onto target x target.
inline Tensor resize_bilinear(const Tensor& img, int target) {
    if (img.rank() != 3) {
        throw ShapeError("resize_bilinear: image must be CxHxW, got " + shape_str(img.shape()));
    }
    if (target < 1) throw ValueError("resize_bilinear: target " + std::to_string(target) + " < 1");
    const int C = img.dim(0), H = img.dim(1), W = img.dim(2);
    if (H == target && W == target) return img;
    Tensor out({C, target, target});
    const double sy = static_cast<double>(H) / target;
    const double sx = static_cast<double>(W) / target;
    for (int y = 0; y < target; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(H - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, H - 1);
        const float wy = static_cast<float>(fy - y0);
        for (int x = 0; x < target; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(W - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, W - 1);
            const float wx = static_cast<float>(fx - x0);
            for (int c = 0; c < C; ++c) {
                const float top = img.at(c, y0, x0) * (1.0f - wx) + img.at(c, y0, x1) * wx;
                const float bot = img.at(c, y1, x0) * (1.0f - wx) + img.at(c, y1, x1) * wx;
                out.at(c, y, x) = top * (1.0f - wy) + bot * wy;
            }
        }
    }
    return out;
}

/// Global standardization: subtract the per-image mean and divide by the
/// per-image standard deviation. Flat images (std < 1e-6) come back all zero.
inline Tensor normalize_brightness(const Tensor& img) {
    double sum = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) sum += img[i];
    const double mean = sum / static_cast<double>(img.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double d = img[i] - mean;
        sq += d * d;
    }
    const double stddev = std::sqrt(sq / static_cast<double>(img.size()));
    Tensor out(img.shape());
    if (stddev < 1e-6) return out;
    const float m = static_cast<float>(mean);
    const float inv = static_cast<float>(1.0 / stddev);
    for (std::size_t i = 0; i < img.size(); ++i) out[i] = (img[i] - m) * inv;
    return out;
}

} // namespace vtc
