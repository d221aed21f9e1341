#pragma once

// Shared "VTK1" model container: magic, format version, a UTF-8 key/value
// metadata block, named float32 tensors, and a trailing whole-file CRC-32.
// All integers and floats are little-endian.

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "vtc/errors.hpp"
#include "vtc/tensor.hpp"

namespace vtc {

constexpr char kContainerMagic[4] = {'V', 'T', 'K', '1'};
constexpr uint32_t kContainerVersion = 1;

struct NamedTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<float> data;
};

struct Container {
    uint32_t version = kContainerVersion;
    std::string section; // "cnn" | "vocab" | "svm"
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<NamedTensor> tensors;

    const std::string* find_meta(const std::string& key) const {
        for (const auto& [k, v] : meta) {
            if (k == key) return &v;
        }
        return nullptr;
    }
    const std::string& require_meta(const std::string& key) const {
        const std::string* v = find_meta(key);
        if (!v) throw FormatError("container: missing metadata key '" + key + "'");
        return *v;
    }
    const NamedTensor* find_tensor(const std::string& name) const {
        for (const auto& t : tensors) {
            if (t.name == name) return &t;
        }
        return nullptr;
    }
    const NamedTensor& require_tensor(const std::string& name) const {
        const NamedTensor* t = find_tensor(name);
        if (!t) throw FormatError("container: missing tensor '" + name + "'");
        return *t;
    }
};

namespace detail {

inline const std::array<uint32_t, 256>& crc32_table() {
    static const std::array<uint32_t, 256> table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int bit = 0; bit < 8; ++bit) {
                c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            }
            t[i] = c;
        }
        return t;
    }();
    return table;
}

inline uint32_t crc32(const uint8_t* data, std::size_t n) {
    const auto& table = crc32_table();
    uint32_t c = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < n; ++i) {
        c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
    }
    return c ^ 0xFFFFFFFFu;
}

struct ByteWriter {
    std::vector<uint8_t> bytes;
    void u32(uint32_t v) {
        const uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                              static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
        bytes.insert(bytes.end(), b, b + 4);
    }
    void f32(float v) {
        uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
};

struct ByteReader {
    const uint8_t* p;
    std::size_t n;
    std::size_t pos = 0;

    void need(std::size_t k) const {
        if (pos + k > n) {
            throw TruncatedError("container: file ends " + std::to_string(pos + k - n) +
                                 " bytes short at offset " + std::to_string(pos));
        }
    }
    uint32_t u32() {
        need(4);
        uint32_t v = static_cast<uint32_t>(p[pos]) | static_cast<uint32_t>(p[pos + 1]) << 8 |
                     static_cast<uint32_t>(p[pos + 2]) << 16 |
                     static_cast<uint32_t>(p[pos + 3]) << 24;
        pos += 4;
        return v;
    }
    float f32() {
        const uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    std::string str() {
        const uint32_t len = u32();
        need(len);
        std::string s(reinterpret_cast<const char*>(p + pos), len);
        pos += len;
        return s;
    }
};

} // namespace detail

inline void write_container(const std::string& path, const Container& c) {
    detail::ByteWriter w;
    w.bytes.insert(w.bytes.end(), kContainerMagic, kContainerMagic + 4);
    w.u32(c.version);
    w.str(c.section);
    w.u32(static_cast<uint32_t>(c.meta.size()));
    for (const auto& [k, v] : c.meta) {
        w.str(k);
        w.str(v);
    }
    w.u32(static_cast<uint32_t>(c.tensors.size()));
    for (const auto& t : c.tensors) {
        w.str(t.name);
        w.u32(static_cast<uint32_t>(t.shape.size()));
        std::size_t volume = 1;
        for (int e : t.shape) {
            if (e < 1) throw ShapeError("container: tensor '" + t.name + "' extent < 1");
            w.u32(static_cast<uint32_t>(e));
            volume *= static_cast<std::size_t>(e);
        }
        if (volume != t.data.size()) {
            throw ShapeError("container: tensor '" + t.name + "' shape volume " +
                             std::to_string(volume) + " != data length " +
                             std::to_string(t.data.size()));
        }
        for (float v : t.data) w.f32(v);
    }
    w.u32(detail::crc32(w.bytes.data(), w.bytes.size()));

    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open " + path + " for writing");
    const std::size_t written = std::fwrite(w.bytes.data(), 1, w.bytes.size(), f);
    std::fclose(f);
    if (written != w.bytes.size()) throw IoError("short write to " + path);
}

inline Container read_container(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open " + path + " for reading");
    std::fseek(f, 0, SEEK_END);
    const long fsize = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    std::vector<uint8_t> bytes(static_cast<std::size_t>(fsize > 0 ? fsize : 0));
    if (!bytes.empty() && std::fread(bytes.data(), 1, bytes.size(), f) != bytes.size()) {
        std::fclose(f);
        throw IoError("read failure on " + path);
    }
    std::fclose(f);

    if (bytes.size() < 12) throw TruncatedError(path + ": too small to be a model container");
    if (std::memcmp(bytes.data(), kContainerMagic, 4) != 0) {
        throw FormatError(path + ": bad magic bytes (not a VTK1 container)");
    }

    detail::ByteReader r{bytes.data(), bytes.size() - 4};
    r.pos = 4;
    Container c;
    c.version = r.u32();
    if (c.version > kContainerVersion) {
        throw VersionError(path + ": format version " + std::to_string(c.version) +
                           " is newer than supported version " +
                           std::to_string(kContainerVersion));
    }
    c.section = r.str();
    const uint32_t n_meta = r.u32();
    for (uint32_t i = 0; i < n_meta; ++i) {
        std::string k = r.str();
        std::string v = r.str();
        c.meta.emplace_back(std::move(k), std::move(v));
    }
    const uint32_t n_tensors = r.u32();
    for (uint32_t i = 0; i < n_tensors; ++i) {
        NamedTensor t;
        t.name = r.str();
        const uint32_t rank = r.u32();
        if (rank > 8) throw FormatError(path + ": tensor '" + t.name + "' has rank " +
                                        std::to_string(rank));
        std::size_t volume = 1;
        for (uint32_t d = 0; d < rank; ++d) {
            const uint32_t e = r.u32();
            if (e < 1) throw FormatError(path + ": tensor '" + t.name + "' extent < 1");
            t.shape.push_back(static_cast<int>(e));
            volume *= e;
        }
        r.need(volume * 4);
        t.data.resize(volume);
        for (std::size_t j = 0; j < volume; ++j) t.data[j] = r.f32();
        c.tensors.push_back(std::move(t));
    }
    if (r.pos != bytes.size() - 4) {
        throw FormatError(path + ": " + std::to_string(bytes.size() - 4 - r.pos) +
                          " unexpected trailing bytes before checksum");
    }
    const uint32_t stored = static_cast<uint32_t>(bytes[bytes.size() - 4]) |
                            static_cast<uint32_t>(bytes[bytes.size() - 3]) << 8 |
                            static_cast<uint32_t>(bytes[bytes.size() - 2]) << 16 |
                            static_cast<uint32_t>(bytes[bytes.size() - 1]) << 24;
    const uint32_t actual = detail::crc32(bytes.data(), bytes.size() - 4);
    if (stored != actual) {
        throw ChecksumError(path + ": checksum mismatch (file corrupt)");
    }
    return c;
}

} // namespace vtc
