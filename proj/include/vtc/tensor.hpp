#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "vtc/errors.hpp"

namespace vtc {

/// Dense n-dimensional row-major array. Canonical image layout is
/// channels x height x width; batched activations add a leading batch axis.
/// The float specialization (`Tensor`) is the working type everywhere;
/// the double instantiation exists for high-precision test oracles.
template <typename T>
class TensorT {
public:
    TensorT() = default;

    explicit TensorT(std::vector<int> shape)
        : shape_(std::move(shape)), data_(checked_volume(shape_), T(0)) {}

    TensorT(std::vector<int> shape, std::vector<T> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (checked_volume(shape_) != data_.size()) {
            throw ShapeError("tensor: data length " + std::to_string(data_.size()) +
                             " does not match shape volume " +
                             std::to_string(checked_volume(shape_)));
        }
    }

    static TensorT zeros(std::vector<int> shape) { return TensorT(std::move(shape)); }

    static TensorT full(std::vector<int> shape, T value) {
        TensorT t(std::move(shape));
        std::fill(t.data_.begin(), t.data_.end(), value);
        return t;
    }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& vec() { return data_; }
    const std::vector<T>& vec() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T& at(int a) { return data_[static_cast<std::size_t>(a)]; }
    const T& at(int a) const { return data_[static_cast<std::size_t>(a)]; }

    T& at(int a, int b) { return data_[idx2(a, b)]; }
    const T& at(int a, int b) const { return data_[idx2(a, b)]; }

    T& at(int a, int b, int c) { return data_[idx3(a, b, c)]; }
    const T& at(int a, int b, int c) const { return data_[idx3(a, b, c)]; }

    T& at(int a, int b, int c, int d) { return data_[idx4(a, b, c, d)]; }
    const T& at(int a, int b, int c, int d) const { return data_[idx4(a, b, c, d)]; }

    bool same_shape(const TensorT& o) const { return shape_ == o.shape_; }

    /// Returns a copy with a new shape of equal volume.
    TensorT reshaped(std::vector<int> shape) const {
        if (checked_volume(shape) != data_.size()) {
            throw ShapeError("reshape: new shape volume does not match tensor size " +
                             std::to_string(data_.size()));
        }
        return TensorT(std::move(shape), data_);
    }

    bool all_finite() const {
        for (const T& v : data_) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return true;
    }

    template <typename U>
    TensorT<U> cast() const {
        std::vector<U> out(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return TensorT<U>(shape_, std::move(out));
    }

    static std::size_t checked_volume(const std::vector<int>& shape) {
        std::size_t n = 1;
        for (int e : shape) {
            if (e < 1) throw ShapeError("tensor: extent " + std::to_string(e) + " < 1");
            n *= static_cast<std::size_t>(e);
        }
        return n;
    }

private:
    std::size_t idx2(int a, int b) const {
        return static_cast<std::size_t>(a) * shape_[1] + b;
    }
    std::size_t idx3(int a, int b, int c) const {
        return (static_cast<std::size_t>(a) * shape_[1] + b) * shape_[2] + c;
    }
    std::size_t idx4(int a, int b, int c, int d) const {
        return ((static_cast<std::size_t>(a) * shape_[1] + b) * shape_[2] + c) * shape_[3] + d;
    }

    std::vector<int> shape_;
    std::vector<T> data_;
};

using Tensor = TensorT<float>;

inline std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

} // namespace vtc
