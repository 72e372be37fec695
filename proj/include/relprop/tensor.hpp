#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relprop {

/// Dense row-major tensor. The one value type shared by images, activations,
/// parameters and relevance maps. Shape is fixed at construction; elements are
/// freely mutable. T is float in the default build, double in verification
/// mode.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled tensor of the given shape.
    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(checked_volume(shape_), T{}) {}

    Tensor(std::vector<std::size_t> shape, std::vector<T> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != checked_volume(shape_)) {
            throw std::invalid_argument(
                "tensor data length " + std::to_string(data_.size()) +
                " does not match shape volume " + std::to_string(checked_volume(shape_)));
        }
    }

    static Tensor full(std::vector<std::size_t> shape, T value) {
        Tensor t(std::move(shape));
        for (auto& v : t.data_) v = value;
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }

    T& operator[](std::size_t flat) { return data_[flat]; }
    const T& operator[](std::size_t flat) const { return data_[flat]; }

    // Rank-specific accessors used by the layer kernels; row-major layout:
    // rank 2 is (row, col), rank 3 is (y, x, channel), rank 4 is
    // (ky, kx, channel, filter).
    T& at2(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    const T& at2(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    T& at3(std::size_t y, std::size_t x, std::size_t c) {
        return data_[(y * shape_[1] + x) * shape_[2] + c];
    }
    const T& at3(std::size_t y, std::size_t x, std::size_t c) const {
        return data_[(y * shape_[1] + x) * shape_[2] + c];
    }

    T& at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
        return data_[((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
    }
    const T& at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
        return data_[((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
    }

    /// Same data reinterpreted with a new shape of equal volume.
    Tensor reshaped(std::vector<std::size_t> new_shape) const {
        if (checked_volume(new_shape) != data_.size()) {
            throw std::invalid_argument("reshape volume mismatch");
        }
        return Tensor(std::move(new_shape), data_);
    }

    template <typename U>
    Tensor<U> cast() const {
        std::vector<U> out(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return Tensor<U>(shape_, std::move(out));
    }

    T sum() const {
        T acc{};
        for (const T& v : data_) acc += v;
        return acc;
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    static std::size_t checked_volume(const std::vector<std::size_t>& shape) {
        std::size_t volume = 1;
        for (std::size_t d : shape) {
            if (d == 0) throw std::invalid_argument("tensor dimensions must be positive");
            volume *= d;
        }
        return volume;
    }

    std::vector<std::size_t> shape_;
    std::vector<T> data_;
};

/// Human-readable "[a, b, c]" form for error messages.
inline std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

}  // namespace relprop
