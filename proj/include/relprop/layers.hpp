#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "relprop/tensor.hpp"

namespace relprop {

enum class Padding { SameZero, Valid };

/// Spatial geometry of a convolution. For SameZero the output spatial size is
/// ceil(in / stride) and the total padding is split with the smaller half on
/// the top/left side.
struct ConvGeometry {
    std::size_t out_h = 0;
    std::size_t out_w = 0;
    std::ptrdiff_t pad_top = 0;
    std::ptrdiff_t pad_left = 0;
};

ConvGeometry conv2d_geometry(std::size_t in_h, std::size_t in_w, std::size_t kh,
                             std::size_t kw, std::size_t stride, Padding padding);

/// Winning input position per pooling window, as flat row-major indices into
/// the pooled layer's input tensor. Aligned element-for-element with the
/// pooled output.
struct PoolIndexMap {
    std::vector<std::size_t> argmax;
};

/// input H×W×C, weights kh×kw×C×F, bias F (empty span of a null tensor means
/// no bias). Output H'×W'×F.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights,
                         const Tensor<T>& bias, std::size_t stride, Padding padding);

/// Fixed 2×2 window, stride 2; trailing odd row/column is dropped. Ties go to
/// the first element in row-major scan order.
template <typename T>
std::pair<Tensor<T>, PoolIndexMap> maxpool2d_forward(const Tensor<T>& input);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& input);

/// input n, weights n×m, bias m -> output m.
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Tensor<T>& weights,
                        const Tensor<T>& bias);

/// Max-subtracted softmax; outputs are positive and sum to 1.
template <typename T>
Tensor<T> softmax_forward(const Tensor<T>& logits);

}  // namespace relprop
