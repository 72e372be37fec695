#include "relprop/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace relprop {

ConvGeometry conv2d_geometry(std::size_t in_h, std::size_t in_w, std::size_t kh,
                             std::size_t kw, std::size_t stride, Padding padding) {
    if (stride == 0) throw std::invalid_argument("conv2d stride must be >= 1");
    if (kh == 0 || kw == 0) throw std::invalid_argument("conv2d filter dims must be positive");
    ConvGeometry g;
    if (padding == Padding::Valid) {
        if (in_h < kh || in_w < kw) {
            throw std::invalid_argument("conv2d valid padding needs input " +
                                        std::to_string(in_h) + "x" + std::to_string(in_w) +
                                        " >= filter " + std::to_string(kh) + "x" +
                                        std::to_string(kw));
        }
        g.out_h = (in_h - kh) / stride + 1;
        g.out_w = (in_w - kw) / stride + 1;
        g.pad_top = 0;
        g.pad_left = 0;
    } else {
        g.out_h = (in_h + stride - 1) / stride;
        g.out_w = (in_w + stride - 1) / stride;
        const std::size_t span_h = (g.out_h - 1) * stride + kh;
        const std::size_t span_w = (g.out_w - 1) * stride + kw;
        const std::size_t pad_h = span_h > in_h ? span_h - in_h : 0;
        const std::size_t pad_w = span_w > in_w ? span_w - in_w : 0;
        g.pad_top = static_cast<std::ptrdiff_t>(pad_h / 2);
        g.pad_left = static_cast<std::ptrdiff_t>(pad_w / 2);
    }
    return g;
}

namespace {

void require_rank(const char* op, const char* name, std::size_t got, std::size_t want) {
    if (got != want) {
        throw std::invalid_argument(std::string(op) + ": " + name + " must have rank " +
                                    std::to_string(want) + ", got " + std::to_string(got));
    }
}

}  // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights,
                         const Tensor<T>& bias, std::size_t stride, Padding padding) {
    require_rank("conv2d_forward", "input", input.rank(), 3);
    require_rank("conv2d_forward", "weights", weights.rank(), 4);
    const std::size_t in_h = input.dim(0), in_w = input.dim(1), in_c = input.dim(2);
    const std::size_t kh = weights.dim(0), kw = weights.dim(1);
    const std::size_t wc = weights.dim(2), filters = weights.dim(3);
    if (wc != in_c) {
        throw std::invalid_argument("conv2d_forward: weight channel dim " + std::to_string(wc) +
                                    " does not match input channels " + std::to_string(in_c));
    }
    if (!bias.empty() && (bias.rank() != 1 || bias.dim(0) != filters)) {
        throw std::invalid_argument("conv2d_forward: bias length must equal filter count " +
                                    std::to_string(filters));
    }
    const ConvGeometry g = conv2d_geometry(in_h, in_w, kh, kw, stride, padding);

    Tensor<T> output({g.out_h, g.out_w, filters});
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
        const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy * stride) - g.pad_top;
        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox * stride) - g.pad_left;
            for (std::size_t f = 0; f < filters; ++f) {
                T acc = bias.empty() ? T{} : bias[f];
                for (std::size_t ky = 0; ky < kh; ++ky) {
                    const std::ptrdiff_t iy = y0 + static_cast<std::ptrdiff_t>(ky);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_h)) continue;
                    for (std::size_t kx = 0; kx < kw; ++kx) {
                        const std::ptrdiff_t ix = x0 + static_cast<std::ptrdiff_t>(kx);
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_w)) continue;
                        for (std::size_t c = 0; c < in_c; ++c) {
                            acc += input.at3(static_cast<std::size_t>(iy),
                                             static_cast<std::size_t>(ix), c) *
                                   weights.at4(ky, kx, c, f);
                        }
                    }
                }
                output.at3(oy, ox, f) = acc;
            }
        }
    }
    return output;
}

template <typename T>
std::pair<Tensor<T>, PoolIndexMap> maxpool2d_forward(const Tensor<T>& input) {
    require_rank("maxpool2d_forward", "input", input.rank(), 3);
    const std::size_t in_h = input.dim(0), in_w = input.dim(1), in_c = input.dim(2);
    if (in_h < 2 || in_w < 2) {
        throw std::invalid_argument("maxpool2d_forward: spatial dims must be >= 2, got " +
                                    std::to_string(in_h) + "x" + std::to_string(in_w));
    }
    const std::size_t out_h = in_h / 2, out_w = in_w / 2;
    Tensor<T> output({out_h, out_w, in_c});
    PoolIndexMap map;
    map.argmax.resize(output.size());

    std::size_t out_flat = 0;
    for (std::size_t oy = 0; oy < out_h; ++oy) {
        for (std::size_t ox = 0; ox < out_w; ++ox) {
            for (std::size_t c = 0; c < in_c; ++c, ++out_flat) {
                T best{};
                std::size_t best_index = 0;
                bool first = true;
                for (std::size_t dy = 0; dy < 2; ++dy) {
                    for (std::size_t dx = 0; dx < 2; ++dx) {
                        const std::size_t iy = oy * 2 + dy, ix = ox * 2 + dx;
                        const T v = input.at3(iy, ix, c);
                        // strict > keeps the first (row-major) position on ties
                        if (first || v > best) {
                            best = v;
                            best_index = (iy * in_w + ix) * in_c + c;
                            first = false;
                        }
                    }
                }
                output[out_flat] = best;
                map.argmax[out_flat] = best_index;
            }
        }
    }
    return {std::move(output), std::move(map)};
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& input) {
    Tensor<T> output(input.shape());
    auto in = input.data();
    auto out = output.data();
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > T{} ? in[i] : T{};
    return output;
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Tensor<T>& weights,
                        const Tensor<T>& bias) {
    require_rank("dense_forward", "input", input.rank(), 1);
    require_rank("dense_forward", "weights", weights.rank(), 2);
    const std::size_t n = input.dim(0);
    const std::size_t m = weights.dim(1);
    if (weights.dim(0) != n) {
        throw std::invalid_argument("dense_forward: weight rows " +
                                    std::to_string(weights.dim(0)) +
                                    " do not match input length " + std::to_string(n));
    }
    if (!bias.empty() && (bias.rank() != 1 || bias.dim(0) != m)) {
        throw std::invalid_argument("dense_forward: bias length must equal unit count " +
                                    std::to_string(m));
    }
    Tensor<T> output({m});
    for (std::size_t j = 0; j < m; ++j) output[j] = bias.empty() ? T{} : bias[j];
    for (std::size_t i = 0; i < n; ++i) {
        const T a = input[i];
        for (std::size_t j = 0; j < m; ++j) output[j] += a * weights.at2(i, j);
    }
    return output;
}

template <typename T>
Tensor<T> softmax_forward(const Tensor<T>& logits) {
    require_rank("softmax_forward", "logits", logits.rank(), 1);
    const std::size_t n = logits.dim(0);
    Tensor<T> output({n});
    T max_logit = logits[0];
    for (std::size_t i = 1; i < n; ++i) max_logit = std::max(max_logit, logits[i]);
    T total{};
    for (std::size_t i = 0; i < n; ++i) {
        const T e = std::exp(logits[i] - max_logit);
        output[i] = e;
        total += e;
    }
    for (std::size_t i = 0; i < n; ++i) output[i] /= total;
    return output;
}

template Tensor<float> conv2d_forward(const Tensor<float>&, const Tensor<float>&,
                                      const Tensor<float>&, std::size_t, Padding);
template Tensor<double> conv2d_forward(const Tensor<double>&, const Tensor<double>&,
                                       const Tensor<double>&, std::size_t, Padding);
template std::pair<Tensor<float>, PoolIndexMap> maxpool2d_forward(const Tensor<float>&);
template std::pair<Tensor<double>, PoolIndexMap> maxpool2d_forward(const Tensor<double>&);
template Tensor<float> relu_forward(const Tensor<float>&);
template Tensor<double> relu_forward(const Tensor<double>&);
template Tensor<float> dense_forward(const Tensor<float>&, const Tensor<float>&,
                                     const Tensor<float>&);
template Tensor<double> dense_forward(const Tensor<double>&, const Tensor<double>&,
                                      const Tensor<double>&);
template Tensor<float> softmax_forward(const Tensor<float>&);
template Tensor<double> softmax_forward(const Tensor<double>&);

}  // namespace relprop
