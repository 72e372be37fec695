#include "relprop/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relprop {

RasterImage RasterImage::blank(std::size_t w, std::size_t h, std::uint8_t r, std::uint8_t g,
                               std::uint8_t b) {
    RasterImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(w * h * 3);
    for (std::size_t i = 0; i < w * h; ++i) {
        img.pixels[i * 3 + 0] = r;
        img.pixels[i * 3 + 1] = g;
        img.pixels[i * 3 + 2] = b;
    }
    return img;
}

namespace {

/// Center-aligned bilinear sample of one channel at output pixel (ox, oy).
double bilinear_sample(const RasterImage& img, std::size_t out_w, std::size_t out_h,
                       std::size_t ox, std::size_t oy, std::size_t channel) {
    const double sx = static_cast<double>(img.width) / static_cast<double>(out_w);
    const double sy = static_cast<double>(img.height) / static_cast<double>(out_h);
    const double fx = (static_cast<double>(ox) + 0.5) * sx - 0.5;
    const double fy = (static_cast<double>(oy) + 0.5) * sy - 0.5;

    const double cx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
    const double cy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
    const auto x0 = static_cast<std::size_t>(cx);
    const auto y0 = static_cast<std::size_t>(cy);
    const std::size_t x1 = std::min(x0 + 1, img.width - 1);
    const std::size_t y1 = std::min(y0 + 1, img.height - 1);
    const double tx = cx - static_cast<double>(x0);
    const double ty = cy - static_cast<double>(y0);

    const double v00 = img.at(x0, y0)[channel];
    const double v10 = img.at(x1, y0)[channel];
    const double v01 = img.at(x0, y1)[channel];
    const double v11 = img.at(x1, y1)[channel];
    const double top = v00 + tx * (v10 - v00);
    const double bottom = v01 + tx * (v11 - v01);
    return top + ty * (bottom - top);
}

std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

void require_nonempty(const RasterImage& img, const char* op) {
    if (img.width == 0 || img.height == 0 || img.pixels.size() != img.width * img.height * 3) {
        throw std::invalid_argument(std::string(op) + ": malformed image buffer");
    }
}

}  // namespace

RasterImage resize_bilinear(const RasterImage& img, std::size_t out_w, std::size_t out_h) {
    require_nonempty(img, "resize_bilinear");
    if (out_w == 0 || out_h == 0) throw std::invalid_argument("resize_bilinear: zero target dim");
    RasterImage out;
    out.width = out_w;
    out.height = out_h;
    out.pixels.resize(out_w * out_h * 3);
    for (std::size_t y = 0; y < out_h; ++y) {
        for (std::size_t x = 0; x < out_w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                out.at(x, y)[c] = quantize(bilinear_sample(img, out_w, out_h, x, y, c));
            }
        }
    }
    return out;
}

template <typename T>
Tensor<T> preprocess(const RasterImage& img) {
    require_nonempty(img, "preprocess");
    Tensor<T> out({kInputSize, kInputSize, 3});
    for (std::size_t y = 0; y < kInputSize; ++y) {
        for (std::size_t x = 0; x < kInputSize; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = bilinear_sample(img, kInputSize, kInputSize, x, y, c);
                out.at3(y, x, c) = static_cast<T>(v / 127.5 - 1.0);
            }
        }
    }
    return out;
}

template <typename T>
RasterImage tensor_to_image(const Tensor<T>& t) {
    if (t.rank() != 3 || t.dim(2) != 3) {
        throw std::invalid_argument("tensor_to_image: expected H×W×3, got " +
                                    shape_string(t.shape()));
    }
    RasterImage img;
    img.height = t.dim(0);
    img.width = t.dim(1);
    img.pixels.resize(img.width * img.height * 3);
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                img.at(x, y)[c] =
                    quantize((static_cast<double>(t.at3(y, x, c)) + 1.0) * 127.5);
            }
        }
    }
    return img;
}

template <typename T>
RasterImage render_heatmap(const Tensor<T>& map) {
    if (map.rank() != 2) {
        throw std::invalid_argument("render_heatmap: expected a channel-collapsed H×W map");
    }
    const std::size_t h = map.dim(0), w = map.dim(1);

    T peak{};
    for (const T& v : map.data()) peak = std::max(peak, static_cast<T>(std::abs(v)));

    RasterImage img = RasterImage::blank(w, h);
    if (peak == T{}) return img;  // nothing to show

    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            // the double-precision ratio keeps rendering invariant under
            // uniform map scaling
            const double v = static_cast<double>(map.at2(y, x)) / static_cast<double>(peak);
            std::uint8_t* px = img.at(x, y);
            const std::uint8_t fade = quantize(255.0 * (1.0 - std::abs(v)));
            if (v >= 0.0) {  // white -> red
                px[0] = 255;
                px[1] = fade;
                px[2] = fade;
            } else {  // white -> blue
                px[0] = fade;
                px[1] = fade;
                px[2] = 255;
            }
        }
    }
    return img;
}

template <typename T>
RasterImage composite(const RasterImage& img, const Tensor<T>& map, double opacity) {
    require_nonempty(img, "composite");
    if (opacity < 0.0 || opacity > 1.0) {
        throw std::invalid_argument("composite: opacity must be in [0, 1]");
    }
    const RasterImage heat = render_heatmap(map);
    if (heat.width != img.width || heat.height != img.height) {
        throw std::invalid_argument("composite: map " + std::to_string(heat.width) + "x" +
                                    std::to_string(heat.height) + " does not match image " +
                                    std::to_string(img.width) + "x" +
                                    std::to_string(img.height));
    }
    RasterImage out = img;
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        const double blended = (1.0 - opacity) * static_cast<double>(img.pixels[i]) +
                               opacity * static_cast<double>(heat.pixels[i]);
        out.pixels[i] = quantize(blended);
    }
    return out;
}

template Tensor<float> preprocess(const RasterImage&);
template Tensor<double> preprocess(const RasterImage&);
template RasterImage tensor_to_image(const Tensor<float>&);
template RasterImage tensor_to_image(const Tensor<double>&);
template RasterImage render_heatmap(const Tensor<float>&);
template RasterImage render_heatmap(const Tensor<double>&);
template RasterImage composite(const RasterImage&, const Tensor<float>&, double);
template RasterImage composite(const RasterImage&, const Tensor<double>&, double);

}  // namespace relprop
