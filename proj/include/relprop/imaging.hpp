#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "relprop/tensor.hpp"

namespace relprop {

/// 8-bit RGB image, row-major, no padding.
struct RasterImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // width*height*3

    static RasterImage blank(std::size_t w, std::size_t h, std::uint8_t r = 255,
                             std::uint8_t g = 255, std::uint8_t b = 255);
    std::uint8_t* at(std::size_t x, std::size_t y) { return &pixels[(y * width + x) * 3]; }
    const std::uint8_t* at(std::size_t x, std::size_t y) const {
        return &pixels[(y * width + x) * 3];
    }
};

/// Classifier input resolution.
inline constexpr std::size_t kInputSize = 112;

/// Bilinear resample (pixel centers aligned), rounded back to 8 bits.
RasterImage resize_bilinear(const RasterImage& img, std::size_t out_w, std::size_t out_h);

/// Bilinear resample to 112×112, then map each channel to [-1, 1] via
/// v = p / 127.5 - 1. No aspect-ratio preservation.
template <typename T>
Tensor<T> preprocess(const RasterImage& img);

/// Undoes the value mapping of preprocess for display: (v + 1) * 127.5,
/// rounded and clamped.
template <typename T>
RasterImage tensor_to_image(const Tensor<T>& t);

/// Diverging white-anchored colormap over a channel-collapsed map: values are
/// normalized by max|R| (an all-zero map renders all white), positive values
/// blend white→red, negative blend white→blue. Bit-deterministic, and
/// invariant under uniform scaling of the map.
template <typename T>
RasterImage render_heatmap(const Tensor<T>& map);

/// Renders the map and alpha-blends it over the image; opacity 0 is the
/// image, 1 the pure heatmap. Dimensions must match.
template <typename T>
RasterImage composite(const RasterImage& img, const Tensor<T>& map, double opacity);

// Codecs. Decode sniffs PNG vs JPEG vs PPM from the leading bytes. PPM (P6,
// binary, maxval 255) is the always-available bit-exact output format.

RasterImage decode_image(const std::filesystem::path& path);
RasterImage read_ppm(const std::filesystem::path& path);
void write_ppm(const RasterImage& img, const std::filesystem::path& path);
std::string encode_ppm(const RasterImage& img);
void write_png(const RasterImage& img, const std::filesystem::path& path);
void write_jpeg(const RasterImage& img, const std::filesystem::path& path, int quality = 90);

}  // namespace relprop
