#pragma once

#include <filesystem>
#include <iosfwd>

#include "relprop/lrp_types.hpp"
#include "relprop/network.hpp"

namespace relprop {

// "NNM1" model container, little-endian throughout. Layout:
//   magic "NNM1"
//   u32 input_h, u32 input_w, u32 input_c
//   u32 layer_count
//   per layer: u8 kind tag, kind-specific params as u32s
//     conv2d   (tag 1): filter_h, filter_w, filters, stride, padding (0 same-zero, 1 valid)
//     maxpool2d(tag 2), relu (tag 3), flatten (tag 4), softmax (tag 6): no params
//     dense    (tag 5): units
//   then, for each parametered layer in declaration order, weights followed by
//   bias, each as: u32 rank, u32 dims..., f32 row-major payload.
// Payloads are f32 regardless of the in-memory precision.

template <typename T>
void save_model(const Network<T>& net, const std::filesystem::path& path);

template <typename T>
Network<T> load_model(const std::filesystem::path& path);

template <typename T>
void write_model(const Network<T>& net, std::ostream& out);

template <typename T>
Network<T> read_model(std::istream& in);

// "RLV1" relevance map container, little-endian:
//   magic "RLV1", u32 rank, u32 dims..., f32 row-major payload,
//   f32 start_score, u32 target_class.

template <typename T>
void save_relevance_map(const RelevanceMap<T>& map, const std::filesystem::path& path);

template <typename T>
RelevanceMap<T> load_relevance_map(const std::filesystem::path& path);

/// Writes via a temp file in the same directory plus an atomic rename, so a
/// crashed or concurrent run never leaves a partial artifact behind.
void atomic_write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace relprop
