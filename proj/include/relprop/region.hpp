#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "relprop/tensor.hpp"

namespace relprop {

struct Resolution {
    std::int64_t width = 0;
    std::int64_t height = 0;

    friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Axis-aligned box with half-open integer pixel coordinates
/// [x_min, x_max) × [y_min, y_max) in its stated coordinate space.
struct BoundingBox {
    std::int64_t x_min = 0;
    std::int64_t y_min = 0;
    std::int64_t x_max = 0;
    std::int64_t y_max = 0;
    std::string label;
    double confidence = 1.0;
    Resolution source_resolution;

    void validate() const;
    std::int64_t area() const { return (x_max - x_min) * (y_max - y_min); }
};

/// One aggregated (image, genre, object-class) relevance observation.
struct RelevanceRecord {
    std::string image_id;
    std::string genre;
    std::string label;
    double r_obj = 0.0;
    double box_area_fraction = 0.0;  // box pixels / map pixels, in (0, 1]
};

/// Rescales box coordinates by target/source per axis, rounding half-up and
/// clamping to the target bounds. Throws DegenerateBoxError if the box
/// collapses to zero area. Scaling to the box's own resolution is the
/// identity.
BoundingBox scale_box(const BoundingBox& box, Resolution target);

/// Sum of map values over the box (Σ R_(n,m) for pixels inside the half-open
/// box). The map must be channel-collapsed (rank 2, H×W) and the box must lie
/// within it.
template <typename T>
double region_relevance(const Tensor<T>& map, const BoundingBox& box);

using WarnFn = std::function<void(const std::string&)>;

/// One record per box. Boxes are brought to map resolution first (a no-op for
/// pre-scaled boxes); boxes that collapse under scaling are skipped and
/// reported through `warn`. Overlapping boxes are deliberately not
/// deduplicated: the statistic is per detected object.
template <typename T>
std::vector<RelevanceRecord> relevance_records(const Tensor<T>& map,
                                               const std::vector<BoundingBox>& boxes,
                                               const std::string& image_id,
                                               const std::string& genre,
                                               const WarnFn& warn = {});

/// One detection from a box manifest (JSON-lines, one object per line):
/// {"image_id": str, "label": str, "confidence": float,
///  "box": [x_min, y_min, x_max, y_max], "resolution": [width, height]}
struct Detection {
    std::string image_id;
    BoundingBox box;
};

std::vector<Detection> load_box_manifest(const std::filesystem::path& path);

}  // namespace relprop
