#include "relprop/region.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "relprop/errors.hpp"

namespace relprop {

void BoundingBox::validate() const {
    if (source_resolution.width <= 0 || source_resolution.height <= 0) {
        throw std::invalid_argument("bounding box resolution must be positive");
    }
    if (!(0 <= x_min && x_min < x_max && x_max <= source_resolution.width) ||
        !(0 <= y_min && y_min < y_max && y_max <= source_resolution.height)) {
        throw std::invalid_argument(
            "bounding box (" + std::to_string(x_min) + "," + std::to_string(y_min) + "," +
            std::to_string(x_max) + "," + std::to_string(y_max) + ") out of bounds for " +
            std::to_string(source_resolution.width) + "x" +
            std::to_string(source_resolution.height));
    }
    if (confidence < 0.0 || confidence > 1.0) {
        throw std::invalid_argument("bounding box confidence must be in [0, 1]");
    }
}

namespace {

std::int64_t scale_coord(std::int64_t v, std::int64_t target, std::int64_t source,
                         std::int64_t hi) {
    // round half-up, then clamp into [0, hi]
    const double scaled =
        static_cast<double>(v) * static_cast<double>(target) / static_cast<double>(source);
    const auto rounded = static_cast<std::int64_t>(std::floor(scaled + 0.5));
    return std::clamp<std::int64_t>(rounded, 0, hi);
}

}  // namespace

BoundingBox scale_box(const BoundingBox& box, Resolution target) {
    box.validate();
    if (target.width <= 0 || target.height <= 0) {
        throw std::invalid_argument("scale_box: target resolution must be positive");
    }
    BoundingBox out = box;
    out.x_min = scale_coord(box.x_min, target.width, box.source_resolution.width, target.width);
    out.x_max = scale_coord(box.x_max, target.width, box.source_resolution.width, target.width);
    out.y_min =
        scale_coord(box.y_min, target.height, box.source_resolution.height, target.height);
    out.y_max =
        scale_coord(box.y_max, target.height, box.source_resolution.height, target.height);
    out.source_resolution = target;
    if (out.x_min >= out.x_max || out.y_min >= out.y_max) {
        throw DegenerateBoxError("box '" + box.label + "' collapsed to zero area when scaled to " +
                                 std::to_string(target.width) + "x" +
                                 std::to_string(target.height));
    }
    return out;
}

template <typename T>
double region_relevance(const Tensor<T>& map, const BoundingBox& box) {
    if (map.rank() != 2) {
        throw std::invalid_argument("region_relevance: map must be channel-collapsed (rank 2)");
    }
    const auto h = static_cast<std::int64_t>(map.dim(0));
    const auto w = static_cast<std::int64_t>(map.dim(1));
    box.validate();
    if (box.x_max > w || box.y_max > h) {
        throw std::invalid_argument("region_relevance: box exceeds map bounds " +
                                    std::to_string(w) + "x" + std::to_string(h));
    }
    double total = 0.0;
    for (std::int64_t y = box.y_min; y < box.y_max; ++y) {
        for (std::int64_t x = box.x_min; x < box.x_max; ++x) {
            total += static_cast<double>(
                map.at2(static_cast<std::size_t>(y), static_cast<std::size_t>(x)));
        }
    }
    return total;
}

template <typename T>
std::vector<RelevanceRecord> relevance_records(const Tensor<T>& map,
                                               const std::vector<BoundingBox>& boxes,
                                               const std::string& image_id,
                                               const std::string& genre, const WarnFn& warn) {
    if (map.rank() != 2) {
        throw std::invalid_argument("relevance_records: map must be channel-collapsed (rank 2)");
    }
    const Resolution map_res{static_cast<std::int64_t>(map.dim(1)),
                             static_cast<std::int64_t>(map.dim(0))};
    const double map_pixels = static_cast<double>(map.dim(0) * map.dim(1));

    std::vector<RelevanceRecord> records;
    records.reserve(boxes.size());
    for (const BoundingBox& box : boxes) {
        BoundingBox scaled;
        try {
            scaled = scale_box(box, map_res);
        } catch (const DegenerateBoxError& e) {
            if (warn) warn(image_id + ": skipped box: " + e.what());
            continue;
        }
        RelevanceRecord rec;
        rec.image_id = image_id;
        rec.genre = genre;
        rec.label = scaled.label;
        rec.r_obj = region_relevance(map, scaled);
        rec.box_area_fraction = static_cast<double>(scaled.area()) / map_pixels;
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<Detection> load_box_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open box manifest " + path.string());

    std::vector<Detection> detections;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path.string() + ": " + e.what(), line_no);
        }
        try {
            Detection d;
            d.image_id = j.at("image_id").get<std::string>();
            d.box.label = j.at("label").get<std::string>();
            d.box.confidence = j.at("confidence").get<double>();
            const auto& b = j.at("box");
            const auto& r = j.at("resolution");
            if (!b.is_array() || b.size() != 4 || !r.is_array() || r.size() != 2) {
                throw std::invalid_argument("box must have 4 coordinates and resolution 2 values");
            }
            d.box.x_min = b[0].get<std::int64_t>();
            d.box.y_min = b[1].get<std::int64_t>();
            d.box.x_max = b[2].get<std::int64_t>();
            d.box.y_max = b[3].get<std::int64_t>();
            d.box.source_resolution = {r[0].get<std::int64_t>(), r[1].get<std::int64_t>()};
            d.box.validate();
            detections.push_back(std::move(d));
        } catch (const std::exception& e) {
            throw ParseError(path.string() + ": " + e.what(), line_no);
        }
    }
    return detections;
}

template double region_relevance(const Tensor<float>&, const BoundingBox&);
template double region_relevance(const Tensor<double>&, const BoundingBox&);
template std::vector<RelevanceRecord> relevance_records(const Tensor<float>&,
                                                        const std::vector<BoundingBox>&,
                                                        const std::string&, const std::string&,
                                                        const WarnFn&);
template std::vector<RelevanceRecord> relevance_records(const Tensor<double>&,
                                                        const std::vector<BoundingBox>&,
                                                        const std::string&, const std::string&,
                                                        const WarnFn&);

}  // namespace relprop
