#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "relprop/region.hpp"

namespace relprop {

/// Genre × object-class grid of mean relevance. Cells whose record count is
/// below the threshold are carried with their count but reported absent, so
/// changing the threshold never changes a present cell's mean. Genre and
/// label axes are sorted lexicographically.
class MeanRelevanceMatrix {
public:
    struct Cell {
        double mean = 0.0;
        std::size_t count = 0;
    };

    MeanRelevanceMatrix(std::vector<std::string> genres, std::vector<std::string> labels,
                        std::vector<Cell> cells, std::size_t threshold);

    const std::vector<std::string>& genres() const { return genres_; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t threshold() const { return threshold_; }

    const Cell& cell(std::size_t genre_idx, std::size_t label_idx) const {
        return cells_[genre_idx * labels_.size() + label_idx];
    }
    bool present(std::size_t genre_idx, std::size_t label_idx) const {
        return cell(genre_idx, label_idx).count >= threshold_;
    }

private:
    std::vector<std::string> genres_;
    std::vector<std::string> labels_;
    std::vector<Cell> cells_;  // row-major, genres × labels
    std::size_t threshold_;
};

/// Six-number box-plot summary of one (genre, label) group.
struct DistributionSummary {
    std::string genre;
    std::string label;
    std::size_t count = 0;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
};

MeanRelevanceMatrix mean_relevance_matrix(const std::vector<RelevanceRecord>& records,
                                          std::size_t threshold = 5);

/// Quartiles by linear interpolation at p·(n−1) over the sorted values;
/// whiskers are the extreme data. Throws on empty input.
DistributionSummary distribution_summary(std::vector<double> values);

/// One summary per genre that has at least one record of `label`, genres in
/// lexicographic order.
std::vector<DistributionSummary> per_genre_label_summaries(
    const std::vector<RelevanceRecord>& records, const std::string& label);

// CSV forms. The matrix is written as a genre-per-row grid with `mean:count`
// cells, blank where absent (blank and zero mean different things). Records:
// header image_id,genre,label,r_obj,box_area_fraction. Summaries: header
// genre,label,count,min,q1,median,q3,max,mean.

std::string matrix_to_csv(const MeanRelevanceMatrix& matrix);
std::string summaries_to_csv(const std::vector<DistributionSummary>& summaries);

std::string records_to_csv(const std::vector<RelevanceRecord>& records);
std::vector<RelevanceRecord> records_from_csv(const std::string& text);
std::vector<RelevanceRecord> load_records_csv(const std::filesystem::path& path);

}  // namespace relprop
