#include "relprop/analytics.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "relprop/csv.hpp"
#include "relprop/errors.hpp"

namespace relprop {

MeanRelevanceMatrix::MeanRelevanceMatrix(std::vector<std::string> genres,
                                         std::vector<std::string> labels,
                                         std::vector<Cell> cells, std::size_t threshold)
    : genres_(std::move(genres)),
      labels_(std::move(labels)),
      cells_(std::move(cells)),
      threshold_(threshold) {
    if (cells_.size() != genres_.size() * labels_.size()) {
        throw std::invalid_argument("matrix cell count does not match axes");
    }
}

MeanRelevanceMatrix mean_relevance_matrix(const std::vector<RelevanceRecord>& records,
                                          std::size_t threshold) {
    if (records.empty()) throw std::invalid_argument("mean_relevance_matrix: no records");

    // std::map keys give the lexicographic axis orders for free
    std::map<std::string, std::size_t> genre_index, label_index;
    for (const auto& r : records) {
        genre_index.emplace(r.genre, 0);
        label_index.emplace(r.label, 0);
    }
    std::vector<std::string> genres, labels;
    for (auto& [g, idx] : genre_index) {
        idx = genres.size();
        genres.push_back(g);
    }
    for (auto& [l, idx] : label_index) {
        idx = labels.size();
        labels.push_back(l);
    }

    struct Acc {
        double sum = 0.0;
        std::size_t count = 0;
    };
    std::vector<Acc> acc(genres.size() * labels.size());
    for (const auto& r : records) {
        Acc& a = acc[genre_index[r.genre] * labels.size() + label_index[r.label]];
        a.sum += r.r_obj;
        a.count += 1;
    }

    std::vector<MeanRelevanceMatrix::Cell> cells(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        cells[i].count = acc[i].count;
        cells[i].mean = acc[i].count ? acc[i].sum / static_cast<double>(acc[i].count) : 0.0;
    }
    return MeanRelevanceMatrix(std::move(genres), std::move(labels), std::move(cells), threshold);
}

DistributionSummary distribution_summary(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("distribution_summary: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();

    const auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(n - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, n - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };

    DistributionSummary s;
    s.count = n;
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(n);
    return s;
}

std::vector<DistributionSummary> per_genre_label_summaries(
    const std::vector<RelevanceRecord>& records, const std::string& label) {
    std::map<std::string, std::vector<double>> by_genre;
    for (const auto& r : records) {
        if (r.label == label) by_genre[r.genre].push_back(r.r_obj);
    }
    std::vector<DistributionSummary> out;
    out.reserve(by_genre.size());
    for (auto& [genre, values] : by_genre) {
        DistributionSummary s = distribution_summary(std::move(values));
        s.genre = genre;
        s.label = label;
        out.push_back(std::move(s));
    }
    return out;
}

std::string matrix_to_csv(const MeanRelevanceMatrix& matrix) {
    std::ostringstream out;
    out << "genre";
    for (const auto& label : matrix.labels()) out << ',' << label;
    out << '\n';
    for (std::size_t g = 0; g < matrix.genres().size(); ++g) {
        out << matrix.genres()[g];
        for (std::size_t l = 0; l < matrix.labels().size(); ++l) {
            out << ',';
            if (matrix.present(g, l)) {
                out << format_double(matrix.cell(g, l).mean) << ':' << matrix.cell(g, l).count;
            }
        }
        out << '\n';
    }
    return out.str();
}

std::string summaries_to_csv(const std::vector<DistributionSummary>& summaries) {
    std::ostringstream out;
    out << "genre,label,count,min,q1,median,q3,max,mean\n";
    for (const auto& s : summaries) {
        out << s.genre << ',' << s.label << ',' << s.count << ',' << format_double(s.min) << ','
            << format_double(s.q1) << ',' << format_double(s.median) << ','
            << format_double(s.q3) << ',' << format_double(s.max) << ','
            << format_double(s.mean) << '\n';
    }
    return out.str();
}

std::string records_to_csv(const std::vector<RelevanceRecord>& records) {
    std::ostringstream out;
    out << "image_id,genre,label,r_obj,box_area_fraction\n";
    for (const auto& r : records) {
        out << r.image_id << ',' << r.genre << ',' << r.label << ',' << format_double(r.r_obj)
            << ',' << format_double(r.box_area_fraction) << '\n';
    }
    return out.str();
}

std::vector<RelevanceRecord> records_from_csv(const std::string& text) {
    const std::vector<std::string> lines = read_lines(text);
    if (lines.empty()) throw ParseError("records CSV is empty");
    if (lines[0] != "image_id,genre,label,r_obj,box_area_fraction") {
        throw ParseError("records CSV has an unexpected header", 1);
    }
    std::vector<RelevanceRecord> records;
    records.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != 5) {
            throw ParseError("expected 5 fields, got " + std::to_string(fields.size()), i + 1);
        }
        try {
            RelevanceRecord r;
            r.image_id = fields[0];
            r.genre = fields[1];
            r.label = fields[2];
            r.r_obj = parse_double(fields[3]);
            r.box_area_fraction = parse_double(fields[4]);
            records.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), i + 1);
        }
    }
    return records;
}

std::vector<RelevanceRecord> load_records_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open records CSV " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return records_from_csv(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace relprop
