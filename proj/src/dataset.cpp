#include "relprop/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "relprop/csv.hpp"
#include "relprop/errors.hpp"
#include "relprop/rng.hpp"

namespace relprop {

Manifest::Manifest(std::vector<ManifestEntry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw ParseError("manifest has no entries");
    std::set<std::string> ids;
    std::set<std::string> genres;
    for (const auto& e : entries_) {
        if (!ids.insert(e.image_id).second) {
            throw ParseError("duplicate image_id '" + e.image_id + "'");
        }
        genres.insert(e.genre);
    }
    genres_.assign(genres.begin(), genres.end());
}

bool Manifest::has_genre(const std::string& genre) const {
    return std::binary_search(genres_.begin(), genres_.end(), genre);
}

Manifest parse_manifest(const std::string& text, const std::string& origin) {
    const std::vector<std::string> lines = read_lines(text);
    std::vector<ManifestEntry> entries;
    entries.reserve(lines.size());
    std::size_t with_split = 0;
    std::set<std::string> seen;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (lines[i].empty()) continue;
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != 3 && fields.size() != 4) {
            throw ParseError(origin + ": expected image_id,path,genre[,split], got " +
                                 std::to_string(fields.size()) + " fields",
                             line_no);
        }
        ManifestEntry e;
        e.image_id = fields[0];
        e.path = fields[1];
        e.genre = fields[2];
        if (e.image_id.empty() || e.path.empty() || e.genre.empty()) {
            throw ParseError(origin + ": empty field", line_no);
        }
        if (!seen.insert(e.image_id).second) {
            throw ParseError(origin + ": duplicate image_id '" + e.image_id + "'", line_no);
        }
        if (fields.size() == 4) {
            if (fields[3] != "train" && fields[3] != "test") {
                throw ParseError(origin + ": split must be 'train' or 'test', got '" +
                                     fields[3] + "'",
                                 line_no);
            }
            e.split = fields[3];
            ++with_split;
        }
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw ParseError(origin + ": no entries");
    if (with_split != 0 && with_split != entries.size()) {
        throw ParseError(origin + ": split column must be present on all lines or none");
    }
    return Manifest(std::move(entries));
}

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str(), path.string());
}

namespace {

/// Draws `need` entries across the genre groups, as evenly as divisibility
/// allows: every genre gets floor(need/G), and the remainder goes to a seeded
/// choice of genres. Deficits from small genres are refilled from genres with
/// spare capacity in sorted order.
std::vector<std::size_t> sample_stratified(
    const std::vector<std::pair<std::string, std::vector<std::size_t>>>& groups,
    std::size_t need, Rng& rng) {
    const std::size_t group_count = groups.size();
    std::size_t available = 0;
    for (const auto& [genre, members] : groups) available += members.size();
    if (available < need) {
        throw CapacityError("need " + std::to_string(need) + " negatives but only " +
                            std::to_string(available) + " are available");
    }

    std::vector<std::size_t> quota(group_count, need / group_count);
    for (std::size_t extra : rng.sample_indices(group_count, need % group_count)) {
        quota[extra] += 1;
    }

    // cap quotas at group sizes, then hand the deficit to groups with room
    std::size_t deficit = 0;
    for (std::size_t g = 0; g < group_count; ++g) {
        if (quota[g] > groups[g].second.size()) {
            deficit += quota[g] - groups[g].second.size();
            quota[g] = groups[g].second.size();
        }
    }
    while (deficit > 0) {
        bool progressed = false;
        for (std::size_t g = 0; g < group_count && deficit > 0; ++g) {
            if (quota[g] < groups[g].second.size()) {
                quota[g] += 1;
                deficit -= 1;
                progressed = true;
            }
        }
        if (!progressed) throw CapacityError("stratified sampling ran out of capacity");
    }

    std::vector<std::size_t> picked;
    picked.reserve(need);
    for (std::size_t g = 0; g < group_count; ++g) {
        for (std::size_t local : rng.sample_indices(groups[g].second.size(), quota[g])) {
            picked.push_back(groups[g].second[local]);
        }
    }
    return picked;
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> group_by_genre(
    const Manifest& manifest, const std::vector<std::size_t>& pool,
    const std::string& excluded_genre) {
    std::map<std::string, std::vector<std::size_t>> grouped;
    for (std::size_t idx : pool) {
        const auto& e = manifest.entries()[idx];
        if (e.genre != excluded_genre) grouped[e.genre].push_back(idx);
    }
    return {grouped.begin(), grouped.end()};
}

SplitItem make_item(const ManifestEntry& e, int label) {
    return SplitItem{e.image_id, e.path, label};
}

}  // namespace

TaskSplit build_one_vs_others(const Manifest& manifest, const std::string& target_genre,
                              std::uint64_t rng_seed) {
    if (!manifest.has_genre(target_genre)) {
        throw std::invalid_argument("unknown genre '" + target_genre + "'");
    }
    if (manifest.genres().size() < 2) {
        throw CapacityError("one-vs-others needs at least two genres");
    }

    const Rng base(rng_seed);
    const auto& entries = manifest.entries();
    const bool predefined = entries.front().split.has_value();

    TaskSplit split;
    split.target_genre = target_genre;

    if (predefined) {
        // honor the manifest's own split; sample negatives inside each pool
        std::vector<std::size_t> train_pool, test_pool;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            (*entries[i].split == "train" ? train_pool : test_pool).push_back(i);
        }
        const auto build_half = [&](const std::vector<std::size_t>& pool, Rng rng,
                                    std::vector<SplitItem>& out) {
            std::vector<std::size_t> positives;
            for (std::size_t idx : pool) {
                if (entries[idx].genre == target_genre) positives.push_back(idx);
            }
            if (positives.empty()) return;
            const auto groups = group_by_genre(manifest, pool, target_genre);
            std::vector<std::size_t> negatives =
                sample_stratified(groups, positives.size(), rng);
            std::sort(negatives.begin(), negatives.end());
            for (std::size_t idx : positives) out.push_back(make_item(entries[idx], 1));
            for (std::size_t idx : negatives) out.push_back(make_item(entries[idx], 0));
        };
        build_half(train_pool, base.fork(2), split.train);
        if (!test_pool.empty()) build_half(test_pool, base.fork(3), split.test);
        return split;
    }

    // no predefined split: build the balanced task over the whole manifest
    // (every target entry is a positive), then carve a seeded 10% of each
    // side into the test half so train stays exactly balanced
    std::vector<std::size_t> positives;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].genre == target_genre) positives.push_back(i);
    }
    std::vector<std::size_t> all(entries.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto groups = group_by_genre(manifest, all, target_genre);
    Rng neg_rng = base.fork(2);
    std::vector<std::size_t> negatives = sample_stratified(groups, positives.size(), neg_rng);

    const auto carve = [&](std::vector<std::size_t>& side, Rng rng, int label) {
        rng.shuffle(side);
        const std::size_t test_count = side.size() / 10;
        std::vector<std::size_t> test_part(side.begin(), side.begin() + test_count);
        std::vector<std::size_t> train_part(side.begin() + test_count, side.end());
        std::sort(test_part.begin(), test_part.end());
        std::sort(train_part.begin(), train_part.end());
        for (std::size_t idx : train_part) split.train.push_back(make_item(entries[idx], label));
        for (std::size_t idx : test_part) split.test.push_back(make_item(entries[idx], label));
    };
    carve(positives, base.fork(3), 1);
    carve(negatives, base.fork(4), 0);
    return split;
}

std::string split_to_csv(const TaskSplit& split) {
    std::ostringstream out;
    out << "image_id,label,split\n";
    for (const auto& item : split.train) out << item.image_id << ',' << item.label << ",train\n";
    for (const auto& item : split.test) out << item.image_id << ',' << item.label << ",test\n";
    return out.str();
}

}  // namespace relprop
