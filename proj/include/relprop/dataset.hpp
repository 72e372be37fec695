#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace relprop {

struct ManifestEntry {
    std::string image_id;
    std::string path;
    std::string genre;
    std::optional<std::string> split;  // "train" or "test" when the manifest carries one
};

/// Image catalog parsed from CSV lines `image_id,path,genre[,split]` (no
/// header row). Image ids are unique; the genre set is kept sorted.
class Manifest {
public:
    explicit Manifest(std::vector<ManifestEntry> entries);

    const std::vector<ManifestEntry>& entries() const { return entries_; }
    const std::vector<std::string>& genres() const { return genres_; }
    bool has_genre(const std::string& genre) const;

private:
    std::vector<ManifestEntry> entries_;
    std::vector<std::string> genres_;
};

Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(const std::string& text, const std::string& origin = "manifest");

struct SplitItem {
    std::string image_id;
    std::string path;
    int label = 0;  // 1 = target genre, 0 = other
};

/// Balanced one-vs-others task: every target-genre image is a positive, and
/// an equal number of negatives is drawn without replacement across the other
/// genres, as evenly per genre as divisibility allows.
struct TaskSplit {
    std::string target_genre;
    std::vector<SplitItem> train;
    std::vector<SplitItem> test;
};

TaskSplit build_one_vs_others(const Manifest& manifest, const std::string& target_genre,
                              std::uint64_t rng_seed);

/// CSV `image_id,label,split` over both halves of the task.
std::string split_to_csv(const TaskSplit& split);

}  // namespace relprop
