#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rbmc {

/// One clustering item: a bag of D-dimensional feature frames. A single
/// frame is a valid bag; all frames of an item share the same dimension.
struct ItemFeatures {
    std::string item_id;
    std::vector<std::vector<double>> frames;
};

/// Per-dimension standardization statistics. Every std entry is floored at
/// kStdFloor so constant dimensions stay finite under division.
struct MvnStats {
    std::vector<double> mean;
    std::vector<double> std;

    std::size_t dim() const { return mean.size(); }
};

/// Floor applied to the per-dimension standard deviation.
inline constexpr double kStdFloor = 1e-8;

struct Dataset {
    std::vector<ItemFeatures> items;
    /// Ground-truth class per item; if present, covers exactly the item ids.
    std::optional<std::map<std::string, std::string>> labels;

    std::size_t dim() const;
    std::size_t total_frames() const;
};

/// Checks the Dataset invariants: non-empty, unique ids, per-item non-empty
/// uniform-dimension finite frames, labels (if any) covering the item set.
/// Throws EmptyInput / ShapeError / DataError / KeyError.
void validate_dataset(const Dataset& dataset);

/// Per-dimension mean and population standard deviation over all frames of
/// all items, std floored at kStdFloor.
MvnStats mvn_fit(const Dataset& training);

/// Returns a copy of data with every frame mapped to (x - mean) / std.
/// Item ids and labels are preserved.
Dataset mvn_apply(const MvnStats& stats, const Dataset& data);

enum class FeatureFormat { csv, binary };

/// Parses "csv" or "binary"; throws InvalidConfig otherwise.
FeatureFormat parse_feature_format(const std::string& name);

/// Feature files: CSV with header item_id,f0,...,f{D-1} (one row per frame,
/// rows sharing an item_id form that item's frame bag), or the RBFV binary
/// layout. Item order is first-appearance file order.
Dataset load_features(const std::filesystem::path& path, FeatureFormat format);
void save_features(const Dataset& dataset, const std::filesystem::path& path,
                   FeatureFormat format);

/// Labels file: CSV item_id,class_id. Order is preserved on save (dataset
/// item order when attached, insertion order otherwise).
std::map<std::string, std::string> load_labels(const std::filesystem::path& path);
void save_labels(const std::vector<std::pair<std::string, std::string>>& labels,
                 const std::filesystem::path& path);

/// MVN statistics file: CSV dim,mean,std with one row per dimension.
void save_mvn_stats(const MvnStats& stats, const std::filesystem::path& path);
MvnStats load_mvn_stats(const std::filesystem::path& path);

}  // namespace rbmc
