#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wavedbn/image.hpp"

namespace wavedbn {

/// Images with class labels in [0, n_classes).
///
/// `class_ids` keeps the identifier each label had in the source data (the
/// COIL-20 object number, the USPS digit) so subsets can be selected by the
/// names people use for them.
struct LabeledDataset {
    std::vector<Image> images;
    std::vector<int> labels;
    int n_classes = 0;
    std::vector<int> class_ids;
    std::vector<std::string> class_names;

    std::size_t size() const { return images.size(); }

    /// Checks the invariants; throws ValidationError.
    void validate() const;
};

inline constexpr int kCoilObjects = 20;
inline constexpr int kCoilViews = 72;
inline constexpr int kCoilSide = 128;

/// Loads COIL-20 from a directory of `obj<k>__<angle>.pgm` files (k in
/// 1..20, class k-1). Requires exactly 72 views per object, each 128x128.
/// Samples are ordered by (object, angle); pixels are scaled to [0,1].
LabeledDataset load_coil20(const std::filesystem::path& dir);

/// Loads a directory whose sub-directories are classes (sorted by name) and
/// contain `.pgm` files (sorted by name). All images must share dimensions.
LabeledDataset load_pgm_class_dirs(const std::filesystem::path& dir);

/// Parses one USPS text file. Each non-blank line holds an integer label
/// followed by either 256 whitespace-separated values or sparse 1-based
/// `index:value` pairs (omitted entries are zero). Labels 1..10 are mapped
/// to 0..9 when no 0 label occurs and a 10 does. Pixels are mapped from the
/// detected source range ([-1,1], [0,2] or [0,1]) onto [0,1].
LabeledDataset load_usps_file(const std::filesystem::path& path);

/// The standard train/test pair.
std::pair<LabeledDataset, LabeledDataset> load_usps(const std::filesystem::path& train,
                                                    const std::filesystem::path& test);

struct SplitSpec {
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
    bool stratified = true;

    void validate() const;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Per-class seeded shuffle; round(train_fraction * class_count) samples of
/// each class go to train, clamped so both sides get at least one. Indices
/// are listed class by class in shuffled order.
SplitIndices split_indices(const LabeledDataset& ds, const SplitSpec& spec);

std::pair<LabeledDataset, LabeledDataset> split_holdout(const LabeledDataset& ds, const SplitSpec& spec);

/// The samples at `indices`, in that order, with class metadata kept.
LabeledDataset subset(const LabeledDataset& ds, std::span<const std::size_t> indices);

/// Keeps the classes whose class_ids appear in `keep` and relabels them
/// 0..keep.size()-1 in `keep` order.
LabeledDataset select_classes(const LabeledDataset& ds, std::span<const int> keep);

} // namespace wavedbn
