#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <vector>

#include "wasabi/types.hpp"

namespace wasabi {

enum class Connectivity { four = 4, eight = 8 };

struct CleanupConfig {
  int min_blob_size = 50;
  std::set<std::int32_t> dynamic_classes;
  Connectivity connectivity = Connectivity::four;
};

// Connected components of equal-label pixels.
struct ComponentMap {
  // Component index per pixel, numbered in row-major discovery order.
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> id;
  std::vector<int> size;            // pixel count per component
  std::vector<std::int32_t> label;  // class id per component
  int count() const { return static_cast<int>(size.size()); }
};

ComponentMap connected_components(const LabelMap& map, Connectivity conn);

bool is_valid_label_map(const LabelMap& map, std::int32_t class_count);

// Reassigns undersized components, smallest first, to the adjacent label with
// the longest shared boundary; sizes are recomputed after each merge.
LabelMap merge_small_blobs(const LabelMap& map, const CleanupConfig& cfg);

// Replaces every dynamic-class pixel with the label of its nearest
// non-dynamic pixel (Euclidean distance on pixel centers; ties resolved by
// row-major scan order of the source pixels). Throws AllDynamicError when no
// source pixel exists.
LabelMap remove_dynamic_classes(const LabelMap& map, const CleanupConfig& cfg);

// Dynamic removal first, then blob merging, so infill fragments are also
// subject to the size filter.
LabelMap clean_label_map(const LabelMap& map, const CleanupConfig& cfg);

// File formats: 8-bit single-channel PGM (P5 or P2, class id = pixel value)
// and a plain-text grid ("width height" line, then rows of integers).
// Dispatch is by content for reads (PGM magic bytes), by extension for writes.
LabelMap read_label_map(const std::filesystem::path& path);
void write_label_map(const std::filesystem::path& path, const LabelMap& map);

// One class id per line; '#' starts a comment.
std::set<std::int32_t> read_class_set(const std::filesystem::path& path);

}  // namespace wasabi
