#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "wasabi/types.hpp"

namespace wasabi {

// Ordered boundary curve owned by one semantic class. Consecutive points are
// 8-neighbors as traced; reconnection may bridge gaps up to
// min_neighbour_gap at the join seams. A closed edge wraps from the last
// point back to the first.
struct SemanticEdge {
  std::int32_t class_id = 0;
  std::vector<Pixel> points;
  bool closed = false;

  int size() const { return static_cast<int>(points.size()); }
  friend bool operator==(const SemanticEdge&, const SemanticEdge&) = default;
};

struct EdgeExtractionConfig {
  int min_edge_size = 50;         // inclusive point-count threshold
  double min_neighbour_gap = 5.0; // endpoint distance for reconnection
};

// One mask per class present in the map: pixels of that class with at least
// one 4-neighbor of a different class. Out-of-map neighbors do not count, so
// image-border pixels are only boundaries against interior transitions.
std::map<std::int32_t, Mask> detect_boundaries(const LabelMap& map);

// Decomposes each mask into ordered curves: open arcs between endpoints or
// junction pixels (degree > 2 splits the curve), and closed loops. Output is
// canonically oriented and sorted by (class id, point sequence).
std::vector<SemanticEdge> trace_edges(const std::map<std::int32_t, Mask>& masks);

std::vector<SemanticEdge> filter_short_edges(std::vector<SemanticEdge> edges,
                                             const EdgeExtractionConfig& cfg);

// Greedy globally-closest-pair joining of open-edge endpoints within one
// class, while any pair lies within min_neighbour_gap. Closed edges never
// participate. Result is re-canonicalized and re-sorted.
std::vector<SemanticEdge> reconnect_edges(std::vector<SemanticEdge> edges,
                                          const EdgeExtractionConfig& cfg);

// detect -> trace -> filter -> reconnect -> filter.
std::vector<SemanticEdge> extract_edges(const LabelMap& map,
                                        const EdgeExtractionConfig& cfg);

// Open edges start at the lexicographically smaller endpoint; closed edges
// start at their lexicographically smallest point and run clockwise in image
// coordinates (origin top-left, rows down).
void canonicalize_edge(SemanticEdge& edge);
void sort_edges(std::vector<SemanticEdge>& edges);

// Debug dump, one edge per line: class_id closed n r1 c1 r2 c2 ...
void write_edge_dump(const std::filesystem::path& path,
                     const std::vector<SemanticEdge>& edges);
std::vector<SemanticEdge> read_edge_dump(const std::filesystem::path& path);

}  // namespace wasabi
