#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wasabi/wavelet.hpp"

namespace wasabi {

// Global image descriptor: every edge descriptor, grouped by semantic class.
struct ImageDescriptor {
  std::string image_id;
  std::map<std::int32_t, std::vector<EdgeDescriptor>> edges_by_class;

  int edge_count() const {
    int n = 0;
    for (const auto& [cls, v] : edges_by_class) n += static_cast<int>(v.size());
    return n;
  }
};

// Distance between two images. Images with no shared class are incomparable:
// value is +infinity and sorts after every finite distance.
struct ImageDistance {
  double value = std::numeric_limits<double>::infinity();
  std::size_t matched_pairs = 0;

  bool comparable() const { return matched_pairs > 0; }
};

struct MatchingConfig {
  // Per-unmatched-edge penalty for class-size surpluses. 0 means unmatched
  // edges contribute nothing (default behavior).
  double unmatched_penalty = 0.0;
};

// Minimum total cost of a rectangular assignment (min(m,n) pairs, each row
// and column used at most once). The value is the sum of the matched cells.
double assignment_cost(const Eigen::MatrixXd& cost);

// Optimal pairs, lexicographically smallest pair set among optima. Runs one
// solve per candidate prefix, so prefer assignment_cost when only the value
// matters.
std::vector<std::pair<int, int>> solve_assignment(const Eigen::MatrixXd& cost);

// Euclidean distances between the two descriptor lists, rows = a, cols = b.
Eigen::MatrixXd pairwise_distance_matrix(const std::vector<EdgeDescriptor>& a,
                                         const std::vector<EdgeDescriptor>& b);

// Per shared class, optimally assigns a's edges to b's; the distance is the
// mean of all matched descriptor distances pooled across classes.
ImageDistance image_distance(const ImageDescriptor& a, const ImageDescriptor& b,
                             const MatchingConfig& cfg = {});

}  // namespace wasabi
