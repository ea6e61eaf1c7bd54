#include "wasabi/matching.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace wasabi {

namespace {

// Jonker-Volgenant style shortest augmenting path solver on a square matrix.
// Deterministic for a given input. rowsol[i] = column assigned to row i.
void jv_square(const Eigen::MatrixXd& cost, std::vector<int>& rowsol) {
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  rowsol.assign(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j]) rowsol[p[j] - 1] = j - 1;
}

// Rectangular solve via zero padding to a square; dummy rows/columns absorb
// the surplus at zero cost. Returns matched real pairs sorted ascending and
// the total recomputed as the sum of the matched cells.
std::pair<double, std::vector<std::pair<int, int>>> lap_solve(const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(cost.rows());
  const int n = static_cast<int>(cost.cols());
  if (m == 0 || n == 0) return {0.0, {}};

  const int k = std::max(m, n);
  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(k, k);
  padded.topLeftCorner(m, n) = cost;

  std::vector<int> rowsol;
  jv_square(padded, rowsol);

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(std::min(m, n));
  for (int i = 0; i < m; ++i)
    if (rowsol[i] < n) pairs.emplace_back(i, rowsol[i]);
  std::sort(pairs.begin(), pairs.end());

  double total = 0.0;
  for (const auto& [i, j] : pairs) total += cost(i, j);
  return {total, std::move(pairs)};
}

void check_costs(const Eigen::MatrixXd& cost) {
  if (cost.rows() < 1 || cost.cols() < 1)
    throw std::invalid_argument("assignment needs a non-empty cost matrix");
  if (!cost.allFinite()) throw std::invalid_argument("assignment costs must be finite");
}

}  // namespace

double assignment_cost(const Eigen::MatrixXd& cost) {
  check_costs(cost);
  return lap_solve(cost).first;
}

std::vector<std::pair<int, int>> solve_assignment(const Eigen::MatrixXd& cost) {
  check_costs(cost);
  const int m = static_cast<int>(cost.rows());
  const int n = static_cast<int>(cost.cols());
  const int slots = std::min(m, n);
  const double optimum = lap_solve(cost).first;
  const double tol = 1e-9 * (1.0 + std::abs(optimum));

  // Fix pairs slot by slot in ascending (row, col) order: the smallest
  // candidate pair that still admits an optimal completion is kept. Rows
  // before a fixed row can never appear later, so they are discarded.
  std::vector<std::pair<int, int>> result;
  std::vector<int> cols(n);
  for (int j = 0; j < n; ++j) cols[j] = j;
  int row_lo = 0;
  double prefix = 0.0;

  for (int slot = 0; slot < slots; ++slot) {
    const int remaining = slots - slot - 1;
    bool fixed = false;
    for (int i = row_lo; i + remaining < m && !fixed; ++i) {
      for (size_t jc = 0; jc < cols.size() && !fixed; ++jc) {
        const int j = cols[jc];
        // Candidate (i, j): rows < i dropped, row i and column j consumed.
        Eigen::MatrixXd sub(m - i - 1, static_cast<int>(cols.size()) - 1);
        for (int r = i + 1; r < m; ++r) {
          int cc = 0;
          for (size_t q = 0; q < cols.size(); ++q) {
            if (q == jc) continue;
            sub(r - i - 1, cc++) = cost(r, cols[q]);
          }
        }
        const double completion = remaining > 0 ? lap_solve(sub).first : 0.0;
        if (prefix + cost(i, j) + completion <= optimum + tol) {
          result.emplace_back(i, j);
          prefix += cost(i, j);
          row_lo = i + 1;
          cols.erase(cols.begin() + jc);
          fixed = true;
        }
      }
    }
    if (!fixed) throw std::logic_error("assignment refinement failed to fix a pair");
  }
  return result;
}

Eigen::MatrixXd pairwise_distance_matrix(const std::vector<EdgeDescriptor>& a,
                                         const std::vector<EdgeDescriptor>& b) {
  Eigen::MatrixXd cost(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j)
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (a[i].coeffs - b[j].coeffs).norm();
  return cost;
}

ImageDistance image_distance(const ImageDescriptor& a, const ImageDescriptor& b,
                             const MatchingConfig& cfg) {
  double sum = 0.0;
  std::size_t matched = 0;
  std::size_t penalized = 0;

  for (const auto& [cls, a_edges] : a.edges_by_class) {
    const auto it = b.edges_by_class.find(cls);
    if (it == b.edges_by_class.end()) continue;
    const auto& b_edges = it->second;
    if (a_edges.empty() || b_edges.empty()) continue;

    const Eigen::MatrixXd cost = pairwise_distance_matrix(a_edges, b_edges);
    sum += assignment_cost(cost);
    matched += std::min(a_edges.size(), b_edges.size());
    penalized += a_edges.size() > b_edges.size() ? a_edges.size() - b_edges.size()
                                                 : b_edges.size() - a_edges.size();
  }

  ImageDistance d;
  d.matched_pairs = matched;
  if (matched == 0) return d;  // no shared class: incomparable

  if (cfg.unmatched_penalty > 0.0) {
    sum += cfg.unmatched_penalty * static_cast<double>(penalized);
    d.value = sum / static_cast<double>(matched + penalized);
  } else {
    d.value = sum / static_cast<double>(matched);
  }
  return d;
}

}  // namespace wasabi
