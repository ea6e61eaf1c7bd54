#include "wasabi/wavelet.hpp"

#include <vector>

namespace wasabi {

ResampledEdge resample_edge(const SemanticEdge& edge, int n) {
  if (edge.size() < 2) throw DegenerateEdgeError("edge has fewer than 2 points");
  if (n < 2) throw std::invalid_argument("resample count must be >= 2");

  const std::vector<Pixel>& pts = edge.points;
  const size_t segments = edge.closed ? pts.size() : pts.size() - 1;

  std::vector<double> cum(segments + 1, 0.0);
  for (size_t i = 0; i < segments; ++i) {
    const Pixel& p = pts[i];
    const Pixel& q = pts[(i + 1) % pts.size()];
    const double dr = q.row - p.row;
    const double dc = q.col - p.col;
    cum[i + 1] = cum[i] + std::sqrt(dr * dr + dc * dc);
  }
  const double total = cum.back();
  if (total <= 0.0) throw DegenerateEdgeError("edge has zero arc length");

  ResampledEdge out;
  out.class_id = edge.class_id;
  out.xs.resize(n);
  out.ys.resize(n);

  const double step = edge.closed ? total / n : total / (n - 1);
  size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    if (!edge.closed && k == 0) {
      out.xs[0] = pts.front().col;
      out.ys[0] = pts.front().row;
      continue;
    }
    if (!edge.closed && k == n - 1) {
      out.xs[k] = pts.back().col;
      out.ys[k] = pts.back().row;
      continue;
    }
    const double s = step * k;
    while (seg + 1 < segments && cum[seg + 1] < s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? (s - cum[seg]) / len : 0.0;
    const Pixel& p = pts[seg];
    const Pixel& q = pts[(seg + 1) % pts.size()];
    out.xs[k] = p.col + t * (q.col - p.col);
    out.ys[k] = p.row + t * (q.row - p.row);
  }
  return out;
}

EdgeDescriptor describe_edge(const ResampledEdge& edge, int levels) {
  const Eigen::Index n = edge.xs.size();
  Eigen::VectorXd coeffs(2 * n);
  coeffs.head(n) = haar_cascade(edge.xs, levels);
  coeffs.tail(n) = haar_cascade(edge.ys, levels);

  const double norm = coeffs.norm();
  if (norm <= 0.0) throw DegenerateEdgeError("zero-norm descriptor");
  EdgeDescriptor d;
  d.class_id = edge.class_id;
  d.coeffs = coeffs / norm;
  return d;
}

}  // namespace wasabi
