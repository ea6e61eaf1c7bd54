#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

#include "wasabi/edges.hpp"
#include "wasabi/errors.hpp"

namespace wasabi {

struct DescriptorConfig {
  int resample_count = 64;       // N: samples per edge
  int levels = 1;                // Haar decomposition depth
  bool normalize_coords = false; // map coordinates to [0,1] by image size

  // Descriptor dimension: two axes, N coefficients each after subsampling.
  int dimension() const { return 2 * resample_count; }
};

// Edge resampled to a fixed number of points at uniform arc-length spacing.
// xs are column coordinates, ys are row coordinates, origin top-left.
struct ResampledEdge {
  std::int32_t class_id = 0;
  Eigen::VectorXd xs;
  Eigen::VectorXd ys;
};

// Semantic class plus a unit-norm coefficient vector (2N entries; 128 at the
// default N = 64).
struct EdgeDescriptor {
  std::int32_t class_id = 0;
  Eigen::VectorXd coeffs;
};

// Single-level undecimated Haar transform with circular extension:
//   approx[i] = (s[i] + s[i+1 mod n]) / sqrt(2)
//   detail[i] = (s[i] - s[i+1 mod n]) / sqrt(2)
// Redundant by one factor of two; the even-indexed subset of each band is the
// classical decimated transform.
template <typename Derived>
struct HaarBands {
  Eigen::VectorX<typename Derived::Scalar> approx;
  Eigen::VectorX<typename Derived::Scalar> detail;
};

template <typename Derived>
HaarBands<Derived> haar_undecimated(const Eigen::MatrixBase<Derived>& signal) {
  using Scalar = typename Derived::Scalar;
  const Eigen::VectorX<Scalar> s = signal;
  const Eigen::Index n = s.size();
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("haar transform needs an even signal length >= 2");

  const Scalar inv_sqrt2 = Scalar(1) / std::sqrt(Scalar(2));
  HaarBands<Derived> bands;
  bands.approx.resize(n);
  bands.detail.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar a = s[i];
    const Scalar b = s[(i + 1) % n];
    bands.approx[i] = (a + b) * inv_sqrt2;
    bands.detail[i] = (a - b) * inv_sqrt2;
  }
  return bands;
}

// Even-indexed coefficients of both bands, [approx; detail], n values total.
template <typename Derived>
Eigen::VectorX<typename Derived::Scalar> haar_even_coeffs(
    const Eigen::MatrixBase<Derived>& signal) {
  using Scalar = typename Derived::Scalar;
  const HaarBands<Derived> bands = haar_undecimated(signal);
  const Eigen::Index n = bands.approx.size();
  const Eigen::Index half = n / 2;

  Eigen::VectorX<Scalar> out(n);
  for (Eigen::Index i = 0; i < half; ++i) {
    out[i] = bands.approx[2 * i];
    out[half + i] = bands.detail[2 * i];
  }
  return out;
}

// Multi-level cascade: re-transforms the approximation band. Level 1 is
// haar_even_coeffs; output keeps size n with layout
// [approx_L; detail_L; ...; detail_1]. Requires n divisible by 2^levels.
template <typename Derived>
Eigen::VectorX<typename Derived::Scalar> haar_cascade(
    const Eigen::MatrixBase<Derived>& signal, int levels) {
  using Scalar = typename Derived::Scalar;
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  Eigen::VectorX<Scalar> out = haar_even_coeffs(signal);
  if (levels > 1) {
    const Eigen::Index half = out.size() / 2;
    if (half < 2 || half % 2 != 0)
      throw std::invalid_argument("signal length not divisible by 2^levels");
    out.head(half) = haar_cascade(Eigen::VectorX<Scalar>(out.head(half)), levels - 1);
  }
  return out;
}

// N points at uniform arc-length spacing along the edge polyline. Open edges
// pin the first and last samples to the edge endpoints; closed edges sample
// the full loop starting at the canonical start with no duplicated endpoint.
// Throws DegenerateEdgeError when the total arc length is zero.
ResampledEdge resample_edge(const SemanticEdge& edge, int n);

// Per-axis Haar cascade, concatenated [x-band; y-band] and L2-normalized.
EdgeDescriptor describe_edge(const ResampledEdge& edge, int levels = 1);

}  // namespace wasabi
