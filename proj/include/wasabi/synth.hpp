#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wasabi/retrieval.hpp"
#include "wasabi/types.hpp"

namespace wasabi {

// Every shape is a simple polygon in continuous (x, y) = (col, row)
// coordinates; ellipses and skylines are polygonalized on construction so
// that vertex jitter applies uniformly across shape kinds.
struct Shape {
  std::int32_t class_id = 0;
  std::vector<Eigen::Vector2d> vertices;
};

Shape make_polygon(std::int32_t class_id, std::vector<Eigen::Vector2d> vertices);
Shape make_ellipse(std::int32_t class_id, double cx, double cy, double rx, double ry,
                   double rotation = 0.0, int segments = 128);
// Piecewise-linear height profile; the region below the curve down to the
// map bottom is filled. Breakpoints must span x = 0 .. width.
Shape make_skyline(std::int32_t class_id, const std::vector<Eigen::Vector2d>& breakpoints,
                   double width, double height);

struct SceneSpec {
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  std::int32_t background_class = 0;
  std::vector<Shape> shapes;  // later shapes occlude earlier ones
};

struct PerturbationSpec {
  double dx = 0.0, dy = 0.0;        // translation in pixels
  double jitter_sigma = 0.0;        // Gaussian noise on boundary vertices
  double class_dropout_prob = 0.0;  // independent per-shape dropout
  std::uint64_t seed = 0;
};

// Rasterizes pixel centers (col + 0.5, row + 0.5) with the even-odd rule.
// Throws ShapeOutOfBoundsError when a shape does not fit the map bounds.
LabelMap render_scene(const SceneSpec& spec);

// Translation + vertex jitter + shape dropout, then rasterization. Shapes
// pushed past the border are clipped, not rejected. Deterministic for a
// given perturbation seed; an all-zero perturbation reproduces render_scene.
LabelMap perturb_scene(const SceneSpec& spec, const PerturbationSpec& p);

// Procedural corpus of random scenes with regularly spaced ground-truth
// poses.  Every scene carries exactly one shape per listed class (half the
// scenes render the first class as a skyline), so the whole corpus shares
// one class vocabulary and retrieval discriminates on edge geometry.
struct CorpusSpec {
  int count = 0;
  std::uint64_t seed = 0;
  int width = 512;
  int height = 512;
  std::int32_t background_class = 0;
  std::vector<std::int32_t> classes = {1, 2, 3, 4, 5, 6, 7, 8};
  double pose_spacing = 10.0;  // meters between consecutive scene poses
};

std::vector<SceneSpec> generate_corpus(const CorpusSpec& spec);
Pose scene_pose(const CorpusSpec& spec, int index);
std::string scene_id(const CorpusSpec& spec, int index);

// JSON scene file: corpus block and/or explicit scenes, plus an optional
// perturbation block used to derive query maps.
struct SynthJob {
  std::optional<CorpusSpec> corpus;
  std::vector<SceneSpec> scenes;
  std::optional<PerturbationSpec> perturbation;
};

SynthJob read_synth_job(const std::filesystem::path& path);

}  // namespace wasabi
