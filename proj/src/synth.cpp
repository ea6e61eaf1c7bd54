#include "wasabi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "wasabi/errors.hpp"
#include "wasabi/rng.hpp"

namespace wasabi {

Shape make_polygon(std::int32_t class_id, std::vector<Eigen::Vector2d> vertices) {
  if (vertices.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  return Shape{class_id, std::move(vertices)};
}

Shape make_ellipse(std::int32_t class_id, double cx, double cy, double rx, double ry,
                   double rotation, int segments) {
  if (segments < 8) throw std::invalid_argument("ellipse needs at least 8 segments");
  if (rx <= 0.0 || ry <= 0.0) throw std::invalid_argument("ellipse radii must be positive");
  const double cr = std::cos(rotation), sr = std::sin(rotation);
  Shape s{class_id, {}};
  s.vertices.reserve(static_cast<std::size_t>(segments));
  for (int k = 0; k < segments; ++k) {
    const double t = 2.0 * std::numbers::pi * k / segments;
    const double ex = rx * std::cos(t), ey = ry * std::sin(t);
    s.vertices.emplace_back(cx + cr * ex - sr * ey, cy + sr * ex + cr * ey);
  }
  return s;
}

Shape make_skyline(std::int32_t class_id, const std::vector<Eigen::Vector2d>& breakpoints,
                   double width, double height) {
  if (breakpoints.size() < 2) throw std::invalid_argument("skyline needs at least 2 breakpoints");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (breakpoints[i].x() <= breakpoints[i - 1].x())
      throw std::invalid_argument("skyline breakpoints must have increasing x");
  Shape s{class_id, breakpoints};
  if (s.vertices.front().x() != 0.0) s.vertices.insert(s.vertices.begin(), {0.0, breakpoints.front().y()});
  if (s.vertices.back().x() != width) s.vertices.emplace_back(width, breakpoints.back().y());
  s.vertices.emplace_back(width, height);
  s.vertices.emplace_back(0.0, height);
  return s;
}

namespace {

// Even-odd scanline fill over pixel centers (col + 0.5, row + 0.5).  A
// center on the left crossing of a span is inside, on the right one it is
// not, so abutting shapes never double-claim a pixel and translating every
// vertex by an integer offset translates the rasterization exactly.
void rasterize(LabelMap& map, const Shape& shape) {
  const auto& v = shape.vertices;
  if (v.size() < 3) return;
  double min_y = v[0].y(), max_y = v[0].y();
  for (const auto& p : v) {
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }
  const int r0 = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)));
  const int r1 = std::min<int>(map.rows() - 1, static_cast<int>(std::floor(max_y - 0.5)));
  std::vector<double> xs;
  for (int r = r0; r <= r1; ++r) {
    const double y = r + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& a = v[i];
      const auto& b = v[(i + 1) % v.size()];
      if ((a.y() > y) == (b.y() > y)) continue;
      xs.push_back(a.x() + (y - a.y()) / (b.y() - a.y()) * (b.x() - a.x()));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      const int c0 = std::max(0, static_cast<int>(std::ceil(xs[i] - 0.5)));
      const int c1 = std::min<int>(map.cols() - 1, static_cast<int>(std::ceil(xs[i + 1] - 0.5)) - 1);
      for (int c = c0; c <= c1; ++c) map(r, c) = shape.class_id;
    }
  }
}

}  // namespace

LabelMap render_scene(const SceneSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) throw std::invalid_argument("scene must have positive extent");
  for (std::size_t i = 0; i < spec.shapes.size(); ++i)
    for (const auto& p : spec.shapes[i].vertices)
      if (p.x() < 0.0 || p.x() > spec.width || p.y() < 0.0 || p.y() > spec.height)
        throw ShapeOutOfBoundsError("shape " + std::to_string(i) + " vertex (" +
                                    std::to_string(p.x()) + ", " + std::to_string(p.y()) +
                                    ") outside " + std::to_string(spec.width) + "x" +
                                    std::to_string(spec.height) + " scene");
  LabelMap map = LabelMap::Constant(spec.height, spec.width, spec.background_class);
  for (const auto& shape : spec.shapes) rasterize(map, shape);
  return map;
}

LabelMap perturb_scene(const SceneSpec& spec, const PerturbationSpec& p) {
  if (spec.width <= 0 || spec.height <= 0) throw std::invalid_argument("scene must have positive extent");
  Rng rng(p.seed);
  LabelMap map = LabelMap::Constant(spec.height, spec.width, spec.background_class);
  for (const auto& shape : spec.shapes) {
    // The dropout draw happens for every shape so that toggling the
    // probability does not shift the jitter stream of surviving shapes.
    const bool dropped = rng.uniform() < p.class_dropout_prob;
    if (dropped) continue;
    Shape moved = shape;
    for (auto& vtx : moved.vertices) {
      vtx.x() += p.dx + rng.normal(0.0, p.jitter_sigma);
      vtx.y() += p.dy + rng.normal(0.0, p.jitter_sigma);
    }
    rasterize(map, moved);
  }
  return map;
}

namespace {

// Irregular spike radii keep the topmost boundary pixel of the rasterized
// ring pinned to one spike, so small vertex jitter cannot rotate the
// canonical start of the traced contour to the far side of the shape.
Shape random_star(Rng& rng, std::int32_t class_id, double cx, double cy, double radius) {
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const int points = rng.uniform_int(5, 9);
  Shape s{class_id, {}};
  for (int k = 0; k < 2 * points; ++k) {
    const double r = (k % 2 == 0) ? radius * rng.uniform(0.7, 1.0)
                                  : radius * rng.uniform(0.35, 0.55);
    const double t = phase + std::numbers::pi * k / points;
    s.vertices.emplace_back(cx + r * std::cos(t), cy + r * std::sin(t));
  }
  return s;
}

Shape random_ellipse(Rng& rng, std::int32_t class_id, double cx, double cy, double radius) {
  const double rx = radius;
  const double ry = radius * rng.uniform(0.5, 0.85);
  return make_ellipse(class_id, cx, cy, rx, ry, rng.uniform(0.0, std::numbers::pi));
}

Shape random_skyline(Rng& rng, std::int32_t class_id, int width, int height) {
  const int spans = rng.uniform_int(4, 8);
  std::vector<Eigen::Vector2d> bp;
  for (int k = 0; k <= spans; ++k) {
    const double x = static_cast<double>(width) * k / spans;
    const double y = height * rng.uniform(0.55, 0.8);
    bp.emplace_back(x, y);
  }
  return make_skyline(class_id, bp, width, height);
}

}  // namespace

std::vector<SceneSpec> generate_corpus(const CorpusSpec& spec) {
  if (spec.count <= 0) throw std::invalid_argument("corpus count must be positive");
  if (spec.classes.empty()) throw std::invalid_argument("corpus needs at least one foreground class");
  std::vector<SceneSpec> scenes;
  scenes.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(i)));
    SceneSpec scene;
    scene.seed = mix_seed(spec.seed, static_cast<std::uint64_t>(i));
    scene.width = spec.width;
    scene.height = spec.height;
    scene.background_class = spec.background_class;
    // One shape per class so every scene exposes the same class vocabulary
    // (like a street corpus does) and retrieval has to discriminate on edge
    // geometry rather than on which classes happen to be present.
    std::vector<std::int32_t> free_shapes(spec.classes.begin(), spec.classes.end());
    double sky_limit = spec.height;
    if (rng.uniform() < 0.5) {
      scene.shapes.push_back(random_skyline(rng, free_shapes.front(), spec.width, spec.height));
      free_shapes.erase(free_shapes.begin());
      sky_limit = 0.55 * spec.height - 6.0;  // highest possible skyline breakpoint
    }
    // Disjoint bounding circles above the skyline: overlapping blobs would
    // let jitter flip the contact topology and split traced edges
    // differently per query.
    std::vector<Eigen::Vector3d> placed;  // (cx, cy, radius)
    for (const std::int32_t cls : free_shapes) {
      double radius = std::min({rng.uniform(45.0, 80.0), spec.width / 2.0 - 2.0, sky_limit / 2.0 - 2.0});
      double cx = 0.0, cy = 0.0;
      for (int attempt = 0;; ++attempt) {
        cx = rng.uniform(radius, spec.width - radius);
        cy = rng.uniform(radius, sky_limit - radius);
        const bool clear = std::all_of(placed.begin(), placed.end(), [&](const auto& q) {
          return std::hypot(cx - q.x(), cy - q.y()) >= radius + q.z() + 6.0;
        });
        if (clear) break;
        // Small maps can leave no room at the current radius, so keep
        // shrinking; the cap turns a hopeless layout into an error instead
        // of an endless search.
        if (attempt % 40 == 39) radius = std::max(6.0, radius * 0.8);
        if (attempt >= 20000)
          throw std::runtime_error("could not place " + std::to_string(free_shapes.size()) +
                                   " disjoint shapes on a " + std::to_string(spec.width) + "x" +
                                   std::to_string(spec.height) + " scene");
      }
      placed.emplace_back(cx, cy, radius);
      if (rng.uniform() < 0.5)
        scene.shapes.push_back(random_star(rng, cls, cx, cy, radius));
      else
        scene.shapes.push_back(random_ellipse(rng, cls, cx, cy, radius));
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

Pose scene_pose(const CorpusSpec& spec, int index) {
  return Pose{spec.pose_spacing * index, 0.0, 0.0};
}

std::string scene_id(const CorpusSpec&, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%04d", index);
  return buf;
}

namespace {

using nlohmann::json;

std::vector<Eigen::Vector2d> read_points(const json& j) {
  std::vector<Eigen::Vector2d> pts;
  for (const auto& p : j) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return pts;
}

Shape read_shape(const json& j, int width, int height) {
  const auto cls = j.at("class").get<std::int32_t>();
  const auto kind = j.value("kind", std::string("polygon"));
  if (kind == "polygon") return make_polygon(cls, read_points(j.at("vertices")));
  if (kind == "ellipse")
    return make_ellipse(cls, j.at("cx").get<double>(), j.at("cy").get<double>(),
                        j.at("rx").get<double>(), j.at("ry").get<double>(),
                        j.value("rotation", 0.0), j.value("segments", 128));
  if (kind == "skyline")
    return make_skyline(cls, read_points(j.at("breakpoints")), width, height);
  throw IoError("unknown shape kind '" + kind + "'");
}

}  // namespace

SynthJob read_synth_job(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  try {
    SynthJob job;
    if (j.contains("corpus")) {
      const auto& c = j.at("corpus");
      CorpusSpec spec;
      spec.count = c.at("count").get<int>();
      spec.seed = c.value("seed", std::uint64_t{0});
      spec.width = c.value("width", spec.width);
      spec.height = c.value("height", spec.height);
      spec.background_class = c.value("background_class", spec.background_class);
      if (c.contains("classes")) spec.classes = c.at("classes").get<std::vector<std::int32_t>>();
      spec.pose_spacing = c.value("pose_spacing", spec.pose_spacing);
      job.corpus = spec;
    }
    for (const auto& s : j.value("scenes", json::array())) {
      SceneSpec scene;
      scene.seed = s.value("seed", std::uint64_t{0});
      scene.width = s.at("width").get<int>();
      scene.height = s.at("height").get<int>();
      scene.background_class = s.value("background_class", 0);
      for (const auto& sh : s.at("shapes")) scene.shapes.push_back(read_shape(sh, scene.width, scene.height));
      job.scenes.push_back(std::move(scene));
    }
    if (j.contains("perturbation")) {
      const auto& p = j.at("perturbation");
      PerturbationSpec spec;
      spec.dx = p.value("dx", 0.0);
      spec.dy = p.value("dy", 0.0);
      spec.jitter_sigma = p.value("jitter_sigma", 0.0);
      spec.class_dropout_prob = p.value("class_dropout_prob", 0.0);
      spec.seed = p.value("seed", std::uint64_t{0});
      job.perturbation = spec;
    }
    return job;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace wasabi
