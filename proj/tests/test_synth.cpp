#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "wasabi/edges.hpp"
#include "wasabi/errors.hpp"
#include "wasabi/synth.hpp"

using namespace wasabi;
namespace fs = std::filesystem;

namespace {

bool same(const LabelMap& a, const LabelMap& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

Shape rect(int32_t cls, double x0, double y0, double x1, double y1) {
  return make_polygon(cls, {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

int count_class(const LabelMap& m, int32_t cls) {
  return static_cast<int>((m.array() == cls).count());
}

fs::path temp_json(const std::string& text) {
  static int n = 0;
  const fs::path p = fs::temp_directory_path() /
                     ("wasabi_synth_" + std::to_string(::getpid()) + "_" +
                      std::to_string(n++) + ".json");
  std::ofstream out(p);
  out << text;
  return p;
}

}  // namespace

TEST_CASE("an empty scene is uniform background") {
  SceneSpec spec{0, 32, 16, 7, {}};
  const LabelMap map = render_scene(spec);
  REQUIRE(map.rows() == 16);
  REQUIRE(map.cols() == 32);
  CHECK((map.array() == 7).all());
}

TEST_CASE("an axis-aligned rectangle covers exactly its pixel grid") {
  SceneSpec spec{0, 64, 64, 0, {rect(1, 10, 5, 40, 25)}};
  const LabelMap map = render_scene(spec);
  CHECK(count_class(map, 1) == 30 * 20);
  CHECK(map(5, 10) == 1);
  CHECK(map(24, 39) == 1);
  CHECK(map(4, 10) == 0);
  CHECK(map(5, 9) == 0);
  CHECK(map(25, 10) == 0);
  CHECK(map(5, 40) == 0);
}

TEST_CASE("later shapes occlude earlier ones") {
  SceneSpec spec{0, 32, 32, 0, {rect(1, 4, 4, 20, 20), rect(2, 10, 10, 26, 26)}};
  const LabelMap map = render_scene(spec);
  CHECK(map(5, 5) == 1);
  CHECK(map(15, 15) == 2);
  CHECK(map(25, 25) == 2);
}

TEST_CASE("out-of-bounds shapes are rejected") {
  CHECK_THROWS_AS(render_scene({0, 64, 64, 0, {rect(1, 10, 5, 70, 25)}}),
                  ShapeOutOfBoundsError);
  CHECK_THROWS_AS(render_scene({0, 64, 64, 0, {rect(1, 10, -1, 40, 25)}}),
                  ShapeOutOfBoundsError);
  CHECK_THROWS_AS(render_scene({0, 0, 64, 0, {}}), std::invalid_argument);
}

TEST_CASE("a zero perturbation reproduces the clean render") {
  SceneSpec spec{0, 64, 64, 0,
                 {rect(1, 10, 5, 40, 25), make_ellipse(2, 32, 45, 12, 8, 0.3)}};
  CHECK(same(perturb_scene(spec, {}), render_scene(spec)));
  PerturbationSpec with_seed;
  with_seed.seed = 123456;  // the seed alone must not change anything
  CHECK(same(perturb_scene(spec, with_seed), render_scene(spec)));
}

TEST_CASE("integer translation shifts traced edges exactly") {
  SceneSpec spec{0, 64, 64, 0,
                 {rect(1, 10, 8, 40, 28), make_polygon(2, {{20, 40}, {44, 40}, {32, 56}})}};
  PerturbationSpec pert;
  pert.dx = 5.0;
  pert.dy = 0.0;
  const LabelMap before = render_scene(spec);
  const LabelMap after = perturb_scene(spec, pert);

  EdgeExtractionConfig cfg;
  cfg.min_edge_size = 10;
  const auto e1 = extract_edges(before, cfg);
  const auto e2 = extract_edges(after, cfg);
  REQUIRE(e1.size() == e2.size());
  REQUIRE(!e1.empty());
  for (size_t i = 0; i < e1.size(); ++i) {
    CHECK(e2[i].class_id == e1[i].class_id);
    CHECK(e2[i].closed == e1[i].closed);
    REQUIRE(e2[i].points.size() == e1[i].points.size());
    for (size_t k = 0; k < e1[i].points.size(); ++k) {
      CHECK(e2[i].points[k].row == e1[i].points[k].row);
      CHECK(e2[i].points[k].col == e1[i].points[k].col + 5);
    }
  }
}

TEST_CASE("perturbation is deterministic in its seed") {
  SceneSpec spec{0, 64, 64, 0, {make_ellipse(1, 30, 30, 14, 9, 0.7)}};
  PerturbationSpec pert;
  pert.jitter_sigma = 1.5;
  pert.seed = 10;
  const LabelMap a = perturb_scene(spec, pert);
  CHECK(same(a, perturb_scene(spec, pert)));

  pert.seed = 11;
  CHECK_FALSE(same(a, perturb_scene(spec, pert)));
  CHECK_FALSE(same(a, render_scene(spec)));
}

TEST_CASE("full dropout leaves only background") {
  SceneSpec spec{0, 48, 48, 3, {rect(1, 4, 4, 20, 20), make_ellipse(2, 32, 32, 8, 6)}};
  PerturbationSpec pert;
  pert.class_dropout_prob = 1.0;
  CHECK((perturb_scene(spec, pert).array() == 3).all());
}

TEST_CASE("shape constructors validate their inputs") {
  CHECK_THROWS_AS(make_polygon(1, {{0, 0}, {1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(make_ellipse(1, 10, 10, 0.0, 5.0), std::invalid_argument);
  CHECK_THROWS_AS(make_ellipse(1, 10, 10, 5.0, 5.0, 0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(make_skyline(1, {{0, 10}, {0, 20}}, 64, 48), std::invalid_argument);
  CHECK_THROWS_AS(make_skyline(1, {{0, 10}}, 64, 48), std::invalid_argument);
}

TEST_CASE("skylines close down to the bottom of the map") {
  const Shape s = make_skyline(5, {{0, 30}, {32, 40}, {64, 35}}, 64, 48);
  REQUIRE(s.vertices.size() == 5);
  CHECK(s.vertices[3].isApprox(Eigen::Vector2d(64, 48)));
  CHECK(s.vertices[4].x() == 0.0);
  CHECK(s.vertices[4].y() == 48.0);

  const LabelMap map = render_scene({0, 64, 48, 0, {s}});
  CHECK(map(47, 0) == 5);   // bottom row is inside
  CHECK(map(0, 0) == 0);    // sky stays background
  CHECK(map(46, 63) == 5);
}

TEST_CASE("ellipse rasterization approximates the continuous area") {
  const double rx = 50, ry = 30;
  SceneSpec spec{0, 256, 256, 0, {make_ellipse(1, 128, 128, rx, ry)}};
  const double area = count_class(render_scene(spec), 1);
  const double expect = std::numbers::pi * rx * ry;
  CHECK(std::abs(area - expect) / expect < 0.02);
}

TEST_CASE("generated corpora share one class vocabulary") {
  CorpusSpec spec;
  spec.count = 6;
  spec.seed = 99;
  spec.width = 320;
  spec.height = 320;
  spec.classes = {3, 5, 7};
  const auto scenes = generate_corpus(spec);
  REQUIRE(scenes.size() == 6);
  for (const auto& scene : scenes) {
    CHECK(scene.width == 320);
    std::vector<int32_t> classes;
    for (const auto& sh : scene.shapes) classes.push_back(sh.class_id);
    std::sort(classes.begin(), classes.end());
    CHECK(classes == spec.classes);  // exactly one shape per class
    CHECK_NOTHROW(render_scene(scene));
  }

  const auto again = generate_corpus(spec);
  REQUIRE(again.size() == scenes.size());
  for (size_t i = 0; i < scenes.size(); ++i) {
    REQUIRE(again[i].shapes.size() == scenes[i].shapes.size());
    for (size_t s = 0; s < scenes[i].shapes.size(); ++s) {
      CHECK(again[i].shapes[s].class_id == scenes[i].shapes[s].class_id);
      REQUIRE(again[i].shapes[s].vertices.size() == scenes[i].shapes[s].vertices.size());
      for (size_t v = 0; v < scenes[i].shapes[s].vertices.size(); ++v)
        CHECK((again[i].shapes[s].vertices[v] - scenes[i].shapes[s].vertices[v]).norm() == 0.0);
    }
  }

  CHECK_THROWS_AS(generate_corpus(CorpusSpec{}), std::invalid_argument);
}

TEST_CASE("scene poses march along a line") {
  CorpusSpec spec;
  spec.pose_spacing = 2.5;
  CHECK(scene_pose(spec, 0) == Pose{0, 0, 0});
  CHECK(scene_pose(spec, 4) == Pose{10.0, 0, 0});
  CHECK(scene_id(spec, 7) == "scene_0007");
  CHECK(scene_id(spec, 1234) == "scene_1234");
}

TEST_CASE("synth job files parse") {
  const fs::path p = temp_json(R"({
    "corpus": {"count": 3, "seed": 42, "width": 128, "height": 96,
               "background_class": 9, "classes": [2, 4], "pose_spacing": 2.5},
    "scenes": [{
      "seed": 7, "width": 64, "height": 48, "background_class": 1,
      "shapes": [
        {"class": 2, "kind": "polygon", "vertices": [[10,5],[40,5],[40,25],[10,25]]},
        {"class": 3, "kind": "ellipse", "cx": 32, "cy": 24, "rx": 10, "ry": 6, "rotation": 0.5},
        {"class": 4, "kind": "skyline", "breakpoints": [[0,30],[32,40],[64,35]]}
      ]
    }],
    "perturbation": {"dx": 1.5, "dy": -2, "jitter_sigma": 0.25,
                     "class_dropout_prob": 0.1, "seed": 99}
  })");
  const SynthJob job = read_synth_job(p);
  fs::remove(p);

  REQUIRE(job.corpus.has_value());
  CHECK(job.corpus->count == 3);
  CHECK(job.corpus->seed == 42);
  CHECK(job.corpus->width == 128);
  CHECK(job.corpus->height == 96);
  CHECK(job.corpus->background_class == 9);
  CHECK(job.corpus->classes == std::vector<int32_t>{2, 4});
  CHECK(job.corpus->pose_spacing == 2.5);

  REQUIRE(job.scenes.size() == 1);
  const SceneSpec& s = job.scenes[0];
  CHECK(s.seed == 7);
  CHECK(s.background_class == 1);
  REQUIRE(s.shapes.size() == 3);
  CHECK(s.shapes[0].class_id == 2);
  CHECK(s.shapes[0].vertices.size() == 4);
  CHECK(s.shapes[1].vertices.size() == 128);  // default segment count
  CHECK(s.shapes[2].class_id == 4);
  CHECK(s.shapes[2].vertices.back().isApprox(Eigen::Vector2d(0, 48)));

  REQUIRE(job.perturbation.has_value());
  CHECK(job.perturbation->dx == 1.5);
  CHECK(job.perturbation->dy == -2.0);
  CHECK(job.perturbation->jitter_sigma == 0.25);
  CHECK(job.perturbation->class_dropout_prob == 0.1);
  CHECK(job.perturbation->seed == 99);
}

TEST_CASE("synth job files reject garbage") {
  CHECK_THROWS_AS(read_synth_job("/nonexistent/job.json"), IoError);

  const fs::path bad = temp_json("{ not json");
  CHECK_THROWS_AS(read_synth_job(bad), IoError);
  fs::remove(bad);

  const fs::path kind = temp_json(R"({"scenes": [{"width": 8, "height": 8,
    "shapes": [{"class": 1, "kind": "blob"}]}]})");
  CHECK_THROWS_AS(read_synth_job(kind), IoError);
  fs::remove(kind);

  const fs::path missing = temp_json(R"({"scenes": [{"height": 8, "shapes": []}]})");
  CHECK_THROWS_AS(read_synth_job(missing), IoError);
  fs::remove(missing);
}
