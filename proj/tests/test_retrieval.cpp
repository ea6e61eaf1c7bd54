#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wasabi/errors.hpp"
#include "wasabi/retrieval.hpp"
#include "wasabi/rng.hpp"

using namespace wasabi;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("wasabi_retrieval_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
  fs::path file(const std::string& name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Eigen::VectorXd unit_angle(double theta) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
  v[0] = std::cos(theta);
  v[1] = std::sin(theta);
  return v;
}

ImageDescriptor one_edge(std::string id, int32_t cls, const Eigen::VectorXd& coeffs) {
  ImageDescriptor d;
  d.image_id = std::move(id);
  d.edges_by_class[cls].push_back({cls, coeffs});
  return d;
}

// A query run with a single relevant hit at `hit_rank` (1-based) in a ranking
// of `depth` entries; filler entries reuse globally-far poses.
QueryRun run_with_hit(const std::string& qid, const std::string& hit_id, size_t hit_rank,
                      size_t depth) {
  QueryRun qr{qid, {}};
  for (size_t r = 1; r <= depth; ++r) {
    if (r == hit_rank)
      qr.ranking.push_back({hit_id, 0.1 * static_cast<double>(r)});
    else
      qr.ranking.push_back({qid + "_far" + std::to_string(r), 0.1 * static_cast<double>(r)});
  }
  return qr;
}

void add_far_poses(std::map<std::string, Pose>& poses, const QueryRun& qr) {
  for (const RankedMatch& m : qr.ranking)
    if (!poses.count(m.image_id)) poses[m.image_id] = {0.0, 1e6, 0.0};
}

}  // namespace

TEST_CASE("database build sorts by id and validates") {
  std::vector<ImageDescriptor> imgs{one_edge("b", 1, unit_angle(0.0)),
                                    one_edge("a", 1, unit_angle(0.5))};
  const auto db = RetrievalDatabase::build(imgs);
  REQUIRE(db.size() == 2);
  CHECK(db.entries()[0].descriptor.image_id == "a");
  CHECK(db.entries()[1].descriptor.image_id == "b");
  CHECK_FALSE(db.entries()[0].pose.has_value());

  CHECK_THROWS_AS(RetrievalDatabase::build({}), EmptyDatabaseError);
  CHECK_THROWS_AS(RetrievalDatabase::build({one_edge("a", 1, unit_angle(0)),
                                            one_edge("a", 1, unit_angle(1))}),
                  DuplicateIdError);

  std::map<std::string, Pose> poses{{"a", {1, 2, 3}}};
  CHECK_THROWS_AS(RetrievalDatabase::build(imgs, &poses), MissingPoseError);
  poses["b"] = {4, 5, 6};
  const auto with_poses = RetrievalDatabase::build(imgs, &poses);
  CHECK(with_poses.entries()[0].pose == Pose{1, 2, 3});
  CHECK(with_poses.entries()[1].pose == Pose{4, 5, 6});
}

TEST_CASE("query orders by distance then id and truncates to k") {
  const auto db = RetrievalDatabase::build({one_edge("far", 1, unit_angle(1.0)),
                                            one_edge("self", 1, unit_angle(0.0)),
                                            one_edge("near", 1, unit_angle(0.4)),
                                            one_edge("alien", 2, unit_angle(0.0))});
  const auto q = one_edge("q", 1, unit_angle(0.0));

  const auto top = query(db, q, 10);
  REQUIRE(top.size() == 4);
  CHECK(top[0].image_id == "self");
  CHECK(top[0].distance == 0.0);
  CHECK(top[1].image_id == "near");
  CHECK(top[2].image_id == "far");
  CHECK(top[3].image_id == "alien");  // incomparable sorts last
  CHECK(std::isinf(top[3].distance));

  CHECK(query(db, q, 2).size() == 2);

  // Equal distances fall back to id order.
  const auto tie_db = RetrievalDatabase::build(
      {one_edge("z", 1, unit_angle(0.3)), one_edge("y", 1, unit_angle(0.3))});
  const auto tied = query(tie_db, q, 2);
  CHECK(tied[0].image_id == "y");
  CHECK(tied[1].image_id == "z");
}

TEST_CASE("database bytes do not depend on input order") {
  Rng rng(5);
  std::vector<ImageDescriptor> imgs;
  for (int i = 0; i < 6; ++i) {
    Eigen::VectorXd v(4);
    for (int k = 0; k < 4; ++k) v[k] = rng.uniform(-1.0, 1.0);
    imgs.push_back(one_edge("img" + std::to_string(i), 1 + i % 3, v / v.norm()));
  }
  auto shuffled = imgs;
  std::reverse(shuffled.begin(), shuffled.end());

  TempDir tmp;
  save_database(tmp.file("a.db"), RetrievalDatabase::build(imgs));
  save_database(tmp.file("b.db"), RetrievalDatabase::build(shuffled));
  CHECK(slurp(tmp.file("a.db")) == slurp(tmp.file("b.db")));
}

TEST_CASE("recall at N counts first-hit ranks") {
  std::map<std::string, Pose> query_poses, db_poses;
  std::vector<QueryRun> run;
  const size_t hit_ranks[] = {1, 2, 6, 30};
  for (int qi = 0; qi < 4; ++qi) {
    const std::string qid = "q" + std::to_string(qi);
    const std::string hid = "hit" + std::to_string(qi);
    query_poses[qid] = {100.0 * qi, 0.0, 0.0};
    db_poses[hid] = {100.0 * qi + 1.0, 0.0, 0.0};  // within epsilon = 5
    run.push_back(run_with_hit(qid, hid, hit_ranks[qi], 30));
    add_far_poses(db_poses, run.back());
  }

  const auto recall = recall_at_n(run, query_poses, db_poses, {});
  REQUIRE(recall.size() == 4);
  CHECK(recall.at(1) == 25.0);
  CHECK(recall.at(5) == 50.0);
  CHECK(recall.at(10) == 75.0);
  CHECK(recall.at(20) == 75.0);

  EvalConfig wide;
  wide.recall_ns = {1, 5, 10, 20, 30};
  CHECK(recall_at_n(run, query_poses, db_poses, wide).at(30) == 100.0);

  double prev = 0.0;
  for (const auto& [n, v] : recall_at_n(run, query_poses, db_poses, wide)) {
    CHECK(v >= prev);  // non-decreasing in N
    prev = v;
  }
}

TEST_CASE("average precision hand cases") {
  std::map<std::string, Pose> query_poses, db_poses;
  EvalConfig cfg;

  SUBCASE("perfect ranking scores 100") {
    query_poses["q"] = {0, 0, 0};
    QueryRun qr = run_with_hit("q", "h1", 1, 10);
    qr.ranking[1].image_id = "h2";
    db_poses["h1"] = {1, 0, 0};
    db_poses["h2"] = {2, 0, 0};
    add_far_poses(db_poses, qr);
    CHECK(mean_average_precision({qr}, query_poses, db_poses, cfg) == 100.0);
  }

  SUBCASE("single relevant at rank 2 scores 50") {
    query_poses["q"] = {0, 0, 0};
    QueryRun qr = run_with_hit("q", "h1", 2, 10);
    db_poses["h1"] = {1, 0, 0};
    add_far_poses(db_poses, qr);
    CHECK(mean_average_precision({qr}, query_poses, db_poses, cfg) == 50.0);
  }

  SUBCASE("three queries average to exactly 75") {
    // AP values 0.5, 0.75 and 1.0.
    std::vector<QueryRun> run;

    query_poses["q0"] = {0, 0, 0};
    run.push_back(run_with_hit("q0", "a1", 2, 6));
    db_poses["a1"] = {1, 0, 0};

    query_poses["q1"] = {100, 0, 0};
    run.push_back(run_with_hit("q1", "b1", 1, 6));
    run.back().ranking[3].image_id = "b2";
    db_poses["b1"] = {101, 0, 0};
    db_poses["b2"] = {102, 0, 0};

    query_poses["q2"] = {200, 0, 0};
    run.push_back(run_with_hit("q2", "c1", 1, 6));
    run.back().ranking[1].image_id = "c2";
    run.back().ranking[2].image_id = "c3";
    db_poses["c1"] = {201, 0, 0};
    db_poses["c2"] = {202, 0, 0};
    db_poses["c3"] = {199, 0, 0};

    for (const auto& qr : run) add_far_poses(db_poses, qr);
    CHECK(mean_average_precision(run, query_poses, db_poses, cfg) == 75.0);
  }

  SUBCASE("relevant entries outside the ranking still count toward R") {
    query_poses["q"] = {0, 0, 0};
    QueryRun qr = run_with_hit("q", "h1", 1, 5);
    db_poses["h1"] = {1, 0, 0};
    db_poses["h_unranked"] = {2, 0, 0};  // relevant, never retrieved
    add_far_poses(db_poses, qr);
    CHECK(mean_average_precision({qr}, query_poses, db_poses, cfg) == 50.0);
  }

  SUBCASE("queries with nothing relevant anywhere are excluded") {
    query_poses["q0"] = {0, 0, 0};
    QueryRun qr0 = run_with_hit("q0", "h1", 1, 5);
    db_poses["h1"] = {1, 0, 0};
    query_poses["q_lost"] = {5000, 0, 0};
    QueryRun qr1 = run_with_hit("q_lost", "none", 1, 5);
    db_poses["none"] = {0, 1e6, 0};
    add_far_poses(db_poses, qr0);
    add_far_poses(db_poses, qr1);
    CHECK(mean_average_precision({qr0, qr1}, query_poses, db_poses, cfg) == 100.0);
  }

  SUBCASE("throws when no query has any relevant entry") {
    query_poses["q"] = {0, 0, 0};
    QueryRun qr = run_with_hit("q", "h", 1, 3);
    db_poses["h"] = {0, 1e6, 0};
    add_far_poses(db_poses, qr);
    CHECK_THROWS_AS(mean_average_precision({qr}, query_poses, db_poses, cfg),
                    NoRelevantAnywhereError);
  }
}

TEST_CASE("database file round trip") {
  Rng rng(9);
  std::vector<ImageDescriptor> imgs;
  for (int i = 0; i < 4; ++i) {
    ImageDescriptor d;
    d.image_id = "scene_" + std::to_string(i);
    for (int c = 1; c <= 2; ++c) {
      Eigen::VectorXd v(8);
      for (int k = 0; k < 8; ++k) v[k] = rng.uniform(-1.0, 1.0);
      d.edges_by_class[c].push_back({c, v / v.norm()});
    }
    imgs.push_back(std::move(d));
  }
  std::map<std::string, Pose> poses;
  for (const auto& d : imgs) poses[d.image_id] = {rng.uniform(0, 100), rng.uniform(0, 100), 0};

  TempDir tmp;
  SUBCASE("with poses") {
    save_database(tmp.file("db.bin"), RetrievalDatabase::build(imgs, &poses));
    const auto loaded = load_database(tmp.file("db.bin"));
    REQUIRE(loaded.size() == imgs.size());
    for (size_t i = 0; i < imgs.size(); ++i) {
      const auto& e = loaded.entries()[i];
      CHECK(e.pose == poses.at(e.descriptor.image_id));
      // Coefficients come back float32-quantized, identically on both sides.
      const auto& orig = imgs[i].edges_by_class.at(1)[0].coeffs;
      const auto& back = e.descriptor.edges_by_class.at(1)[0].coeffs;
      for (int k = 0; k < 8; ++k) CHECK(back[k] == static_cast<double>(static_cast<float>(orig[k])));
    }
    // A second save of the loaded database reproduces the bytes exactly.
    save_database(tmp.file("db2.bin"), loaded);
    CHECK(slurp(tmp.file("db.bin")) == slurp(tmp.file("db2.bin")));
  }
  SUBCASE("without poses") {
    save_database(tmp.file("db.bin"), RetrievalDatabase::build(imgs));
    const auto loaded = load_database(tmp.file("db.bin"));
    for (const auto& e : loaded.entries()) CHECK_FALSE(e.pose.has_value());
  }
}

TEST_CASE("database loading rejects garbage") {
  TempDir tmp;
  {
    std::ofstream out(tmp.file("bad.bin"), std::ios::binary);
    out << "NOPE then some bytes";
  }
  CHECK_THROWS_AS(load_database(tmp.file("bad.bin")), IoError);

  save_database(tmp.file("ok.bin"),
                RetrievalDatabase::build({one_edge("a", 1, unit_angle(0.0))}));
  const std::string full = slurp(tmp.file("ok.bin"));
  {
    std::ofstream out(tmp.file("cut.bin"), std::ios::binary);
    out.write(full.data(), static_cast<std::streamsize>(full.size() / 2));
  }
  CHECK_THROWS_AS(load_database(tmp.file("cut.bin")), IoError);
  CHECK_THROWS_AS(load_database(tmp.file("missing.bin")), IoError);
}

TEST_CASE("poses csv round trip keeps doubles exact") {
  TempDir tmp;
  std::map<std::string, Pose> poses{{"a", {0.1, -2.5, 1e-17}},
                                    {"b", {123456.789012345, 0.0, -7.25}}};
  write_poses_csv(tmp.file("p.csv"), poses);
  const auto back = read_poses_csv(tmp.file("p.csv"));
  REQUIRE(back.size() == 2);
  CHECK(back.at("a") == poses.at("a"));
  CHECK(back.at("b") == poses.at("b"));

  {
    std::ofstream out(tmp.file("dup.csv"));
    out << "id,x,y,z\nq,0,0,0\nq,1,1,1\n";
  }
  CHECK_THROWS_AS(read_poses_csv(tmp.file("dup.csv")), DuplicateIdError);
  CHECK_THROWS_AS(read_poses_csv(tmp.file("absent.csv")), IoError);
}

TEST_CASE("ranking csv round trip") {
  TempDir tmp;
  std::vector<QueryRun> run{{"q0", {{"a", 0.25}, {"b", 0.5}}}, {"q1", {{"c", 0.125}}}};
  write_ranking_csv(tmp.file("r.csv"), run);
  const auto back = read_ranking_csv(tmp.file("r.csv"));
  REQUIRE(back.size() == 2);
  CHECK(back[0].query_id == "q0");
  CHECK(back[0].ranking[1].image_id == "b");
  CHECK(back[0].ranking[1].distance == 0.5);
  CHECK(back[1].ranking[0].distance == 0.125);

  {
    std::ofstream out(tmp.file("bad.csv"));
    out << "query_id,rank,db_id,distance\nq0,1,a,0.5\nq0,3,b,0.6\n";
  }
  CHECK_THROWS_AS(read_ranking_csv(tmp.file("bad.csv")), IoError);
}

TEST_CASE("metrics outputs") {
  TempDir tmp;
  const std::map<int, double> recall{{1, 25.0}, {5, 50.0}, {10, 75.0}};

  write_metrics_csv(tmp.file("m.csv"), recall, 75.0);
  CHECK(slurp(tmp.file("m.csv")) ==
        "metric,N,value\nrecall,1,25\nrecall,5,50\nrecall,10,75\nmap,,75\n");

  write_metrics_csv(tmp.file("m2.csv"), recall, std::nullopt);
  CHECK(slurp(tmp.file("m2.csv")) ==
        "metric,N,value\nrecall,1,25\nrecall,5,50\nrecall,10,75\n");

  std::ostringstream table;
  print_metrics_table(table, recall, 75.0);
  CHECK(table.str().find("recall@1") != std::string::npos);
  CHECK(table.str().find("mAP") != std::string::npos);
  CHECK(table.str().find("75.00%") != std::string::npos);
}
