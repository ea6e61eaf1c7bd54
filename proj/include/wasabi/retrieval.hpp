#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wasabi/matching.hpp"

namespace wasabi {

// Camera center in meters. Planar datasets set z = 0.
struct Pose {
  double x = 0.0, y = 0.0, z = 0.0;
  friend bool operator==(const Pose&, const Pose&) = default;
};

double pose_distance(const Pose& a, const Pose& b);

struct DatabaseEntry {
  ImageDescriptor descriptor;
  std::optional<Pose> pose;
};

// Immutable descriptor collection, entries sorted by image id.
class RetrievalDatabase {
 public:
  // Throws EmptyDatabaseError, DuplicateIdError, MissingPoseError (when a
  // pose map is given it must cover every image id).
  static RetrievalDatabase build(std::vector<ImageDescriptor> images,
                                 const std::map<std::string, Pose>* poses = nullptr);

  const std::vector<DatabaseEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<DatabaseEntry> entries_;
  friend RetrievalDatabase load_database(const std::filesystem::path&);
};

struct RankedMatch {
  std::string image_id;
  double distance = 0.0;
};

// First min(k, db size) entries ordered by (distance ascending, id
// ascending); incomparable entries carry +infinity and land last.
std::vector<RankedMatch> query(const RetrievalDatabase& db, const ImageDescriptor& q,
                               std::size_t k, const MatchingConfig& cfg = {});

struct QueryRun {
  std::string query_id;
  std::vector<RankedMatch> ranking;
};

struct EvalConfig {
  double epsilon = 5.0;                    // meters
  std::vector<int> recall_ns = {1, 5, 10, 20};
};

// Percentage of queries with at least one database entry within epsilon of
// the query pose among the top N, for each N.
std::map<int, double> recall_at_n(const std::vector<QueryRun>& run,
                                  const std::map<std::string, Pose>& query_poses,
                                  const std::map<std::string, Pose>& db_poses,
                                  const EvalConfig& cfg);

// Mean over queries of (1/R) * sum of precision@r at each relevant rank r,
// where R counts database entries within epsilon. Queries with R = 0 are
// excluded; if every query has R = 0, throws NoRelevantAnywhereError.
// Returned as a percentage.
double mean_average_precision(const std::vector<QueryRun>& run,
                              const std::map<std::string, Pose>& query_poses,
                              const std::map<std::string, Pose>& db_poses,
                              const EvalConfig& cfg);

// Binary database file, little-endian. Header: magic "WSBI", format version
// u32, image count u32. Per image: id length u32 + UTF-8 bytes, pose-present
// flag u8 + 3x float64, edge count u32. Per edge: class id u16, coefficient
// count u16, coefficients as float32.
void save_database(const std::filesystem::path& path, const RetrievalDatabase& db);
RetrievalDatabase load_database(const std::filesystem::path& path);

// Poses CSV: header "id,x,y,z", one row per image.
std::map<std::string, Pose> read_poses_csv(const std::filesystem::path& path);
void write_poses_csv(const std::filesystem::path& path,
                     const std::map<std::string, Pose>& poses);

// Ranking CSV: header "query_id,rank,db_id,distance", rank is 1-based.
void write_ranking_csv(const std::filesystem::path& path,
                       const std::vector<QueryRun>& run);
std::vector<QueryRun> read_ranking_csv(const std::filesystem::path& path);

// Metrics CSV: header "metric,N,value"; recall rows carry their N, the map
// row leaves N empty. Values are percentages.
void write_metrics_csv(const std::filesystem::path& path,
                       const std::map<int, double>& recall, std::optional<double> map_pct);
void print_metrics_table(std::ostream& out, const std::map<int, double>& recall,
                         std::optional<double> map_pct);

}  // namespace wasabi
