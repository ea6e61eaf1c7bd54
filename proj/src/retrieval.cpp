#include "wasabi/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "wasabi/errors.hpp"

namespace wasabi {

double pose_distance(const Pose& a, const Pose& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

RetrievalDatabase RetrievalDatabase::build(std::vector<ImageDescriptor> images,
                                           const std::map<std::string, Pose>* poses) {
  if (images.empty()) throw EmptyDatabaseError("database needs at least one image");

  std::sort(images.begin(), images.end(),
            [](const ImageDescriptor& a, const ImageDescriptor& b) {
              return a.image_id < b.image_id;
            });
  for (size_t i = 1; i < images.size(); ++i)
    if (images[i].image_id == images[i - 1].image_id)
      throw DuplicateIdError("duplicate image id: " + images[i].image_id);

  RetrievalDatabase db;
  db.entries_.reserve(images.size());
  for (ImageDescriptor& img : images) {
    DatabaseEntry e;
    if (poses) {
      const auto it = poses->find(img.image_id);
      if (it == poses->end())
        throw MissingPoseError("no pose for image id: " + img.image_id);
      e.pose = it->second;
    }
    e.descriptor = std::move(img);
    db.entries_.push_back(std::move(e));
  }
  return db;
}

std::vector<RankedMatch> query(const RetrievalDatabase& db, const ImageDescriptor& q,
                               std::size_t k, const MatchingConfig& cfg) {
  std::vector<RankedMatch> ranked;
  ranked.reserve(db.size());
  for (const DatabaseEntry& e : db.entries())
    ranked.push_back({e.descriptor.image_id, image_distance(q, e.descriptor, cfg).value});

  std::sort(ranked.begin(), ranked.end(), [](const RankedMatch& a, const RankedMatch& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.image_id < b.image_id;
  });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

namespace {

const Pose& pose_of(const std::map<std::string, Pose>& poses, const std::string& id) {
  const auto it = poses.find(id);
  if (it == poses.end()) throw MissingPoseError("no pose for image id: " + id);
  return it->second;
}

}  // namespace

std::map<int, double> recall_at_n(const std::vector<QueryRun>& run,
                                  const std::map<std::string, Pose>& query_poses,
                                  const std::map<std::string, Pose>& db_poses,
                                  const EvalConfig& cfg) {
  if (run.empty()) throw std::invalid_argument("recall needs at least one query");

  std::map<int, int> hits;
  for (int n : cfg.recall_ns) hits[n] = 0;
  for (const QueryRun& qr : run) {
    const Pose& qp = pose_of(query_poses, qr.query_id);
    int first_hit = -1;
    for (size_t r = 0; r < qr.ranking.size(); ++r) {
      if (pose_distance(qp, pose_of(db_poses, qr.ranking[r].image_id)) <= cfg.epsilon) {
        first_hit = static_cast<int>(r) + 1;
        break;
      }
    }
    if (first_hit < 0) continue;
    for (int n : cfg.recall_ns)
      if (first_hit <= n) ++hits[n];
  }

  std::map<int, double> recall;
  for (int n : cfg.recall_ns)
    recall[n] = 100.0 * hits[n] / static_cast<double>(run.size());
  return recall;
}

double mean_average_precision(const std::vector<QueryRun>& run,
                              const std::map<std::string, Pose>& query_poses,
                              const std::map<std::string, Pose>& db_poses,
                              const EvalConfig& cfg) {
  if (run.empty()) throw std::invalid_argument("mAP needs at least one query");

  double ap_sum = 0.0;
  int evaluated = 0;
  for (const QueryRun& qr : run) {
    const Pose& qp = pose_of(query_poses, qr.query_id);

    // R counts over the whole database, not just the retrieved prefix.
    int relevant_total = 0;
    for (const auto& [id, pose] : db_poses)
      if (pose_distance(qp, pose) <= cfg.epsilon) ++relevant_total;
    if (relevant_total == 0) continue;

    int seen_relevant = 0;
    double ap = 0.0;
    for (size_t r = 0; r < qr.ranking.size(); ++r) {
      if (pose_distance(qp, pose_of(db_poses, qr.ranking[r].image_id)) <= cfg.epsilon) {
        ++seen_relevant;
        ap += static_cast<double>(seen_relevant) / static_cast<double>(r + 1);
      }
    }
    ap_sum += ap / static_cast<double>(relevant_total);
    ++evaluated;
  }

  if (evaluated == 0)
    throw NoRelevantAnywhereError("every query has zero relevant database entries");
  return 100.0 * ap_sum / static_cast<double>(evaluated);
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "database serialization assumes a little-endian host");

template <typename T>
void write_raw(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const std::filesystem::path& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("truncated database file: " + path.string());
  return value;
}

constexpr char kMagic[4] = {'W', 'S', 'B', 'I'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

void save_database(const std::filesystem::path& path, const RetrievalDatabase& db) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());

  out.write(kMagic, 4);
  write_raw<std::uint32_t>(out, kFormatVersion);
  write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(db.size()));

  for (const DatabaseEntry& e : db.entries()) {
    const std::string& id = e.descriptor.image_id;
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));

    const Pose pose = e.pose.value_or(Pose{});
    write_raw<std::uint8_t>(out, e.pose ? 1 : 0);
    write_raw<double>(out, pose.x);
    write_raw<double>(out, pose.y);
    write_raw<double>(out, pose.z);

    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(e.descriptor.edge_count()));
    for (const auto& [cls, descs] : e.descriptor.edges_by_class) {
      if (cls < 0 || cls > 0xffff)
        throw IoError("class id outside u16 range: " + std::to_string(cls));
      for (const EdgeDescriptor& d : descs) {
        if (d.coeffs.size() > 0xffff) throw IoError("descriptor too long for u16 count");
        write_raw<std::uint16_t>(out, static_cast<std::uint16_t>(cls));
        write_raw<std::uint16_t>(out, static_cast<std::uint16_t>(d.coeffs.size()));
        for (Eigen::Index i = 0; i < d.coeffs.size(); ++i)
          write_raw<float>(out, static_cast<float>(d.coeffs[i]));
      }
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

RetrievalDatabase load_database(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not a descriptor database: " + path.string());
  const auto version = read_raw<std::uint32_t>(in, path);
  if (version != kFormatVersion)
    throw IoError("unsupported database version " + std::to_string(version));

  const auto count = read_raw<std::uint32_t>(in, path);
  RetrievalDatabase db;
  db.entries_.reserve(count);
  for (std::uint32_t n = 0; n < count; ++n) {
    DatabaseEntry e;
    const auto id_len = read_raw<std::uint32_t>(in, path);
    std::string id(id_len, '\0');
    in.read(id.data(), id_len);
    if (!in) throw IoError("truncated database file: " + path.string());
    e.descriptor.image_id = std::move(id);

    const auto has_pose = read_raw<std::uint8_t>(in, path);
    Pose pose;
    pose.x = read_raw<double>(in, path);
    pose.y = read_raw<double>(in, path);
    pose.z = read_raw<double>(in, path);
    if (has_pose) e.pose = pose;

    const auto edges = read_raw<std::uint32_t>(in, path);
    for (std::uint32_t k = 0; k < edges; ++k) {
      EdgeDescriptor d;
      d.class_id = read_raw<std::uint16_t>(in, path);
      const auto coeffs = read_raw<std::uint16_t>(in, path);
      d.coeffs.resize(coeffs);
      for (std::uint16_t i = 0; i < coeffs; ++i)
        d.coeffs[i] = static_cast<double>(read_raw<float>(in, path));
      e.descriptor.edges_by_class[d.class_id].push_back(std::move(d));
    }
    db.entries_.push_back(std::move(e));
  }
  return db;
}

namespace {

// Shortest round-trippable decimal form, stable across runs.
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::map<std::string, Pose> read_poses_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty poses file: " + path.string());

  std::map<std::string, Pose> poses;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw IoError("bad pose row in " + path.string() + ": " + line);
    Pose p{std::stod(f[1]), std::stod(f[2]), std::stod(f[3])};
    if (!poses.emplace(f[0], p).second)
      throw DuplicateIdError("duplicate pose id: " + f[0]);
  }
  return poses;
}

void write_poses_csv(const std::filesystem::path& path,
                     const std::map<std::string, Pose>& poses) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "id,x,y,z\n";
  for (const auto& [id, p] : poses)
    out << id << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
        << format_double(p.z) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void write_ranking_csv(const std::filesystem::path& path,
                       const std::vector<QueryRun>& run) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "query_id,rank,db_id,distance\n";
  for (const QueryRun& qr : run)
    for (size_t r = 0; r < qr.ranking.size(); ++r)
      out << qr.query_id << ',' << (r + 1) << ',' << qr.ranking[r].image_id << ','
          << format_double(qr.ranking[r].distance) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<QueryRun> read_ranking_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty ranking file: " + path.string());

  std::vector<QueryRun> run;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw IoError("bad ranking row in " + path.string() + ": " + line);
    if (run.empty() || run.back().query_id != f[0]) run.push_back({f[0], {}});
    const size_t rank = std::stoul(f[1]);
    if (rank != run.back().ranking.size() + 1)
      throw IoError("non-consecutive rank for query " + f[0] + " in " + path.string());
    run.back().ranking.push_back({f[2], std::stod(f[3])});
  }
  return run;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::map<int, double>& recall,
                       std::optional<double> map_pct) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "metric,N,value\n";
  for (const auto& [n, v] : recall) out << "recall," << n << ',' << format_double(v) << '\n';
  if (map_pct) out << "map,," << format_double(*map_pct) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void print_metrics_table(std::ostream& out, const std::map<int, double>& recall,
                         std::optional<double> map_pct) {
  out << "metric      value\n";
  for (const auto& [n, v] : recall) {
    std::ostringstream name;
    name << "recall@" << n;
    out << std::left << std::setw(10) << name.str() << ' ' << std::right << std::setw(6)
        << std::fixed << std::setprecision(2) << v << "%\n";
  }
  if (map_pct)
    out << std::left << std::setw(10) << "mAP" << ' ' << std::right << std::setw(6)
        << std::fixed << std::setprecision(2) << *map_pct << "%\n";
}

}  // namespace wasabi
