#include "wasabi/labelmap.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "wasabi/errors.hpp"

namespace wasabi {

namespace {

constexpr int kAxialOffsets[4][2] = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};
constexpr int kDiagonalOffsets[4][2] = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};

}  // namespace

ComponentMap connected_components(const LabelMap& map, Connectivity conn) {
  const int h = static_cast<int>(map.rows());
  const int w = static_cast<int>(map.cols());
  ComponentMap out;
  out.id.setConstant(h, w, -1);

  std::vector<int> stack;
  stack.reserve(64);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (out.id(r, c) >= 0) continue;
      const std::int32_t lbl = map(r, c);
      const int comp = out.count();
      out.size.push_back(0);
      out.label.push_back(lbl);
      stack.push_back(r * w + c);
      out.id(r, c) = comp;
      while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        ++out.size[comp];
        const int pr = idx / w, pc = idx % w;
        auto visit = [&](int nr, int nc) {
          if (nr < 0 || nr >= h || nc < 0 || nc >= w) return;
          if (out.id(nr, nc) >= 0 || map(nr, nc) != lbl) return;
          out.id(nr, nc) = comp;
          stack.push_back(nr * w + nc);
        };
        for (const auto& d : kAxialOffsets) visit(pr + d[0], pc + d[1]);
        if (conn == Connectivity::eight)
          for (const auto& d : kDiagonalOffsets) visit(pr + d[0], pc + d[1]);
      }
    }
  }
  return out;
}

bool is_valid_label_map(const LabelMap& map, std::int32_t class_count) {
  if (map.rows() < 1 || map.cols() < 1) return false;
  return map.minCoeff() >= 0 && map.maxCoeff() < class_count;
}

LabelMap merge_small_blobs(const LabelMap& map, const CleanupConfig& cfg) {
  LabelMap out = map;
  const int h = static_cast<int>(map.rows());
  const int w = static_cast<int>(map.cols());

  for (;;) {
    const ComponentMap comps = connected_components(out, cfg.connectivity);
    if (comps.count() <= 1) break;  // nothing to merge into

    // Smallest undersized component; ties resolved by discovery order.
    int target = -1;
    for (int i = 0; i < comps.count(); ++i) {
      if (comps.size[i] >= cfg.min_blob_size) continue;
      if (target < 0 || comps.size[i] < comps.size[target]) target = i;
    }
    if (target < 0) break;

    // Adjacent label with the longest shared boundary (adjacency under the
    // configured connectivity; ties go to the smaller class id).
    std::map<std::int32_t, int> contact;
    auto count_neighbor = [&](int nr, int nc) {
      if (nr < 0 || nr >= h || nc < 0 || nc >= w) return;
      if (comps.id(nr, nc) != target) ++contact[out(nr, nc)];
    };
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (comps.id(r, c) != target) continue;
        for (const auto& d : kAxialOffsets) count_neighbor(r + d[0], c + d[1]);
        if (cfg.connectivity == Connectivity::eight)
          for (const auto& d : kDiagonalOffsets) count_neighbor(r + d[0], c + d[1]);
      }
    }
    std::int32_t best_label = 0;
    int best_contact = -1;
    for (const auto& [lbl, n] : contact) {
      if (n > best_contact) {
        best_contact = n;
        best_label = lbl;
      }
    }
    if (best_contact < 0) break;  // isolated component, cannot happen on a grid

    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (comps.id(r, c) == target) out(r, c) = best_label;
  }
  return out;
}

LabelMap remove_dynamic_classes(const LabelMap& map, const CleanupConfig& cfg) {
  const int h = static_cast<int>(map.rows());
  const int w = static_cast<int>(map.cols());

  auto is_dynamic = [&](std::int32_t lbl) { return cfg.dynamic_classes.count(lbl) > 0; };

  bool any_dynamic = false, any_source = false;
  for (int r = 0; r < h && !(any_dynamic && any_source); ++r)
    for (int c = 0; c < w; ++c)
      (is_dynamic(map(r, c)) ? any_dynamic : any_source) = true;
  if (!any_dynamic) return map;
  if (!any_source) throw AllDynamicError("every pixel carries a dynamic class");

  // Per row: distance to the nearest source column (ties keep the smaller
  // column, which is the row-major-smaller candidate within the row).
  constexpr int kNone = std::numeric_limits<int>::max();
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_dist(h, w);
  Mask source(h, w);
  for (int r = 0; r < h; ++r) {
    int last = kNone;
    for (int c = 0; c < w; ++c) {
      source(r, c) = is_dynamic(map(r, c)) ? 0 : 1;
      if (source(r, c)) last = c;
      row_dist(r, c) = (last == kNone) ? kNone : c - last;
    }
    last = kNone;
    for (int c = w - 1; c >= 0; --c) {
      if (source(r, c)) last = c;
      if (last != kNone && (row_dist(r, c) == kNone || last - c < row_dist(r, c)))
        row_dist(r, c) = last - c;
    }
  }

  LabelMap out = map;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (source(r, c)) continue;
      // Ascending row scan keeps the smallest row among equal distances.
      long best = std::numeric_limits<long>::max();
      int best_row = -1;
      for (int rr = 0; rr < h; ++rr) {
        if (row_dist(rr, c) == kNone) continue;
        const long dr = rr - r;
        const long dc = row_dist(rr, c);
        const long d2 = dr * dr + dc * dc;
        if (d2 < best) {
          best = d2;
          best_row = rr;
        }
      }
      const int dc = row_dist(best_row, c);
      const int left = c - dc;
      const int src_col = (left >= 0 && source(best_row, left)) ? left : c + dc;
      out(r, c) = map(best_row, src_col);
    }
  }
  return out;
}

LabelMap clean_label_map(const LabelMap& map, const CleanupConfig& cfg) {
  return merge_small_blobs(remove_dynamic_classes(map, cfg), cfg);
}

namespace {

// Next whitespace-delimited token, skipping '#' comments (PGM-style).
bool next_token(std::istream& in, std::string& tok) {
  tok.clear();
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return true;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return !tok.empty();
}

long parse_int(const std::string& tok, const std::filesystem::path& path) {
  try {
    size_t pos = 0;
    const long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad integer '" + tok + "' in " + path.string());
  }
}

LabelMap read_pgm(std::istream& in, const std::filesystem::path& path) {
  std::string tok;
  if (!next_token(in, tok)) throw IoError("empty PGM: " + path.string());
  const bool binary = tok == "P5";
  if (!binary && tok != "P2") throw IoError("not a PGM file: " + path.string());

  long dims[3];
  for (long& d : dims) {
    if (!next_token(in, tok)) throw IoError("truncated PGM header: " + path.string());
    d = parse_int(tok, path);
  }
  const long w = dims[0], h = dims[1], maxval = dims[2];
  if (w < 1 || h < 1 || maxval < 1 || maxval > 255)
    throw IoError("unsupported PGM geometry in " + path.string());

  LabelMap map(h, w);
  if (binary) {
    // Header ends with exactly one whitespace byte before the raster.
    std::vector<unsigned char> buf(static_cast<size_t>(w) * h);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
      throw IoError("truncated PGM raster: " + path.string());
    for (long r = 0; r < h; ++r)
      for (long c = 0; c < w; ++c) map(r, c) = buf[static_cast<size_t>(r) * w + c];
  } else {
    for (long r = 0; r < h; ++r)
      for (long c = 0; c < w; ++c) {
        if (!next_token(in, tok)) throw IoError("truncated PGM raster: " + path.string());
        map(r, c) = static_cast<std::int32_t>(parse_int(tok, path));
      }
  }
  return map;
}

LabelMap read_text_grid(std::istream& in, const std::filesystem::path& path) {
  std::string tok;
  if (!next_token(in, tok)) throw IoError("empty label map: " + path.string());
  const long w = parse_int(tok, path);
  if (!next_token(in, tok)) throw IoError("missing height in " + path.string());
  const long h = parse_int(tok, path);
  if (w < 1 || h < 1) throw IoError("bad dimensions in " + path.string());

  LabelMap map(h, w);
  for (long r = 0; r < h; ++r)
    for (long c = 0; c < w; ++c) {
      if (!next_token(in, tok)) throw IoError("truncated label grid: " + path.string());
      const long v = parse_int(tok, path);
      if (v < 0) throw IoError("negative label in " + path.string());
      map(r, c) = static_cast<std::int32_t>(v);
    }
  return map;
}

}  // namespace

LabelMap read_label_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const int c0 = in.peek();
  if (c0 == 'P') return read_pgm(in, path);
  return read_text_grid(in, path);
}

void write_label_map(const std::filesystem::path& path, const LabelMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const long h = map.rows(), w = map.cols();

  if (path.extension() == ".txt") {
    out << w << ' ' << h << '\n';
    for (long r = 0; r < h; ++r) {
      for (long c = 0; c < w; ++c) {
        if (c) out << ' ';
        out << map(r, c);
      }
      out << '\n';
    }
  } else {
    if (map.minCoeff() < 0 || map.maxCoeff() > 255)
      throw IoError("labels outside [0,255] cannot be written as PGM: " + path.string());
    out << "P5\n" << w << ' ' << h << "\n255\n";
    std::vector<unsigned char> buf(static_cast<size_t>(w) * h);
    for (long r = 0; r < h; ++r)
      for (long c = 0; c < w; ++c)
        buf[static_cast<size_t>(r) * w + c] = static_cast<unsigned char>(map(r, c));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::set<std::int32_t> read_class_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::set<std::int32_t> ids;
  std::string tok;
  while (next_token(in, tok)) ids.insert(static_cast<std::int32_t>(parse_int(tok, path)));
  return ids;
}

}  // namespace wasabi
