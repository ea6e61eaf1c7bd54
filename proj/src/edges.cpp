#include "wasabi/edges.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "wasabi/errors.hpp"

namespace wasabi {

namespace {

// Signed shoelace area with x = col, y = row; positive means clockwise on
// screen (origin top-left, rows pointing down).
double signed_area(const std::vector<Pixel>& pts) {
  double a = 0.0;
  const size_t n = pts.size();
  for (size_t i = 0; i < n; ++i) {
    const Pixel& p = pts[i];
    const Pixel& q = pts[(i + 1) % n];
    a += static_cast<double>(p.col) * q.row - static_cast<double>(q.col) * p.row;
  }
  return a;
}

void rotate_to_min(std::vector<Pixel>& pts) {
  auto it = std::min_element(pts.begin(), pts.end());
  std::rotate(pts.begin(), it, pts.end());
}

}  // namespace

void canonicalize_edge(SemanticEdge& edge) {
  if (edge.points.size() < 2) return;
  if (!edge.closed) {
    if (edge.points.back() < edge.points.front())
      std::reverse(edge.points.begin(), edge.points.end());
    return;
  }
  rotate_to_min(edge.points);
  if (signed_area(edge.points) < 0.0) {
    std::reverse(edge.points.begin() + 1, edge.points.end());
  }
}

void sort_edges(std::vector<SemanticEdge>& edges) {
  // By class id, then by lexicographically smallest point; full sequence
  // comparison breaks the remaining ties (e.g. arcs sharing a junction).
  std::vector<Pixel> min_pt(edges.size());
  std::vector<size_t> order(edges.size());
  for (size_t i = 0; i < edges.size(); ++i) {
    min_pt[i] = *std::min_element(edges[i].points.begin(), edges[i].points.end());
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (edges[a].class_id != edges[b].class_id) return edges[a].class_id < edges[b].class_id;
    if (min_pt[a] != min_pt[b]) return min_pt[a] < min_pt[b];
    if (edges[a].points != edges[b].points) return edges[a].points < edges[b].points;
    return edges[a].closed < edges[b].closed;
  });
  std::vector<SemanticEdge> sorted;
  sorted.reserve(edges.size());
  for (size_t i : order) sorted.push_back(std::move(edges[i]));
  edges = std::move(sorted);
}

std::map<std::int32_t, Mask> detect_boundaries(const LabelMap& map) {
  const int h = static_cast<int>(map.rows());
  const int w = static_cast<int>(map.cols());

  std::map<std::int32_t, Mask> masks;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (!masks.count(map(r, c))) masks.emplace(map(r, c), Mask::Zero(h, w));

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::int32_t lbl = map(r, c);
      const bool transition =
          (r > 0 && map(r - 1, c) != lbl) || (r + 1 < h && map(r + 1, c) != lbl) ||
          (c > 0 && map(r, c - 1) != lbl) || (c + 1 < w && map(r, c + 1) != lbl);
      if (transition) masks.at(lbl)(r, c) = 1;
    }
  }
  return masks;
}

namespace {

// Curve graph over mask pixels. 8-adjacency, except that a diagonal link is
// dropped when the two pixels already share an axial neighbor in the mask;
// without this, stair-step curves degenerate into triangle fans.
struct CurveGraph {
  std::vector<Pixel> pixels;              // sorted row-major
  std::vector<std::vector<int>> adj;      // neighbor indices, ascending
  std::vector<std::vector<char>> used;    // per directed slot

  int degree(int v) const { return static_cast<int>(adj[v].size()); }

  void mark_used(int u, int v) {
    for (size_t k = 0; k < adj[u].size(); ++k)
      if (adj[u][k] == v) used[u][k] = 1;
    for (size_t k = 0; k < adj[v].size(); ++k)
      if (adj[v][k] == u) used[v][k] = 1;
  }
};

CurveGraph build_curve_graph(const Mask& mask) {
  const int h = static_cast<int>(mask.rows());
  const int w = static_cast<int>(mask.cols());

  CurveGraph g;
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> index =
      Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Constant(
          h, w, -1);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (mask(r, c)) {
        index(r, c) = static_cast<std::int32_t>(g.pixels.size());
        g.pixels.push_back({r, c});
      }

  auto in_mask = [&](int r, int c) {
    return r >= 0 && r < h && c >= 0 && c < w && mask(r, c);
  };

  g.adj.resize(g.pixels.size());
  for (size_t i = 0; i < g.pixels.size(); ++i) {
    const Pixel p = g.pixels[i];
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const int nr = p.row + dr, nc = p.col + dc;
        if (!in_mask(nr, nc)) continue;
        if (dr != 0 && dc != 0 &&
            (in_mask(p.row, nc) || in_mask(nr, p.col)))
          continue;  // diagonal chord of an axial step
        g.adj[i].push_back(index(nr, nc));
      }
    }
    std::sort(g.adj[i].begin(), g.adj[i].end());
  }
  g.used.resize(g.adj.size());
  for (size_t i = 0; i < g.adj.size(); ++i) g.used[i].assign(g.adj[i].size(), 0);
  return g;
}

// Walks from terminal t through its neighbor slot k until another terminal
// (or t itself, closing a loop). Interior vertices have degree 2.
SemanticEdge walk_arc(CurveGraph& g, int t, size_t k, std::int32_t class_id) {
  SemanticEdge edge;
  edge.class_id = class_id;

  int prev = t;
  int cur = g.adj[t][k];
  g.mark_used(t, cur);
  edge.points.push_back(g.pixels[t]);
  edge.points.push_back(g.pixels[cur]);

  while (g.degree(cur) == 2 && cur != t) {
    const int next = (g.adj[cur][0] == prev) ? g.adj[cur][1] : g.adj[cur][0];
    g.mark_used(cur, next);
    edge.points.push_back(g.pixels[next]);
    prev = cur;
    cur = next;
  }
  if (cur == t) {
    edge.points.pop_back();  // implied wrap back to the start
    edge.closed = true;
  }
  return edge;
}

void trace_mask(const Mask& mask, std::int32_t class_id, std::vector<SemanticEdge>& out) {
  CurveGraph g = build_curve_graph(mask);
  const int n = static_cast<int>(g.pixels.size());

  // Arcs anchored at terminals (degree != 2). Isolated pixels are dropped:
  // a single point is not a curve.
  for (int v = 0; v < n; ++v) {
    if (g.degree(v) == 2 || g.degree(v) == 0) continue;
    for (size_t k = 0; k < g.adj[v].size(); ++k) {
      if (g.used[v][k]) continue;
      out.push_back(walk_arc(g, v, k, class_id));
    }
  }

  // Remaining unused links belong to pure cycles; the walk returns to its
  // start and flags the edge closed itself.
  for (int v = 0; v < n; ++v) {
    for (size_t k = 0; k < g.adj[v].size(); ++k) {
      if (g.used[v][k]) continue;
      out.push_back(walk_arc(g, v, k, class_id));
    }
  }
}

}  // namespace

std::vector<SemanticEdge> trace_edges(const std::map<std::int32_t, Mask>& masks) {
  std::vector<SemanticEdge> edges;
  for (const auto& [class_id, mask] : masks) trace_mask(mask, class_id, edges);
  for (SemanticEdge& e : edges) canonicalize_edge(e);
  sort_edges(edges);
  return edges;
}

std::vector<SemanticEdge> filter_short_edges(std::vector<SemanticEdge> edges,
                                             const EdgeExtractionConfig& cfg) {
  std::erase_if(edges, [&](const SemanticEdge& e) { return e.size() < cfg.min_edge_size; });
  return edges;
}

namespace {

double endpoint_distance(const Pixel& a, const Pixel& b) {
  const double dr = a.row - b.row;
  const double dc = a.col - b.col;
  return std::sqrt(dr * dr + dc * dc);
}

// Endpoint selector: 0 = front, 1 = back.
Pixel endpoint(const SemanticEdge& e, int sel) {
  return sel == 0 ? e.points.front() : e.points.back();
}

}  // namespace

std::vector<SemanticEdge> reconnect_edges(std::vector<SemanticEdge> edges,
                                          const EdgeExtractionConfig& cfg) {
  // Group by class, keeping list order within each group.
  std::map<std::int32_t, std::vector<SemanticEdge>> by_class;
  for (SemanticEdge& e : edges) by_class[e.class_id].push_back(std::move(e));

  std::vector<SemanticEdge> result;
  for (auto& [class_id, group] : by_class) {
    for (;;) {
      double best = std::numeric_limits<double>::infinity();
      int bi = -1, bj = -1, bsi = 0, bsj = 0;
      for (size_t i = 0; i < group.size(); ++i) {
        if (group[i].closed) continue;
        for (size_t j = i + 1; j < group.size(); ++j) {
          if (group[j].closed) continue;
          for (int si = 0; si < 2; ++si) {
            for (int sj = 0; sj < 2; ++sj) {
              const double d =
                  endpoint_distance(endpoint(group[i], si), endpoint(group[j], sj));
              if (d < best) {
                best = d;
                bi = static_cast<int>(i);
                bj = static_cast<int>(j);
                bsi = si;
                bsj = sj;
              }
            }
          }
        }
      }
      if (bi < 0 || best > cfg.min_neighbour_gap) break;

      // Join so the two chosen endpoints become adjacent: i's joined end
      // last, j's joined end first.
      SemanticEdge& a = group[bi];
      SemanticEdge& b = group[bj];
      if (bsi == 0) std::reverse(a.points.begin(), a.points.end());
      if (bsj == 1) std::reverse(b.points.begin(), b.points.end());
      a.points.insert(a.points.end(), b.points.begin(), b.points.end());
      group.erase(group.begin() + bj);
    }
    for (SemanticEdge& e : group) {
      canonicalize_edge(e);
      result.push_back(std::move(e));
    }
  }
  sort_edges(result);
  return result;
}

std::vector<SemanticEdge> extract_edges(const LabelMap& map,
                                        const EdgeExtractionConfig& cfg) {
  auto edges = filter_short_edges(trace_edges(detect_boundaries(map)), cfg);
  return filter_short_edges(reconnect_edges(std::move(edges), cfg), cfg);
}

void write_edge_dump(const std::filesystem::path& path,
                     const std::vector<SemanticEdge>& edges) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const SemanticEdge& e : edges) {
    out << e.class_id << ' ' << (e.closed ? 1 : 0) << ' ' << e.points.size();
    for (const Pixel& p : e.points) out << ' ' << p.row << ' ' << p.col;
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<SemanticEdge> read_edge_dump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<SemanticEdge> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    SemanticEdge e;
    int closed = 0;
    size_t n = 0;
    if (!(ls >> e.class_id >> closed >> n)) throw IoError("bad edge line in " + path.string());
    e.closed = closed != 0;
    e.points.resize(n);
    for (Pixel& p : e.points)
      if (!(ls >> p.row >> p.col)) throw IoError("truncated edge line in " + path.string());
    edges.push_back(std::move(e));
  }
  return edges;
}

}  // namespace wasabi
