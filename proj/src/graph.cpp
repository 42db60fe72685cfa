#include "glauber/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "glauber/error.hpp"
#include "glauber/rng.hpp"

namespace glauber {

Graph::Graph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  if (n < 0) throw Error(ErrorKind::kInvalidParameter, "negative vertex count");
  for (auto& [u, v] : edges_) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw Error(ErrorKind::kInvalidParameter,
                  "edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
    }
    if (u == v) throw Error(ErrorKind::kInvalidParameter, "self-loop at " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges_.begin(), edges_.end());
  auto dup = std::adjacent_find(edges_.begin(), edges_.end());
  if (dup != edges_.end()) {
    throw Error(ErrorKind::kInvalidParameter, "duplicate edge (" + std::to_string(dup->first) +
                                                  "," + std::to_string(dup->second) + ")");
  }

  offsets_.assign(n + 1, 0);
  for (const auto& [u, v] : edges_) {
    ++offsets_[u + 1];
    ++offsets_[v + 1];
  }
  for (int v = 0; v < n; ++v) offsets_[v + 1] += offsets_[v];
  neighbors_.resize(2 * edges_.size());
  edge_ids_.resize(2 * edges_.size());
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  // Edges are sorted, so for each u the larger neighbors arrive in order;
  // smaller neighbors arrive in order of their own index too. Filling both
  // directions in one pass keeps every list sorted.
  for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
    const auto [u, v] = edges_[i];
    neighbors_[fill[v]] = u;
    edge_ids_[fill[v]++] = i;
  }
  for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
    const auto [u, v] = edges_[i];
    neighbors_[fill[u]] = v;
    edge_ids_[fill[u]++] = i;
  }
}

int Graph::max_degree() const {
  int best = 0;
  for (int v = 0; v < n_; ++v) best = std::max(best, degree(v));
  return best;
}

int Graph::edge_index(int u, int v) const {
  if (u < 0 || v < 0 || u >= n_ || v >= n_) return -1;
  auto nb = neighbors(u);
  auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return -1;
  return incident_edges(u)[it - nb.begin()];
}

std::uint64_t Graph::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  feed(std::to_string(n_) + " " + std::to_string(edges_.size()) + "\n");
  for (const auto& [u, v] : edges_) feed(std::to_string(u) + " " + std::to_string(v) + "\n");
  return h;
}

int ComponentDecomposition::total_tree_excess() const {
  int total = 0;
  for (const auto& c : components) total += c.tree_excess();
  return total;
}

Graph generate_gnp(int n, double d, std::uint64_t seed) {
  if (n < 0) throw Error(ErrorKind::kInvalidParameter, "n must be >= 0");
  if (!(d > 0.0)) throw Error(ErrorKind::kInvalidParameter, "d must be > 0");
  if (n < 2) return Graph(n, {});
  const double p = std::min(d / n, 1.0);
  Rng rng(seed);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(p * n * (n - 1) / 2 * 1.1) + 16);
  if (p >= 1.0) {
    for (int v = 1; v < n; ++v)
      for (int w = 0; w < v; ++w) edges.emplace_back(w, v);
    return Graph(n, std::move(edges));
  }
  // Batagelj-Brandes skipping over pairs (w, v) with w < v in row order.
  const double log_q = std::log1p(-p);
  std::int64_t v = 1;
  std::int64_t w = -1;
  while (v < n) {
    const double r = rng.uniform();
    w += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
    while (w >= v && v < n) {
      w -= v;
      ++v;
    }
    if (v < n) edges.emplace_back(static_cast<int>(w), static_cast<int>(v));
  }
  return Graph(n, std::move(edges));
}

VertexPartition degree_partition(const Graph& g, double threshold) {
  if (!(threshold >= 0.0)) throw Error(ErrorKind::kInvalidParameter, "D must be >= 0");
  VertexPartition p;
  p.threshold = threshold;
  p.is_low.assign(g.num_vertices(), 0);
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (g.degree(v) <= threshold) {
      p.low.push_back(v);
      p.is_low[v] = 1;
    } else {
      p.high.push_back(v);
    }
  }
  return p;
}

namespace {

// BFS tree from the smallest vertex of a connected vertex set. `inside`
// marks the set; vertices must be sorted.
Component decompose(const Graph& g, std::vector<int> vertices,
                    const std::vector<std::uint8_t>& inside) {
  Component c;
  c.vertices = std::move(vertices);
  if (c.vertices.empty()) return c;
  std::vector<int> order{c.vertices.front()};
  std::vector<int> parent(c.vertices.size(), -1);
  auto pos = [&c](int v) {
    return static_cast<int>(std::lower_bound(c.vertices.begin(), c.vertices.end(), v) -
                            c.vertices.begin());
  };
  std::vector<std::uint8_t> seen(c.vertices.size(), 0);
  seen[0] = 1;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const int u = order[head];
    for (int w : g.neighbors(u)) {
      if (!inside[w]) continue;
      const int i = pos(w);
      if (seen[i]) continue;
      seen[i] = 1;
      parent[i] = u;
      order.push_back(w);
      c.tree_edges.emplace_back(std::min(u, w), std::max(u, w));
    }
  }
  for (std::size_t i = 0; i < c.vertices.size(); ++i) {
    const int u = c.vertices[i];
    for (int w : g.neighbors(u)) {
      if (w <= u || !inside[w]) continue;
      if (parent[pos(w)] == u || parent[i] == w) continue;
      c.excess_edges.emplace_back(u, w);
    }
  }
  return c;
}

}  // namespace

ComponentDecomposition induced_components(const Graph& g, std::span<const int> s) {
  const int n = g.num_vertices();
  std::vector<std::uint8_t> inside(n, 0);
  for (int v : s) {
    if (v < 0 || v >= n) throw Error(ErrorKind::kInvalidParameter, "vertex out of range");
    inside[v] = 1;
  }
  std::vector<std::uint8_t> done(n, 0);
  ComponentDecomposition out;
  for (int start = 0; start < n; ++start) {
    if (!inside[start] || done[start]) continue;
    std::vector<int> members{start};
    done[start] = 1;
    for (std::size_t head = 0; head < members.size(); ++head) {
      for (int w : g.neighbors(members[head])) {
        if (inside[w] && !done[w]) {
          done[w] = 1;
          members.push_back(w);
        }
      }
    }
    std::sort(members.begin(), members.end());
    out.components.push_back(decompose(g, std::move(members), inside));
  }
  return out;
}

LowVertexComponent component_of_low_vertex(const Graph& g, const VertexPartition& p, int u) {
  if (u < 0 || u >= g.num_vertices() || !p.contains_low(u)) {
    throw Error(ErrorKind::kInvalidParameter, "vertex " + std::to_string(u) + " is not low-degree");
  }
  std::vector<std::uint8_t> inside(g.num_vertices(), 0);
  std::vector<int> members{u};
  inside[u] = 1;
  std::vector<int> boundary;
  for (std::size_t head = 0; head < members.size(); ++head) {
    for (int w : g.neighbors(members[head])) {
      if (inside[w]) continue;
      if (p.contains_low(w)) {
        boundary.push_back(w);
        continue;
      }
      inside[w] = 1;
      members.push_back(w);
    }
  }
  std::sort(boundary.begin(), boundary.end());
  boundary.erase(std::unique(boundary.begin(), boundary.end()), boundary.end());
  std::sort(members.begin(), members.end());
  LowVertexComponent out;
  out.component = decompose(g, std::move(members), inside);
  out.boundary = std::move(boundary);
  return out;
}

std::vector<int> bfs_distances(const Graph& g, int v, int max_depth) {
  if (v < 0 || v >= g.num_vertices()) throw Error(ErrorKind::kInvalidParameter, "vertex out of range");
  std::vector<int> dist(g.num_vertices(), -1);
  std::vector<int> queue{v};
  dist[v] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int x = queue[head];
    if (max_depth >= 0 && dist[x] >= max_depth) continue;
    for (int w : g.neighbors(x)) {
      if (dist[w] < 0) {
        dist[w] = dist[x] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

std::vector<int> ball(const Graph& g, int v, int r) {
  if (r < 0) throw Error(ErrorKind::kInvalidParameter, "radius must be >= 0");
  if (v < 0 || v >= g.num_vertices()) throw Error(ErrorKind::kInvalidParameter, "vertex out of range");
  // Per-thread distance buffer so that repeated small balls stay O(ball).
  thread_local std::vector<int> dist;
  if (static_cast<int>(dist.size()) < g.num_vertices()) dist.resize(g.num_vertices(), -1);
  std::vector<int> queue{v};
  dist[v] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int x = queue[head];
    if (dist[x] >= r) continue;
    for (int w : g.neighbors(x)) {
      if (dist[w] < 0) {
        dist[w] = dist[x] + 1;
        queue.push_back(w);
      }
    }
  }
  for (int x : queue) dist[x] = -1;
  std::sort(queue.begin(), queue.end());
  return queue;
}

std::vector<std::vector<int>> connected_sets_from(const Graph& g, int v, int k, std::int64_t cap) {
  if (k < 1 || cap < 1) throw Error(ErrorKind::kInvalidParameter, "k and cap must be >= 1");
  if (v < 0 || v >= g.num_vertices()) throw Error(ErrorKind::kInvalidParameter, "vertex out of range");
  std::vector<std::vector<int>> out;
  auto collect = [&out](const std::vector<int>& s) {
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end());
    out.push_back(std::move(sorted));
  };
  detail::ConnectedSetEnumerator<Graph, decltype(collect)> e(g, k, cap, 0, collect);
  e.run(v);
  std::sort(out.begin(), out.end());
  return out;
}

Graph read_edge_list(std::istream& in) {
  std::string line;
  auto next_line = [&](const char* what) {
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) return;
    }
    throw Error(ErrorKind::kParseError, std::string("unexpected end of input reading ") + what);
  };
  next_line("header");
  long long n = -1, m = -1;
  {
    std::istringstream ls(line);
    std::string extra;
    if (!(ls >> n >> m) || (ls >> extra) || n < 0 || m < 0) {
      throw Error(ErrorKind::kParseError, "bad header line: '" + line + "'");
    }
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    next_line("edge");
    std::istringstream ls(line);
    long long u = -1, v = -1;
    std::string extra;
    if (!(ls >> u >> v) || (ls >> extra)) {
      throw Error(ErrorKind::kParseError, "bad edge line: '" + line + "'");
    }
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw Error(ErrorKind::kParseError, "edge endpoint out of range: '" + line + "'");
    }
    if (u == v) throw Error(ErrorKind::kParseError, "self-loop: '" + line + "'");
    edges.emplace_back(static_cast<int>(std::min(u, v)), static_cast<int>(std::max(u, v)));
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw Error(ErrorKind::kParseError, "trailing content after " + std::to_string(m) + " edges");
    }
  }
  auto sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::kParseError, "duplicate edge");
  }
  return Graph(static_cast<int>(n), std::move(edges));
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

Graph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kParseError, "cannot open " + path);
  return read_edge_list(in);
}

void write_edge_list_file(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kInvalidParameter, "cannot write " + path);
  write_edge_list(out, g);
}

}  // namespace glauber
