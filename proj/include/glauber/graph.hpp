#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace glauber {

// Undirected edge with the smaller endpoint first.
using Edge = std::pair<int, int>;

// Immutable simple undirected graph in compressed adjacency form. Vertices
// are 0..n-1, neighbor lists are sorted ascending, and edges() is sorted
// lexicographically so that edge indices are canonical.
class Graph {
 public:
  Graph() = default;

  // Throws Error(kInvalidParameter) on self-loops, duplicates or endpoints
  // outside [0, n).
  Graph(int n, std::vector<Edge> edges);

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int index) const { return edges_[index]; }

  std::span<const int> neighbors(int v) const {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  // Edge indices parallel to neighbors(v).
  std::span<const int> incident_edges(int v) const {
    return {edge_ids_.data() + offsets_[v], edge_ids_.data() + offsets_[v + 1]};
  }
  int degree(int v) const { return offsets_[v + 1] - offsets_[v]; }
  int max_degree() const;

  // Index of edge {u, v} in edges(), or -1.
  int edge_index(int u, int v) const;
  bool adjacent(int u, int v) const { return edge_index(u, v) >= 0; }

  // 64-bit FNV-1a of the canonical edge-list text.
  std::uint64_t hash() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> offsets_{0};
  std::vector<int> neighbors_;
  std::vector<int> edge_ids_;
};

// Degree split: low holds the vertices of degree <= threshold.
struct VertexPartition {
  double threshold = 0.0;
  std::vector<int> low;
  std::vector<int> high;
  std::vector<std::uint8_t> is_low;  // indexed by vertex

  bool contains_low(int v) const { return is_low[v] != 0; }
};

// One connected piece of an induced subgraph: sorted vertices, the BFS
// spanning tree from the smallest vertex and the remaining (excess) edges.
struct Component {
  std::vector<int> vertices;
  std::vector<Edge> tree_edges;
  std::vector<Edge> excess_edges;

  int tree_excess() const { return static_cast<int>(excess_edges.size()); }
};

struct ComponentDecomposition {
  std::vector<Component> components;

  int total_tree_excess() const;
};

struct LowVertexComponent {
  Component component;
  // Low-degree vertices outside the component adjacent to it.
  std::vector<int> boundary;
};

// G(n, d/n) by geometric skipping over the C(n,2) pair sequence.
Graph generate_gnp(int n, double d, std::uint64_t seed);

VertexPartition degree_partition(const Graph& g, double threshold);

// Components of G[s], ordered by smallest vertex.
ComponentDecomposition induced_components(const Graph& g, std::span<const int> s);

// Component of u inside G[high ∪ {u}] plus its low-degree boundary.
LowVertexComponent component_of_low_vertex(const Graph& g, const VertexPartition& p, int u);

// Vertices within graph distance r of v, sorted.
std::vector<int> ball(const Graph& g, int v, int r);

// Distances from v (-1 when unreachable), BFS cut at max_depth if >= 0.
std::vector<int> bfs_distances(const Graph& g, int v, int max_depth = -1);

// Every connected vertex set of size k containing v. Throws
// Error(kEnumerationOverflow) once more than cap sets are found.
std::vector<std::vector<int>> connected_sets_from(const Graph& g, int v, int k, std::int64_t cap);

// Same enumeration restricted to sets whose smallest vertex is v, reported
// through a visitor so that callers can stream over all sets of a graph
// exactly once. Returns the number of sets visited.
template <typename Visitor>
std::int64_t for_each_connected_set_rooted_at_min(const Graph& g, int v, int k, std::int64_t cap,
                                                  Visitor&& visit);

// Edge-list text format: "n m" then m lines "u v" with u < v.
Graph read_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list_file(const std::string& path);
void write_edge_list_file(const std::string& path, const Graph& g);

}  // namespace glauber

#include "glauber/detail/connected_sets.hpp"
