#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glauber/graph.hpp"
#include "glauber/models.hpp"

namespace glauber {

inline constexpr std::int64_t kSawTreeMaxNodes = 10'000'000;

// Tree of self-avoiding walks from a root, stored in level order so that
// the children of every node are contiguous. Node 0 is the root. A walk
// that closes a cycle becomes a terminal node carrying a fixed spin.
struct SawTree {
  int root_vertex = 0;
  std::vector<int> vertex;  // graph vertex of each node
  std::vector<int> parent;  // -1 for the root
  std::vector<int> depth;
  std::vector<std::int8_t> pin;  // Pinning::kFree, 0 or 1
  std::vector<int> child_begin;
  std::vector<int> child_count;
  bool truncated = false;  // some free node sat at the depth cap

  int size() const { return static_cast<int>(vertex.size()); }
  bool is_terminal(int node) const { return pin[node] != Pinning::kFree; }
  int terminal_count() const;
  int max_depth() const;
  std::vector<int> children(int node) const;
};

// Cycle-closing convention: a walk ending at u that would step back to an
// earlier vertex w becomes a terminal labelled w, pinned to 1 when u is
// larger than the neighbor through which the walk first left w and to 0
// otherwise. Vertices pinned in `pins` (when given) become terminals with
// their pinned spin. Throws kEnumerationOverflow above kSawTreeMaxNodes.
SawTree saw_tree(const Graph& g, int root, int depth_cap, const Pinning* pins = nullptr);

struct RatioProfile {
  std::vector<double> ratio;  // R per node; +inf for nodes pinned to 1
  std::vector<double> alpha;  // branching weight per node

  // R/(1+R) at the root (hard-core), or R itself for matchings.
  double root_value() const { return ratio.empty() ? 0.0 : ratio[0]; }
};

// R_v = lambda * prod 1/(1+R_child), leaves lambda, pinned nodes 0 or inf.
// alpha_v = 1 + (1/d) * sum alpha_child over free children.
RatioProfile hardcore_ratio(const SawTree& t, double lambda, double d = 1.0);
double hardcore_root_marginal(const RatioProfile& r);

// R_u = probability that u is unmatched in its subtree:
// 1/(1 + gamma * sum R_child), leaves 1. Terminal pins are ignored.
RatioProfile matchings_unmatched(const SawTree& t, double gamma, double d = 1.0);

// Influence of the root on every node (hard-core, Ising), or of the edge
// (root, first child) on the edge from each node to its parent
// (matchings; the root entry is 0). Pinned nodes get 0.
std::vector<double> tree_influence(const SawTree& t, const ModelSpec& m);

// Sum over w in W of ((1-beta)/(1+beta))^dist(v, w) on a tree.
double ising_decay_bound(const Graph& tree, int v, std::span<const int> w, double beta);

struct BranchingProfile {
  int len_cap = 0;
  std::vector<std::int64_t> paths;  // N_{v,l} for l = 0..len_cap
  double value = 0.0;               // truncated S_v
  ExtendedReal tail_bound;          // bound on the omitted part of the series
};

// Default truncation: ceil(4 log n / log d) for d > 1, else n - 1 (all
// simple paths).
int default_len_cap(int n, double d);

// Exact simple-path counts by depth-first enumeration. Throws
// kEnumerationOverflow when a level holds more than count_cap paths.
BranchingProfile branching_value(const Graph& g, int v, double d, int len_cap,
                                 std::int64_t count_cap);

struct GoodCheck {
  std::vector<std::int64_t> levels;  // vertices at distance r, r = 0..R
  double value = 0.0;                // sum levels[r] / ((1+eps) d)^r
  double threshold = 0.0;            // eps * log n
  bool good = false;
};

// floor((log log n)^2) - 1, clamped to >= 0.
int default_good_radius(int n);

GoodCheck epsilon_good_check(const Graph& g, int v, double d, double eps, int radius);

// Number of vertices at each distance 0..radius from v.
std::vector<std::int64_t> level_counts(const Graph& g, int v, int radius);

}  // namespace glauber
