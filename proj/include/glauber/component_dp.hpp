#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "glauber/graph.hpp"
#include "glauber/models.hpp"
#include "glauber/rng.hpp"

namespace glauber {

inline constexpr int kDefaultMaxExcess = 12;

// One connected block of free sites with everything around it pinned, in
// local indices. Nodes are graph vertices: the component itself for vertex
// models, the endpoints of the component edges for matchings. Node 0 is
// the smallest vertex and roots a BFS spanning tree.
struct LocalComponent {
  SiteDomain domain = SiteDomain::kVertices;
  std::vector<int> nodes;   // global vertex ids, ascending
  std::vector<int> parent;  // local parent in the spanning tree, -1 at the root
  std::vector<int> order;   // BFS order (parents before children)
  std::vector<int> child_begin;  // children of v are order[child_begin[v] .. +child_count[v])
  std::vector<int> child_count;
  std::vector<std::pair<int, int>> excess;  // local endpoints, lexicographic in global ids
  std::vector<int> sites;        // global site ids of the free sites, ascending
  std::vector<int> node_site;    // matchings: local site of the edge to the parent; vertices: own site
  std::vector<int> excess_site;  // local site of each excess edge (matchings)
  std::vector<int> ones;         // pinned outside neighbors (or incident edges) with spin 1
  std::vector<int> zeros;        // ... with spin 0
  std::vector<std::pair<int, int>> boundary;  // (local node, pinned site) pairs behind ones/zeros

  int size() const { return static_cast<int>(nodes.size()); }
  int tree_excess() const { return static_cast<int>(excess.size()); }
  // Local index of a global site, or -1.
  int local_site(int global_site) const;
  // Recounts ones/zeros from the boundary list after pins outside the
  // component changed (the free sites themselves must be unchanged).
  void refresh_boundary(std::span<const std::int8_t> pins);
};

// Extracts free components from a full pin vector (Pinning::kFree marks
// free sites). Keeps stamp arrays between calls so that each call costs
// O(component size plus its boundary).
class ComponentBuilder {
 public:
  ComponentBuilder(const Graph& g, SiteDomain domain);

  // Component of free sites containing `seed` (which must be free).
  void build(std::span<const std::int8_t> pins, int seed, LocalComponent& out);

  const Graph& graph() const { return g_; }
  SiteDomain domain() const { return domain_; }

 private:
  bool site_marked(int s) const { return site_stamp_[s] == epoch_; }

  const Graph& g_;
  SiteDomain domain_;
  std::uint32_t epoch_ = 0;
  std::vector<std::uint32_t> site_stamp_;
  std::vector<std::uint32_t> vertex_stamp_;
  std::vector<int> vertex_local_;
  std::vector<int> site_local_;
  std::vector<int> queue_;
  std::vector<std::uint8_t> is_tree_;
};

// Exact marginals and samples on a LocalComponent by enumerating the spins
// at the excess edges (endpoints for vertex models, edges for matchings)
// and running a tree DP for each assignment. Reuses its buffers.
class ComponentSolver {
 public:
  explicit ComponentSolver(const ModelSpec& m, int k_max = kDefaultMaxExcess);

  const ModelSpec& model() const { return m_; }
  int k_max() const { return k_max_; }

  // P(site = 1) for a local site index. Throws kComponentTooComplex when
  // the component has more than k_max excess edges, kEmptySupport when the
  // pins leave no feasible configuration.
  double marginal(const LocalComponent& c, int local_site);

  // Exact sample of every free site; out[i] is the spin of c.sites[i].
  void sample(const LocalComponent& c, Rng& rng, std::vector<std::uint8_t>& out);

  // Natural log of the component partition function (given the pins).
  double log_partition(const LocalComponent& c);

 private:
  void check(const LocalComponent& c) const;
  void prepare(const LocalComponent& c);
  // Log partition function of one excess assignment; -inf when forbidden.
  // `forced` is a local site that must be 1, or -1.
  double vertex_pass(const LocalComponent& c, std::uint64_t assignment, int forced);
  double matching_pass(const LocalComponent& c, std::uint64_t assignment, int forced);
  double pass(const LocalComponent& c, std::uint64_t assignment, int forced) {
    return c.domain == SiteDomain::kVertices ? vertex_pass(c, assignment, forced)
                                             : matching_pass(c, assignment, forced);
  }
  void vertex_descend(const LocalComponent& c, Rng& rng, std::vector<std::uint8_t>& out);
  void matching_descend(const LocalComponent& c, std::uint64_t assignment, Rng& rng,
                        std::vector<std::uint8_t>& out);

  ModelSpec m_;
  int k_max_;
  double log_param_;
  // Per-call scratch.
  std::vector<int> xs_;           // vertex models: distinct excess endpoints (local)
  std::vector<int> x_index_;      // node -> position in xs_ or -1
  std::vector<double> w0_, w1_;   // node weights from the boundary
  std::vector<std::int8_t> fix_;
  std::vector<double> b0_, b1_;   // normalised subtree sums per node
  std::vector<std::int64_t> scale_;
  std::vector<double> r_;         // matchings: unmatched ratio per node
  std::vector<std::uint8_t> avail_;
  std::vector<std::int8_t> forced_child_;
};

// Marginal P(site = 1 | pins) computed on the free component containing
// the site. Sites adjacent to the component must be pinned, which holds by
// construction since the component is closed under free neighbors.
double conditional_marginal_dp(const Graph& g, const ModelSpec& m, const Pinning& pins, int site,
                               int k_max = kDefaultMaxExcess);

// Exact sample of the free component containing `seed`, returned as
// (site, spin) pairs in ascending site order.
std::vector<std::pair<int, std::uint8_t>> conditional_sample_dp(const Graph& g, const ModelSpec& m,
                                                                 const Pinning& pins, int seed,
                                                                 Rng& rng,
                                                                 int k_max = kDefaultMaxExcess);

}  // namespace glauber
