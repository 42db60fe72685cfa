#include "glauber/component_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glauber/error.hpp"

namespace glauber {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.69314718055994530942;

// Streaming log-sum-exp in a fixed order.
struct LogSum {
  double max = kNegInf;
  double sum = 0.0;

  void add(double x) {
    if (x == kNegInf) return;
    if (x <= max) {
      sum += std::exp(x - max);
    } else {
      sum = sum * std::exp(max - x) + 1.0;
      max = x;
    }
  }
  double value() const { return max == kNegInf ? kNegInf : max + std::log(sum); }
};

}  // namespace

int LocalComponent::local_site(int global_site) const {
  auto it = std::lower_bound(sites.begin(), sites.end(), global_site);
  if (it == sites.end() || *it != global_site) return -1;
  return static_cast<int>(it - sites.begin());
}

void LocalComponent::refresh_boundary(std::span<const std::int8_t> pins) {
  ones.assign(nodes.size(), 0);
  zeros.assign(nodes.size(), 0);
  for (const auto& [v, s] : boundary) (pins[s] == 1 ? ones[v] : zeros[v]) += 1;
}

// ---------------------------------------------------------------------------
// ComponentBuilder

ComponentBuilder::ComponentBuilder(const Graph& g, SiteDomain domain)
    : g_(g),
      domain_(domain),
      site_stamp_(site_count(g, domain), 0),
      vertex_stamp_(g.num_vertices(), 0),
      vertex_local_(g.num_vertices(), -1),
      site_local_(site_count(g, domain), -1) {}

void ComponentBuilder::build(std::span<const std::int8_t> pins, int seed, LocalComponent& out) {
  const int num_sites = static_cast<int>(site_stamp_.size());
  if (static_cast<int>(pins.size()) != num_sites) {
    throw Error(ErrorKind::kInvalidParameter, "pin vector does not match the site count");
  }
  if (seed < 0 || seed >= num_sites || pins[seed] != Pinning::kFree) {
    throw Error(ErrorKind::kInvalidParameter, "component seed must be a free site");
  }
  if (++epoch_ == 0) {
    std::fill(site_stamp_.begin(), site_stamp_.end(), 0);
    std::fill(vertex_stamp_.begin(), vertex_stamp_.end(), 0);
    epoch_ = 1;
  }
  const bool edges = domain_ == SiteDomain::kEdges;

  // Free sites reachable from the seed.
  queue_.assign(1, seed);
  site_stamp_[seed] = epoch_;
  for (std::size_t head = 0; head < queue_.size(); ++head) {
    const int s = queue_[head];
    if (!edges) {
      for (int w : g_.neighbors(s)) {
        if (pins[w] == Pinning::kFree && !site_marked(w)) {
          site_stamp_[w] = epoch_;
          queue_.push_back(w);
        }
      }
    } else {
      const auto [a, b] = g_.edge(s);
      for (int end : {a, b}) {
        for (int f : g_.incident_edges(end)) {
          if (pins[f] == Pinning::kFree && !site_marked(f)) {
            site_stamp_[f] = epoch_;
            queue_.push_back(f);
          }
        }
      }
    }
  }
  out.domain = domain_;
  out.sites.assign(queue_.begin(), queue_.end());
  std::sort(out.sites.begin(), out.sites.end());
  for (int i = 0; i < static_cast<int>(out.sites.size()); ++i) site_local_[out.sites[i]] = i;

  out.nodes.clear();
  if (!edges) {
    out.nodes = out.sites;
  } else {
    for (int e : out.sites) {
      const auto [a, b] = g_.edge(e);
      out.nodes.push_back(a);
      out.nodes.push_back(b);
    }
    std::sort(out.nodes.begin(), out.nodes.end());
    out.nodes.erase(std::unique(out.nodes.begin(), out.nodes.end()), out.nodes.end());
  }
  const int n = static_cast<int>(out.nodes.size());
  for (int i = 0; i < n; ++i) {
    vertex_stamp_[out.nodes[i]] = epoch_;
    vertex_local_[out.nodes[i]] = i;
  }
  auto in_comp = [this](int v) { return vertex_stamp_[v] == epoch_; };

  // BFS spanning tree from the smallest node.
  out.parent.assign(n, -2);
  out.node_site.assign(n, -1);
  out.child_begin.assign(n, 0);
  out.child_count.assign(n, 0);
  out.order.assign(1, 0);
  out.parent[0] = -1;
  is_tree_.assign(edges ? out.sites.size() : 0, 0);
  for (std::size_t head = 0; head < out.order.size(); ++head) {
    const int v = out.order[head];
    const int gv = out.nodes[v];
    out.child_begin[v] = static_cast<int>(out.order.size());
    const auto nb = g_.neighbors(gv);
    const auto inc = g_.incident_edges(gv);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const int w = nb[i];
      if (!in_comp(w)) continue;
      if (edges && !site_marked(inc[i])) continue;
      const int lw = vertex_local_[w];
      if (out.parent[lw] != -2) continue;
      out.parent[lw] = v;
      out.order.push_back(lw);
      ++out.child_count[v];
      if (edges) {
        const int ls = site_local_[inc[i]];
        out.node_site[lw] = ls;
        is_tree_[ls] = 1;
      }
    }
  }

  out.excess.clear();
  out.excess_site.clear();
  if (!edges) {
    for (int u = 0; u < n; ++u) {
      out.node_site[u] = u;
      for (int w : g_.neighbors(out.nodes[u])) {
        if (w <= out.nodes[u] || !in_comp(w)) continue;
        const int lw = vertex_local_[w];
        if (out.parent[lw] == u || out.parent[u] == lw) continue;
        out.excess.emplace_back(u, lw);
      }
    }
  } else {
    for (int i = 0; i < static_cast<int>(out.sites.size()); ++i) {
      if (is_tree_[i]) continue;
      const auto [a, b] = g_.edge(out.sites[i]);
      out.excess.emplace_back(vertex_local_[a], vertex_local_[b]);
      out.excess_site.push_back(i);
    }
  }

  out.boundary.clear();
  for (int v = 0; v < n; ++v) {
    const int gv = out.nodes[v];
    if (!edges) {
      for (int w : g_.neighbors(gv))
        if (!in_comp(w)) out.boundary.emplace_back(v, w);
    } else {
      for (int f : g_.incident_edges(gv))
        if (!site_marked(f)) out.boundary.emplace_back(v, f);
    }
  }
  out.refresh_boundary(pins);
}

// ---------------------------------------------------------------------------
// ComponentSolver

ComponentSolver::ComponentSolver(const ModelSpec& m, int k_max)
    : m_(m), k_max_(k_max), log_param_(std::log(m.parameter)) {
  if (k_max < 0 || k_max > 16) throw Error(ErrorKind::kInvalidParameter, "k_max must lie in [0, 16]");
}

void ComponentSolver::check(const LocalComponent& c) const {
  if ((c.domain == SiteDomain::kEdges) != (m_.domain() == SiteDomain::kEdges)) {
    throw Error(ErrorKind::kInvalidParameter, "component domain does not match the model");
  }
  if (c.tree_excess() > k_max_) {
    throw Error(ErrorKind::kComponentTooComplex,
                "component with " + std::to_string(c.size()) + " vertices starting at vertex " +
                    std::to_string(c.nodes.front()) + " has tree-excess " +
                    std::to_string(c.tree_excess()) + " > k_max = " + std::to_string(k_max_));
  }
}

void ComponentSolver::prepare(const LocalComponent& c) {
  const int n = c.size();
  b0_.resize(n);
  b1_.resize(n);
  scale_.resize(n);
  fix_.resize(n);
  if (c.domain == SiteDomain::kVertices) {
    w0_.resize(n);
    w1_.resize(n);
    for (int v = 0; v < n; ++v) {
      if (m_.kind == ModelKind::kHardCore) {
        w0_[v] = 1.0;
        w1_[v] = c.ones[v] > 0 ? 0.0 : m_.parameter;
      } else {
        w0_[v] = std::pow(m_.parameter, c.zeros[v]);
        w1_[v] = std::pow(m_.parameter, c.ones[v]);
      }
    }
    x_index_.assign(n, -1);
    xs_.clear();
    for (const auto& [x, y] : c.excess) {
      for (int z : {x, y}) {
        if (x_index_[z] < 0) {
          x_index_[z] = 0;
          xs_.push_back(z);
        }
      }
    }
    std::sort(xs_.begin(), xs_.end());
    for (int i = 0; i < static_cast<int>(xs_.size()); ++i) x_index_[xs_[i]] = i;
  } else {
    r_.resize(n);
    avail_.resize(n);
  }
}

double ComponentSolver::vertex_pass(const LocalComponent& c, std::uint64_t assignment, int forced) {
  const bool hard = m_.kind == ModelKind::kHardCore;
  const double beta = m_.parameter;
  std::fill(fix_.begin(), fix_.end(), std::int8_t{-1});
  for (int i = 0; i < static_cast<int>(xs_.size()); ++i) {
    fix_[xs_[i]] = static_cast<std::int8_t>((assignment >> i) & 1U);
  }
  double log_extra = 0.0;
  for (const auto& [x, y] : c.excess) {
    if (hard) {
      if (fix_[x] == 1 && fix_[y] == 1) return kNegInf;
    } else if (fix_[x] == fix_[y]) {
      log_extra += log_param_;
    }
  }
  if (forced >= 0) {
    if (fix_[forced] == 0) return kNegInf;
    fix_[forced] = 1;
  }
  for (int pos = c.size() - 1; pos >= 0; --pos) {
    const int v = c.order[pos];
    double v0 = fix_[v] == 1 ? 0.0 : w0_[v];
    double v1 = fix_[v] == 0 ? 0.0 : w1_[v];
    std::int64_t sc = 0;
    for (int k = c.child_begin[v]; k < c.child_begin[v] + c.child_count[v]; ++k) {
      const int ch = c.order[k];
      if (hard) {
        v0 *= b0_[ch] + b1_[ch];
        v1 *= b0_[ch];
      } else {
        v0 *= beta * b0_[ch] + b1_[ch];
        v1 *= b0_[ch] + beta * b1_[ch];
      }
      sc += scale_[ch];
    }
    const double mx = std::max(v0, v1);
    if (mx <= 0.0) return kNegInf;
    int e = 0;
    std::frexp(mx, &e);
    b0_[v] = std::ldexp(v0, -e);
    b1_[v] = std::ldexp(v1, -e);
    scale_[v] = sc + e;
  }
  return std::log(b0_[0] + b1_[0]) + static_cast<double>(scale_[0]) * kLn2 + log_extra;
}

double ComponentSolver::matching_pass(const LocalComponent& c, std::uint64_t assignment, int forced) {
  const int n = c.size();
  const double gamma = m_.parameter;
  for (int v = 0; v < n; ++v) avail_[v] = c.ones[v] == 0;
  int chosen = 0;
  for (int j = 0; j < c.tree_excess(); ++j) {
    if (!((assignment >> j) & 1U)) continue;
    const auto [x, y] = c.excess[j];
    if (!avail_[x] || !avail_[y]) return kNegInf;
    avail_[x] = avail_[y] = 0;
    ++chosen;
  }
  double mant = 1.0;
  std::int64_t expo = 0;
  for (int pos = n - 1; pos >= 0; --pos) {
    const int v = c.order[pos];
    double factor;
    if (forced >= 0 && c.parent[forced] == v) {
      if (!avail_[v] || !avail_[forced]) return kNegInf;
      factor = gamma * r_[forced];
      r_[v] = 0.0;
    } else {
      double sum = 0.0;
      if (avail_[v]) {
        for (int k = c.child_begin[v]; k < c.child_begin[v] + c.child_count[v]; ++k) {
          const int ch = c.order[k];
          if (avail_[ch]) sum += r_[ch];
        }
      }
      factor = 1.0 + gamma * sum;
      r_[v] = 1.0 / factor;
    }
    mant *= factor;
    int e = 0;
    mant = std::frexp(mant, &e);
    expo += e;
  }
  return std::log(mant) + static_cast<double>(expo) * kLn2 + chosen * log_param_;
}

double ComponentSolver::log_partition(const LocalComponent& c) {
  check(c);
  prepare(c);
  const int bits = c.domain == SiteDomain::kVertices ? static_cast<int>(xs_.size()) : c.tree_excess();
  LogSum total;
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << bits); ++a) total.add(pass(c, a, -1));
  return total.value();
}

double ComponentSolver::marginal(const LocalComponent& c, int local_site) {
  check(c);
  if (local_site < 0 || local_site >= static_cast<int>(c.sites.size())) {
    throw Error(ErrorKind::kInvalidParameter, "target site is not in the component");
  }
  prepare(c);
  const bool vertices = c.domain == SiteDomain::kVertices;
  const int bits = vertices ? static_cast<int>(xs_.size()) : c.tree_excess();
  // For matchings the target is either an excess edge (read off the
  // assignment) or the tree edge above some node (forced in the DP).
  int forced = -1;
  int excess_bit = -1;
  if (vertices) {
    if (x_index_[local_site] >= 0) {
      excess_bit = x_index_[local_site];
    } else {
      forced = local_site;
    }
  } else {
    for (int j = 0; j < c.tree_excess(); ++j)
      if (c.excess_site[j] == local_site) excess_bit = j;
    if (excess_bit < 0) {
      for (int v = 1; v < c.size(); ++v)
        if (c.node_site[v] == local_site) forced = v;
    }
  }
  LogSum total, hit;
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << bits); ++a) {
    const double lz = pass(c, a, -1);
    total.add(lz);
    if (excess_bit >= 0) {
      if ((a >> excess_bit) & 1U) hit.add(lz);
    } else if (lz != kNegInf) {
      hit.add(pass(c, a, forced));
    }
  }
  const double lt = total.value();
  if (lt == kNegInf) throw Error(ErrorKind::kEmptySupport, "pins leave no feasible configuration");
  const double lh = hit.value();
  return lh == kNegInf ? 0.0 : std::min(1.0, std::exp(lh - lt));
}

void ComponentSolver::sample(const LocalComponent& c, Rng& rng, std::vector<std::uint8_t>& out) {
  check(c);
  prepare(c);
  out.assign(c.sites.size(), 0);
  const bool vertices = c.domain == SiteDomain::kVertices;
  const int bits = vertices ? static_cast<int>(xs_.size()) : c.tree_excess();
  std::uint64_t chosen = 0;
  if (bits > 0) {
    LogSum total;
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << bits); ++a) total.add(pass(c, a, -1));
    const double lt = total.value();
    if (lt == kNegInf) throw Error(ErrorKind::kEmptySupport, "pins leave no feasible configuration");
    const double u = rng.uniform();
    double acc = 0.0;
    bool found = false;
    std::uint64_t last_feasible = 0;
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << bits); ++a) {
      const double lz = pass(c, a, -1);
      if (lz == kNegInf) continue;
      last_feasible = a;
      acc += std::exp(lz - lt);
      if (u < acc) {
        chosen = a;
        found = true;
        break;
      }
    }
    if (!found) chosen = last_feasible;
  }
  if (pass(c, chosen, -1) == kNegInf) {
    throw Error(ErrorKind::kEmptySupport, "pins leave no feasible configuration");
  }
  if (vertices) {
    vertex_descend(c, rng, out);
  } else {
    matching_descend(c, chosen, rng, out);
  }
}

void ComponentSolver::vertex_descend(const LocalComponent& c, Rng& rng, std::vector<std::uint8_t>& out) {
  const bool hard = m_.kind == ModelKind::kHardCore;
  const double beta = m_.parameter;
  // out doubles as the spin store since node i is local site i.
  for (int pos = 0; pos < c.size(); ++pos) {
    const int v = c.order[pos];
    double t0 = b0_[v], t1 = b1_[v];
    if (c.parent[v] >= 0) {
      const int sp = out[c.parent[v]];
      if (hard) {
        if (sp == 1) t1 = 0.0;
      } else if (sp == 1) {
        t1 *= beta;
      } else {
        t0 *= beta;
      }
    }
    out[v] = rng.uniform() * (t0 + t1) < t1 ? 1 : 0;
  }
}

void ComponentSolver::matching_descend(const LocalComponent& c, std::uint64_t assignment, Rng& rng,
                                       std::vector<std::uint8_t>& out) {
  const double gamma = m_.parameter;
  for (int j = 0; j < c.tree_excess(); ++j)
    if ((assignment >> j) & 1U) out[c.excess_site[j]] = 1;
  // fix_ holds the mode: 0 = free within its subtree, 1 = must stay unmatched.
  std::fill(fix_.begin(), fix_.end(), std::int8_t{0});
  for (int pos = 0; pos < c.size(); ++pos) {
    const int v = c.order[pos];
    if (fix_[v] == 1 || !avail_[v]) continue;
    double total = 1.0;
    for (int k = c.child_begin[v]; k < c.child_begin[v] + c.child_count[v]; ++k) {
      const int ch = c.order[k];
      if (avail_[ch]) total += gamma * r_[ch];
    }
    double u = rng.uniform() * total;
    if (u < 1.0) continue;
    u -= 1.0;
    int pick = -1;
    for (int k = c.child_begin[v]; k < c.child_begin[v] + c.child_count[v]; ++k) {
      const int ch = c.order[k];
      if (!avail_[ch]) continue;
      pick = ch;
      u -= gamma * r_[ch];
      if (u < 0.0) break;
    }
    if (pick >= 0) {
      out[c.node_site[pick]] = 1;
      fix_[pick] = 1;
    }
  }
}

// ---------------------------------------------------------------------------
// Whole-graph conveniences

double conditional_marginal_dp(const Graph& g, const ModelSpec& m, const Pinning& pins, int site,
                               int k_max) {
  pins.validate(site_count(g, m));
  ComponentBuilder builder(g, m.domain());
  LocalComponent comp;
  builder.build(pins.spins, site, comp);
  ComponentSolver solver(m, k_max);
  return solver.marginal(comp, comp.local_site(site));
}

std::vector<std::pair<int, std::uint8_t>> conditional_sample_dp(const Graph& g, const ModelSpec& m,
                                                                 const Pinning& pins, int seed,
                                                                 Rng& rng, int k_max) {
  pins.validate(site_count(g, m));
  ComponentBuilder builder(g, m.domain());
  LocalComponent comp;
  builder.build(pins.spins, seed, comp);
  ComponentSolver solver(m, k_max);
  std::vector<std::uint8_t> spins;
  solver.sample(comp, rng, spins);
  std::vector<std::pair<int, std::uint8_t>> out;
  out.reserve(spins.size());
  for (std::size_t i = 0; i < spins.size(); ++i) out.emplace_back(comp.sites[i], spins[i]);
  return out;
}

}  // namespace glauber
