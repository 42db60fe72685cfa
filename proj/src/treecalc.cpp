#include "glauber/treecalc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glauber/error.hpp"

namespace glauber {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int SawTree::terminal_count() const {
  int count = 0;
  for (auto p : pin) count += p != Pinning::kFree;
  return count;
}

int SawTree::max_depth() const {
  return depth.empty() ? 0 : *std::max_element(depth.begin(), depth.end());
}

std::vector<int> SawTree::children(int node) const {
  std::vector<int> out(child_count[node]);
  for (int i = 0; i < child_count[node]; ++i) out[i] = child_begin[node] + i;
  return out;
}

SawTree saw_tree(const Graph& g, int root, int depth_cap, const Pinning* pins) {
  if (root < 0 || root >= g.num_vertices()) throw Error(ErrorKind::kInvalidParameter, "root out of range");
  if (depth_cap < 0) throw Error(ErrorKind::kInvalidParameter, "depth cap must be >= 0");
  if (pins) {
    pins->validate(g.num_vertices());
    if (!pins->is_free(root)) throw Error(ErrorKind::kInvalidParameter, "root must be free");
  }
  SawTree t;
  t.root_vertex = root;
  t.vertex.push_back(root);
  t.parent.push_back(-1);
  t.depth.push_back(0);
  t.pin.push_back(Pinning::kFree);
  t.child_begin.push_back(0);
  t.child_count.push_back(0);

  for (std::size_t x = 0; x < t.vertex.size(); ++x) {
    t.child_begin[x] = static_cast<int>(t.vertex.size());
    if (t.pin[x] != Pinning::kFree) continue;
    if (t.depth[x] >= depth_cap) {
      if (g.degree(t.vertex[x]) > (t.parent[x] < 0 ? 0 : 1)) t.truncated = true;
      continue;
    }
    const int u = t.vertex[x];
    const int from = t.parent[x] < 0 ? -1 : t.vertex[t.parent[x]];
    for (int w : g.neighbors(u)) {
      if (w == from) continue;
      // Is w already on the walk? If so, find the vertex the walk moved to
      // right after leaving w.
      int next_after_w = -1;
      for (int y = static_cast<int>(x), prev = -1; y >= 0; prev = y, y = t.parent[y]) {
        if (t.vertex[y] == w) {
          next_after_w = t.vertex[prev];
          break;
        }
      }
      std::int8_t pin = Pinning::kFree;
      if (next_after_w >= 0) {
        pin = u > next_after_w ? 1 : 0;
      } else if (pins && !pins->is_free(w)) {
        pin = pins->spins[w];
      }
      if (static_cast<std::int64_t>(t.vertex.size()) >= kSawTreeMaxNodes) {
        throw Error(ErrorKind::kEnumerationOverflow, "self-avoiding walk tree exceeds " +
                                                         std::to_string(kSawTreeMaxNodes) + " nodes");
      }
      t.vertex.push_back(w);
      t.parent.push_back(static_cast<int>(x));
      t.depth.push_back(t.depth[x] + 1);
      t.pin.push_back(pin);
      t.child_begin.push_back(0);
      t.child_count.push_back(0);
      ++t.child_count[x];
    }
  }
  return t;
}

RatioProfile hardcore_ratio(const SawTree& t, double lambda, double d) {
  if (!(lambda > 0.0) || !(d > 0.0)) throw Error(ErrorKind::kInvalidParameter, "need lambda, d > 0");
  RatioProfile r;
  r.ratio.assign(t.size(), 0.0);
  r.alpha.assign(t.size(), 1.0);
  for (int x = t.size() - 1; x >= 0; --x) {
    if (t.pin[x] == 1) {
      if (t.parent[x] >= 0 && t.pin[t.parent[x]] == 1) {
        throw Error(ErrorKind::kEmptySupport, "adjacent nodes both pinned to 1");
      }
      r.ratio[x] = kInf;
      continue;
    }
    if (t.pin[x] == 0) {
      r.ratio[x] = 0.0;
      continue;
    }
    double value = lambda;
    double alpha_sum = 0.0;
    for (int c = t.child_begin[x]; c < t.child_begin[x] + t.child_count[x]; ++c) {
      value = std::isinf(r.ratio[c]) ? 0.0 : value / (1.0 + r.ratio[c]);
      if (t.pin[c] == Pinning::kFree) alpha_sum += r.alpha[c];
    }
    r.ratio[x] = value;
    r.alpha[x] = t.child_count[x] == 0 ? 1.0 : 1.0 + alpha_sum / d;
  }
  return r;
}

double hardcore_root_marginal(const RatioProfile& r) {
  const double R = r.root_value();
  return std::isinf(R) ? 1.0 : R / (1.0 + R);
}

RatioProfile matchings_unmatched(const SawTree& t, double gamma, double d) {
  if (!(gamma > 0.0) || !(d > 0.0)) throw Error(ErrorKind::kInvalidParameter, "need gamma, d > 0");
  RatioProfile r;
  r.ratio.assign(t.size(), 1.0);
  r.alpha.assign(t.size(), 1.0);
  for (int x = t.size() - 1; x >= 0; --x) {
    double sum = 0.0, alpha_sum = 0.0;
    for (int c = t.child_begin[x]; c < t.child_begin[x] + t.child_count[x]; ++c) {
      sum += r.ratio[c];
      alpha_sum += r.alpha[c];
    }
    r.ratio[x] = 1.0 / (1.0 + gamma * sum);
    r.alpha[x] = t.child_count[x] == 0 ? 1.0 : 1.0 + alpha_sum / d;
  }
  return r;
}

namespace {

std::vector<double> hardcore_influence(const SawTree& t, double lambda) {
  const RatioProfile r = hardcore_ratio(t, lambda);
  std::vector<double> inf(t.size(), 0.0);
  inf[0] = 1.0;
  for (int x = 1; x < t.size(); ++x) {
    if (t.pin[x] != Pinning::kFree) continue;
    const double R = r.ratio[x];
    inf[x] = inf[t.parent[x]] * (-R / (1.0 + R));
  }
  return inf;
}

std::vector<double> matchings_influence(const SawTree& t, double gamma) {
  std::vector<double> inf(t.size(), 0.0);
  if (t.size() < 2 || t.child_count[0] == 0) return inf;
  const RatioProfile r = matchings_unmatched(t, gamma);
  const int first = t.child_begin[0];
  double others = 0.0;
  for (int c = first + 1; c < first + t.child_count[0]; ++c) others += r.ratio[c];
  const double root_without_first = 1.0 / (1.0 + gamma * others);
  for (int x = 1; x < t.size(); ++x) {
    const int p = t.parent[x];
    if (x == first) {
      inf[x] = 1.0;
    } else if (p == 0) {
      inf[x] = -gamma * r.ratio[x] * root_without_first;
    } else {
      inf[x] = inf[p] * (-gamma * r.ratio[x] * r.ratio[p]);
    }
  }
  return inf;
}

std::vector<double> ising_influence(const SawTree& t, double beta) {
  const int n = t.size();
  // Normalised subtree partition functions given the node's own spin.
  std::vector<double> b0(n), b1(n);
  for (int x = n - 1; x >= 0; --x) {
    double v0 = t.pin[x] == 1 ? 0.0 : 1.0;
    double v1 = t.pin[x] == 0 ? 0.0 : 1.0;
    for (int c = t.child_begin[x]; c < t.child_begin[x] + t.child_count[x]; ++c) {
      v0 *= beta * b0[c] + b1[c];
      v1 *= b0[c] + beta * b1[c];
    }
    const double mx = std::max(v0, v1);
    if (mx <= 0.0) throw Error(ErrorKind::kEmptySupport, "pinned tree has no feasible spin");
    b0[x] = v0 / mx;
    b1[x] = v1 / mx;
  }
  auto marginals_given_root = [&](int spin) {
    std::vector<double> p(n, 0.0);
    p[0] = spin;
    for (int x = 1; x < n; ++x) {
      const int q = t.parent[x];
      const double given1 = beta * b1[x] / (b0[x] + beta * b1[x]);
      const double given0 = b1[x] / (beta * b0[x] + b1[x]);
      p[x] = p[q] * given1 + (1.0 - p[q]) * given0;
    }
    return p;
  };
  const auto up = marginals_given_root(1);
  const auto down = marginals_given_root(0);
  std::vector<double> inf(n);
  for (int x = 0; x < n; ++x) inf[x] = t.pin[x] == Pinning::kFree ? up[x] - down[x] : 0.0;
  return inf;
}

}  // namespace

std::vector<double> tree_influence(const SawTree& t, const ModelSpec& m) {
  switch (m.kind) {
    case ModelKind::kHardCore: return hardcore_influence(t, m.parameter);
    case ModelKind::kMonomerDimer: return matchings_influence(t, m.parameter);
    case ModelKind::kIsing: return ising_influence(t, m.parameter);
  }
  return {};
}

double ising_decay_bound(const Graph& tree, int v, std::span<const int> w, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorKind::kInvalidParameter, "beta must lie in (0,1)");
  const auto dist = bfs_distances(tree, v);
  const double rate = (1.0 - beta) / (1.0 + beta);
  double total = 0.0;
  for (int x : w) {
    if (x < 0 || x >= tree.num_vertices()) throw Error(ErrorKind::kInvalidParameter, "vertex out of range");
    if (dist[x] >= 0) total += std::pow(rate, dist[x]);
  }
  return total;
}

int default_len_cap(int n, double d) {
  if (n <= 1) return 0;
  if (d > 1.0) {
    return std::max(1, static_cast<int>(std::ceil(4.0 * std::log(static_cast<double>(n)) / std::log(d))));
  }
  return n - 1;
}

BranchingProfile branching_value(const Graph& g, int v, double d, int len_cap, std::int64_t count_cap) {
  if (!(d > 0.0)) throw Error(ErrorKind::kInvalidParameter, "d must be > 0");
  if (len_cap < 0 || count_cap < 1) throw Error(ErrorKind::kInvalidParameter, "caps must be positive");
  if (v < 0 || v >= g.num_vertices()) throw Error(ErrorKind::kInvalidParameter, "vertex out of range");
  BranchingProfile out;
  out.len_cap = len_cap;
  out.paths.assign(len_cap + 1, 0);
  out.paths[0] = 1;

  thread_local std::vector<std::uint8_t> on_path;
  if (static_cast<int>(on_path.size()) < g.num_vertices()) on_path.resize(g.num_vertices(), 0);
  struct Frame {
    int vertex;
    int next;  // position in the neighbor list
  };
  std::vector<Frame> stack{{v, 0}};
  on_path[v] = 1;
  try {
    while (!stack.empty()) {
      Frame& top = stack.back();
      const auto nb = g.neighbors(top.vertex);
      const int level = static_cast<int>(stack.size()) - 1;
      if (level == len_cap || top.next == static_cast<int>(nb.size())) {
        on_path[top.vertex] = 0;
        stack.pop_back();
        continue;
      }
      const int w = nb[top.next++];
      if (on_path[w]) continue;
      if (++out.paths[level + 1] > count_cap) {
        throw Error(ErrorKind::kEnumerationOverflow,
                    "more than " + std::to_string(count_cap) + " paths at length " + std::to_string(level + 1));
      }
      on_path[w] = 1;
      stack.push_back({w, 0});
    }
  } catch (...) {
    for (const auto& f : stack) on_path[f.vertex] = 0;
    throw;
  }

  double scale = 1.0;
  for (int l = 0; l <= len_cap; ++l) {
    out.value += static_cast<double>(out.paths[l]) / scale;
    scale *= d;
  }
  const double delta = g.max_degree();
  if (out.paths[len_cap] == 0) {
    out.tail_bound = ExtendedReal::finite(0.0);
  } else if (delta < d) {
    const double q = delta / d;
    out.tail_bound = ExtendedReal::finite(static_cast<double>(out.paths[len_cap]) / std::pow(d, len_cap) *
                                          q / (1.0 - q));
  } else {
    out.tail_bound = ExtendedReal::infinity();
  }
  return out;
}

int default_good_radius(int n) {
  if (n < 3) return 0;
  const double ll = std::log(std::log(static_cast<double>(n)));
  if (!(ll > 0.0)) return 0;
  return std::max(0, static_cast<int>(std::floor(ll * ll)) - 1);
}

std::vector<std::int64_t> level_counts(const Graph& g, int v, int radius) {
  if (v < 0 || v >= g.num_vertices()) throw Error(ErrorKind::kInvalidParameter, "vertex out of range");
  if (radius < 0) throw Error(ErrorKind::kInvalidParameter, "radius must be >= 0");
  thread_local std::vector<int> dist;
  if (static_cast<int>(dist.size()) < g.num_vertices()) dist.resize(g.num_vertices(), -1);
  std::vector<std::int64_t> levels(radius + 1, 0);
  std::vector<int> queue{v};
  dist[v] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int x = queue[head];
    ++levels[dist[x]];
    if (dist[x] == radius) continue;
    for (int w : g.neighbors(x)) {
      if (dist[w] < 0) {
        dist[w] = dist[x] + 1;
        queue.push_back(w);
      }
    }
  }
  for (int x : queue) dist[x] = -1;
  return levels;
}

GoodCheck epsilon_good_check(const Graph& g, int v, double d, double eps, int radius) {
  if (!(eps > 0.0) || !(d > 0.0)) throw Error(ErrorKind::kInvalidParameter, "need eps, d > 0");
  GoodCheck out;
  out.levels = level_counts(g, v, radius);
  const double base = (1.0 + eps) * d;
  double scale = 1.0;
  for (auto count : out.levels) {
    out.value += static_cast<double>(count) / scale;
    scale *= base;
  }
  out.threshold = eps * std::log(static_cast<double>(std::max(1, g.num_vertices())));
  out.good = out.value <= out.threshold;
  return out;
}

}  // namespace glauber
