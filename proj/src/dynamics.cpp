#include "glauber/dynamics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>

#include "glauber/error.hpp"

namespace glauber {

namespace {

// Total nodes kept in the per-site component cache of a Sampler.
constexpr std::int64_t kComponentCacheNodes = std::int64_t{1} << 22;
// Total memoised update probabilities of a Sampler.
constexpr std::int64_t kMemoEntries = std::int64_t{1} << 22;

// Ceiling that ignores last-ulp noise, so that e.g. 1.0000000000000002
// coming out of a log/exp round trip still counts as 1.
std::int64_t careful_ceil(double x) {
  const double nearest = std::round(x);
  if (std::fabs(x - nearest) <= 1e-9 * std::max(1.0, std::fabs(x))) {
    return static_cast<std::int64_t>(nearest);
  }
  return static_cast<std::int64_t>(std::ceil(x));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double default_degree_threshold(double d) { return 20.0 * std::max(1.0, d); }

std::vector<int> update_site_set(const Graph& g, const ModelSpec& m, double D) {
  if (!(D >= 0.0)) throw Error(ErrorKind::kInvalidParameter, "D must be >= 0");
  std::vector<int> out;
  if (m.domain() == SiteDomain::kVertices) {
    for (int v = 0; v < g.num_vertices(); ++v)
      if (g.degree(v) <= D) out.push_back(v);
  } else {
    for (int e = 0; e < g.num_edges(); ++e) {
      const auto [a, b] = g.edge(e);
      if (g.degree(a) <= D && g.degree(b) <= D) out.push_back(e);
    }
  }
  if (out.empty()) throw Error(ErrorKind::kDegenerateInstance, "no site has degree <= D");
  return out;
}

std::int64_t mixing_T(std::int64_t n, double theta, double eps) {
  if (n < 1 || !(theta > 0.0) || !(eps > 0.0 && eps <= 1.0)) {
    throw Error(ErrorKind::kInvalidParameter, "need n >= 1, theta > 0, eps in (0,1]");
  }
  const double x = std::pow(static_cast<double>(n), 1.0 + theta / 2.0) * std::log(1.0 / eps);
  return std::max<std::int64_t>(1, careful_ceil(x));
}

Schedule make_schedule(std::int64_t n, double theta, double eps,
                       std::optional<std::int64_t> steps_override) {
  Schedule s;
  s.theta = theta;
  s.eps = eps;
  if (steps_override) {
    s.overridden = true;
    s.steps = *steps_override;
    if (s.steps < 1) {
      s.steps = 1;
      s.clamped = true;
    }
    return s;
  }
  const double raw = std::pow(static_cast<double>(std::max<std::int64_t>(n, 1)), 1.0 + theta / 2.0) *
                     std::log(1.0 / eps);
  s.steps = mixing_T(std::max<std::int64_t>(n, 1), theta, eps);
  s.clamped = raw < 1.0 - 1e-9;
  return s;
}

// ---------------------------------------------------------------------------
// Sampler

Sampler::Sampler(const Graph& g, const ModelSpec& m, double D, int k_max)
    : g_(g),
      m_(m),
      partition_(degree_partition(g, D)),
      is_update_(site_count(g, m), 0),
      builder_(g, m.domain()),
      solver_(m, k_max) {
  if (m.domain() == SiteDomain::kVertices) {
    sites_ = partition_.low;
  } else {
    for (int e = 0; e < g.num_edges(); ++e) {
      const auto [a, b] = g.edge(e);
      if (partition_.contains_low(a) && partition_.contains_low(b)) sites_.push_back(e);
    }
  }
  for (int s : sites_) is_update_[s] = 1;
  cache_index_.assign(is_update_.size(), -1);
  block_perm_.resize(sites_.size());
  for (std::size_t i = 0; i < sites_.size(); ++i) block_perm_[i] = static_cast<int>(i);
}

ChainState Sampler::initial_state(std::uint64_t seed) const {
  ChainState s;
  s.spins.assign(is_update_.size(), Pinning::kFree);
  for (int site : sites_) s.spins[site] = 0;
  s.rng.reseed(seed);
  return s;
}

double Sampler::update_probability(ChainState& state, int site) {
  if (site < 0 || site >= static_cast<int>(is_update_.size()) || !is_update_[site]) {
    throw Error(ErrorKind::kInvalidParameter, "not an update site");
  }
  const std::int8_t old = state.spins[site];
  const double lambda = m_.parameter;
  // Fast path: every neighboring site is tracked by the chain, so the
  // component is the site alone.
  if (m_.domain() == SiteDomain::kVertices) {
    int ones = 0, zeros = 0;
    bool isolated = true;
    for (int w : g_.neighbors(site)) {
      if (!is_update_[w]) {
        isolated = false;
        break;
      }
      (state.spins[w] == 1 ? ones : zeros) += 1;
    }
    if (isolated) {
      if (m_.kind == ModelKind::kHardCore) return ones > 0 ? 0.0 : lambda / (1.0 + lambda);
      const double w1 = std::pow(lambda, ones), w0 = std::pow(lambda, zeros);
      return w1 / (w0 + w1);
    }
  } else {
    const auto [a, b] = g_.edge(site);
    bool isolated = true, covered = false;
    for (int end : {a, b}) {
      for (int f : g_.incident_edges(end)) {
        if (f == site) continue;
        if (!is_update_[f]) isolated = false;
        if (state.spins[f] == 1) covered = true;
      }
    }
    if (isolated) return covered ? 0.0 : lambda / (1.0 + lambda);
  }
  state.spins[site] = Pinning::kFree;
  double p = 0.0;
  try {
    const int slot = cache_index_[site];
    if (slot >= 0) {
      LocalComponent& comp = cache_[slot];
      const bool keyed = comp.boundary.size() <= 64;
      std::uint64_t key = 0;
      if (keyed) {
        for (std::size_t i = 0; i < comp.boundary.size(); ++i)
          key |= static_cast<std::uint64_t>(state.spins[comp.boundary[i].second] == 1) << i;
        const auto it = memo_[slot].find(key);
        if (it != memo_[slot].end()) {
          state.spins[site] = old;
          return it->second;
        }
      }
      comp.refresh_boundary(state.spins);
      p = solver_.marginal(comp, comp.local_site(site));
      if (keyed && memo_entries_ < kMemoEntries) {
        memo_[slot].emplace(key, p);
        ++memo_entries_;
      }
    } else {
      builder_.build(state.spins, site, comp_);
      if (cached_nodes_ + comp_.size() <= kComponentCacheNodes) {
        cached_nodes_ += comp_.size();
        cache_index_[site] = static_cast<int>(cache_.size());
        cache_.push_back(comp_);
        memo_.emplace_back();
      }
      p = solver_.marginal(comp_, comp_.local_site(site));
    }
  } catch (...) {
    state.spins[site] = old;
    throw;
  }
  state.spins[site] = old;
  return p;
}

void Sampler::glauber_step(ChainState& state) {
  if (sites_.empty()) return;
  const int site = sites_[state.rng.below(sites_.size())];
  const double p = update_probability(state, site);
  state.spins[site] = state.rng.uniform() < p ? 1 : 0;
  ++state.step;
}

void Sampler::sample_components(ChainState& state, const std::vector<int>& seeds,
                                std::vector<int>* touched) {
  for (int s : seeds) {
    if (state.spins[s] != Pinning::kFree) continue;
    builder_.build(state.spins, s, comp_);
    solver_.sample(comp_, state.rng, spins_scratch_);
    // Distinct free components never share a boundary with each other, so
    // writing one before building the next does not change the next law.
    for (std::size_t i = 0; i < comp_.sites.size(); ++i) {
      state.spins[comp_.sites[i]] = static_cast<std::int8_t>(spins_scratch_[i]);
    }
    if (touched) touched->insert(touched->end(), comp_.sites.begin(), comp_.sites.end());
  }
}

void Sampler::r_block_step(ChainState& state, int r) {
  const int total = static_cast<int>(sites_.size());
  if (r < 1 || r > total) throw Error(ErrorKind::kInvalidParameter, "block size must lie in [1, |sites|]");
  // Partial Fisher-Yates: the first r entries form a uniform r-subset.
  std::vector<int> block(r);
  for (int i = 0; i < r; ++i) {
    const int j = i + static_cast<int>(state.rng.below(total - i));
    std::swap(block_perm_[i], block_perm_[j]);
    block[i] = sites_[block_perm_[i]];
  }
  std::sort(block.begin(), block.end());
  std::vector<std::int8_t> saved(r);
  for (int i = 0; i < r; ++i) {
    saved[i] = state.spins[block[i]];
    state.spins[block[i]] = Pinning::kFree;
  }
  std::vector<int> touched;
  try {
    sample_components(state, block, &touched);
  } catch (...) {
    for (int s : touched)
      if (!is_update_[s]) state.spins[s] = Pinning::kFree;
    for (int i = 0; i < r; ++i) state.spins[block[i]] = saved[i];
    throw;
  }
  for (int s : touched)
    if (!is_update_[s]) state.spins[s] = Pinning::kFree;
  ++state.step;
}

Configuration Sampler::finalize(ChainState& state) {
  std::vector<int> rest;
  for (int s = 0; s < static_cast<int>(is_update_.size()); ++s)
    if (!is_update_[s]) rest.push_back(s);
  sample_components(state, rest, nullptr);
  Configuration c{m_.domain(), std::vector<std::uint8_t>(state.spins.size())};
  for (std::size_t s = 0; s < state.spins.size(); ++s) c.spins[s] = static_cast<std::uint8_t>(state.spins[s]);
  return c;
}

Configuration Sampler::sample(std::int64_t steps, std::uint64_t seed, SampleTimings* timings) {
  ChainState state = initial_state(seed);
  const auto t0 = std::chrono::steady_clock::now();
  if (!sites_.empty()) {
    for (std::int64_t t = 0; t < steps; ++t) glauber_step(state);
  }
  const double main_loop = seconds_since(t0);
  const auto t1 = std::chrono::steady_clock::now();
  Configuration out = finalize(state);
  if (timings) {
    timings->main_loop_seconds = main_loop;
    timings->finalize_seconds = seconds_since(t1);
  }
  return out;
}

Configuration sample(const Graph& g, const ModelSpec& m, double D, const Schedule& sched,
                     std::uint64_t seed, SampleTimings* timings) {
  Sampler s(g, m, D);
  return s.sample(sched.steps, seed, timings);
}

Configuration perfect_sample_sparse(const Graph& g, const ModelSpec& m, std::uint64_t seed, int k_max) {
  ComponentBuilder builder(g, m.domain());
  ComponentSolver solver(m, k_max);
  LocalComponent comp;
  std::vector<std::int8_t> pins(site_count(g, m), Pinning::kFree);
  std::vector<std::uint8_t> spins;
  Rng rng(seed);
  for (int s = 0; s < static_cast<int>(pins.size()); ++s) {
    if (pins[s] != Pinning::kFree) continue;
    builder.build(pins, s, comp);
    solver.sample(comp, rng, spins);
    for (std::size_t i = 0; i < comp.sites.size(); ++i) pins[comp.sites[i]] = static_cast<std::int8_t>(spins[i]);
  }
  Configuration c{m.domain(), std::vector<std::uint8_t>(pins.begin(), pins.end())};
  return c;
}

std::vector<Configuration> sample_runs(const Graph& g, const ModelSpec& m, double D, std::int64_t steps,
                                       std::uint64_t seed, std::int64_t runs, Execution exec) {
  if (runs < 0) throw Error(ErrorKind::kInvalidParameter, "runs must be >= 0");
  std::vector<Configuration> out(runs);
  if (exec == Execution::kSerial) {
    Sampler s(g, m, D);
    for (std::int64_t i = 0; i < runs; ++i) out[i] = s.sample(steps, seed + i);
    return out;
  }
  std::exception_ptr failure;
#pragma omp parallel
  {
    try {
      Sampler s(g, m, D);
#pragma omp for schedule(dynamic, 16)
      for (std::int64_t i = 0; i < runs; ++i) {
        try {
          out[i] = s.sample(steps, seed + i);
        } catch (...) {
#pragma omp critical
          if (!failure) failure = std::current_exception();
        }
      }
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

ConfigurationCounter sample_histogram(const Graph& g, const ModelSpec& m, double D, std::int64_t steps,
                                      std::uint64_t seed, std::int64_t runs, Execution exec) {
  if (runs < 0) throw Error(ErrorKind::kInvalidParameter, "runs must be >= 0");
  const int sites = site_count(g, m);
  ConfigurationCounter total(m.domain(), sites);
  if (exec == Execution::kSerial) {
    Sampler s(g, m, D);
    for (std::int64_t i = 0; i < runs; ++i) total.add(s.sample(steps, seed + i).spins);
    return total;
  }
  std::exception_ptr failure;
#pragma omp parallel
  {
    ConfigurationCounter local(m.domain(), sites);
    try {
      Sampler s(g, m, D);
#pragma omp for schedule(dynamic, 64)
      for (std::int64_t i = 0; i < runs; ++i) {
        try {
          local.add(s.sample(steps, seed + i).spins);
        } catch (...) {
#pragma omp critical
          if (!failure) failure = std::current_exception();
        }
      }
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
#pragma omp critical
    total.merge(local);
  }
  if (failure) std::rethrow_exception(failure);
  return total;
}

// ---------------------------------------------------------------------------
// Formulas

FactorizationBound cr_bound(int n, int r, double eta, double b) {
  if (n < 1 || r < 1 || r > n || !(eta >= 0.0) || !(b > 0.0 && b < 1.0)) {
    throw Error(ErrorKind::kInvalidParameter, "need 1 <= r <= n, eta >= 0, b in (0,1)");
  }
  FactorizationBound f;
  f.n = n;
  f.r = r;
  f.eta = eta;
  f.b = b;
  f.alpha.resize(n > 1 ? n - 1 : 0);
  for (int k = 0; k + 1 < n; ++k) {
    f.alpha[k] = std::max(0.0, 1.0 - 4.0 * eta / (b * b * (n - 1 - k)));
  }
  f.gamma.resize(n);
  f.gamma[0] = 1.0;
  for (int k = 1; k < n; ++k) f.gamma[k] = f.gamma[k - 1] * f.alpha[k - 1];
  double all = 0.0, tail = 0.0;
  for (int k = 0; k < n; ++k) all += f.gamma[k];
  for (int k = n - r; k < n; ++k) tail += f.gamma[k];
  if (tail <= 0.0) {
    f.multiplier = ExtendedReal::infinity();
  } else {
    f.multiplier = ExtendedReal::finite((static_cast<double>(r) * all) / (static_cast<double>(n) * tail));
  }
  return f;
}

std::int64_t tmix_bound(double c_r, int n, int r, double mu_min, double eps) {
  if (!(c_r >= 0.0) || n < 1 || r < 1 || r > n || !(mu_min > 0.0 && mu_min < 1.0) ||
      !(eps > 0.0 && eps < 1.0)) {
    throw Error(ErrorKind::kInvalidParameter, "bad tmix_bound arguments");
  }
  const double x = c_r * (static_cast<double>(n) / r) *
                   (std::log(std::log(1.0 / mu_min)) + std::log(1.0 / (2.0 * eps * eps)));
  return std::max<std::int64_t>(1, careful_ceil(x));
}

}  // namespace glauber
