#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "glauber/component_dp.hpp"
#include "glauber/execution.hpp"
#include "glauber/graph.hpp"
#include "glauber/models.hpp"
#include "glauber/oracle.hpp"
#include "glauber/rng.hpp"

namespace glauber {

// 20 * max(1, d).
double default_degree_threshold(double d);

// Sites updated by the chain: low-degree vertices for vertex models, edges
// with both endpoints of low degree for matchings. Throws
// kDegenerateInstance when empty.
std::vector<int> update_site_set(const Graph& g, const ModelSpec& m, double D);

struct Schedule {
  double theta = 1.0;
  double eps = 0.01;
  std::int64_t steps = 1;
  bool overridden = false;  // steps given by the caller instead of derived
  bool clamped = false;     // a requested or derived value below 1 was raised to 1
};

// ceil(n^(1 + theta/2) * log(1/eps)), at least 1.
std::int64_t mixing_T(std::int64_t n, double theta, double eps);
Schedule make_schedule(std::int64_t n, double theta, double eps,
                       std::optional<std::int64_t> steps_override = std::nullopt);

// Chain state over all sites: update sites hold 0/1, every other site is
// Pinning::kFree (it is summed out, not tracked).
struct ChainState {
  std::vector<std::int8_t> spins;
  std::int64_t step = 0;
  Rng rng;
};

struct SampleTimings {
  double main_loop_seconds = 0.0;
  double finalize_seconds = 0.0;
};

// Owns the degree partition, the update-site list and the DP workspaces
// for one graph and model. Not thread-safe; use one Sampler per thread.
class Sampler {
 public:
  Sampler(const Graph& g, const ModelSpec& m, double D, int k_max = kDefaultMaxExcess);

  const Graph& graph() const { return g_; }
  const ModelSpec& model() const { return m_; }
  const VertexPartition& partition() const { return partition_; }
  const std::vector<int>& update_sites() const { return sites_; }
  bool is_update_site(int s) const { return is_update_[s] != 0; }

  // X_0: all update sites 0.
  ChainState initial_state(std::uint64_t seed) const;

  // Conditional probability that `site` takes spin 1 given the spins of the
  // other update sites, with all non-update sites summed out.
  double update_probability(ChainState& state, int site);

  // One heat-bath step at a uniformly random update site.
  void glauber_step(ChainState& state);
  // Resamples a uniformly random r-subset of the update sites exactly from
  // its conditional law.
  void r_block_step(ChainState& state, int r);

  // Samples every non-update site from its conditional law given the
  // update sites, component by component.
  Configuration finalize(ChainState& state);

  // Initialisation, `steps` main-loop steps, finalisation.
  Configuration sample(std::int64_t steps, std::uint64_t seed, SampleTimings* timings = nullptr);

 private:
  // Resamples every free component touching one of `seeds` and writes the
  // sampled spins into state.spins. Returns the sampled sites.
  void sample_components(ChainState& state, const std::vector<int>& seeds, std::vector<int>* touched);

  const Graph& g_;
  ModelSpec m_;
  VertexPartition partition_;
  std::vector<int> sites_;
  std::vector<std::uint8_t> is_update_;
  std::vector<int> block_perm_;
  // Free component of each update site with every other update site
  // pinned. Its shape does not depend on the chain state, so it is built
  // once and only its boundary counts are refreshed per step.
  std::vector<int> cache_index_;
  std::vector<LocalComponent> cache_;
  std::int64_t cached_nodes_ = 0;
  // P(site = 1) per cached component keyed by the boundary spins, which
  // are all update sites and hence 0/1.
  std::vector<std::unordered_map<std::uint64_t, double>> memo_;
  std::int64_t memo_entries_ = 0;
  ComponentBuilder builder_;
  ComponentSolver solver_;
  LocalComponent comp_;
  std::vector<std::uint8_t> spins_scratch_;
};

Configuration sample(const Graph& g, const ModelSpec& m, double D, const Schedule& sched,
                     std::uint64_t seed, SampleTimings* timings = nullptr);

// Exact sampler for graphs whose components are all within the DP cap.
Configuration perfect_sample_sparse(const Graph& g, const ModelSpec& m, std::uint64_t seed,
                                    int k_max = kDefaultMaxExcess);

// `runs` independent samples with seeds seed, seed+1, ... returned in run
// order. The parallel path splits runs across threads, one Sampler each.
std::vector<Configuration> sample_runs(const Graph& g, const ModelSpec& m, double D,
                                       std::int64_t steps, std::uint64_t seed, std::int64_t runs,
                                       Execution exec = Execution::kParallel);

// Same runs tallied into a histogram; counts are order-independent.
ConfigurationCounter sample_histogram(const Graph& g, const ModelSpec& m, double D,
                                      std::int64_t steps, std::uint64_t seed, std::int64_t runs,
                                      Execution exec = Execution::kParallel);

struct FactorizationBound {
  int n = 0;
  int r = 0;
  double eta = 0.0;
  double b = 0.0;
  std::vector<double> alpha;  // k = 0 .. n-2
  std::vector<double> gamma;  // k = 0 .. n-1
  ExtendedReal multiplier;    // C_r; infinite when the tail window sums to 0
};

FactorizationBound cr_bound(int n, int r, double eta, double b);

// ceil(C_r (n/r) (log log(1/mu_min) + log(1/(2 eps^2)))), at least 1.
std::int64_t tmix_bound(double c_r, int n, int r, double mu_min, double eps);

}  // namespace glauber
