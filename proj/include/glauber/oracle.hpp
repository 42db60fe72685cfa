#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "glauber/execution.hpp"
#include "glauber/graph.hpp"
#include "glauber/models.hpp"

namespace glauber {

inline constexpr int kOracleMaxFreeSites = 25;
// Up to this many free sites the oracle works in exact rational arithmetic
// and rounds once at the end.
inline constexpr int kOracleExactFreeSites = 20;

// Finite distribution over configurations. Outcomes are stored as packed
// bit rows (one bit per site) so that large supports stay compact.
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;
  DiscreteDistribution(SiteDomain domain, int num_sites);

  SiteDomain domain() const { return domain_; }
  int num_sites() const { return num_sites_; }
  std::size_t size() const { return probs_.size(); }
  int words_per_outcome() const { return words_; }

  Configuration outcome(std::size_t i) const;
  std::uint8_t spin(std::size_t i, int site) const {
    return static_cast<std::uint8_t>((bits_[i * words_ + site / 64] >> (site % 64)) & 1U);
  }
  std::span<const std::uint64_t> key(std::size_t i) const {
    return {bits_.data() + i * words_, static_cast<std::size_t>(words_)};
  }
  double probability(std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probabilities() const { return probs_; }

  // Sum of the weights of the configurations in the support. Empirical
  // distributions report 1.
  double partition_function() const { return z_; }
  double log_partition_function() const { return log_z_; }
  void set_partition_function(double z, double log_z) {
    z_ = z;
    log_z_ = log_z;
  }

  void push_back(std::span<const std::uint8_t> spins, double p);
  void push_back_key(std::span<const std::uint64_t> key, double p);
  void reserve(std::size_t count);

  // P(site = 1).
  double marginal(int site) const;
  // Probability of one configuration, 0 when outside the support.
  double probability_of(std::span<const std::uint8_t> spins) const;

 private:
  SiteDomain domain_ = SiteDomain::kVertices;
  int num_sites_ = 0;
  int words_ = 1;
  std::vector<std::uint64_t> bits_;
  std::vector<double> probs_;
  double z_ = 1.0;
  double log_z_ = 0.0;
};

std::vector<std::uint64_t> pack_spins(std::span<const std::uint8_t> spins);

// Order-independent tally of sampled configurations.
class ConfigurationCounter {
 public:
  ConfigurationCounter(SiteDomain domain, int num_sites) : domain_(domain), num_sites_(num_sites) {}

  void add(std::span<const std::uint8_t> spins);
  void merge(const ConfigurationCounter& other);
  std::int64_t total() const { return total_; }
  const std::map<std::vector<std::uint64_t>, std::int64_t>& counts() const { return counts_; }

  DiscreteDistribution to_distribution() const;

 private:
  SiteDomain domain_;
  int num_sites_;
  std::int64_t total_ = 0;
  std::map<std::vector<std::uint64_t>, std::int64_t> counts_;
};

// Values of f on the support, parallel to the distribution's outcomes.
using SiteFunctional = std::vector<double>;

// Conditional distribution given the pinning, by enumerating the free
// sites. Throws kEnumerationOverflow beyond kOracleMaxFreeSites free sites
// and kEmptySupport when no positive-weight configuration is consistent.
DiscreteDistribution exact_distribution(const Graph& g, const ModelSpec& m, const Pinning& p,
                                        Execution exec = Execution::kParallel);

double exact_marginal(const Graph& g, const ModelSpec& m, const Pinning& p, int site,
                      Execution exec = Execution::kParallel);

// All site marginals P(site = 1 | pinning); pinned sites report their pin.
std::vector<double> exact_marginals(const Graph& g, const ModelSpec& m, const Pinning& p,
                                    Execution exec = Execution::kParallel);

double tv_distance(const DiscreteDistribution& p, const DiscreteDistribution& q);

// Ent(f) = E[f log f] - E[f] log E[f], natural log.
double entropy(const DiscreteDistribution& mu, const SiteFunctional& f);

// E over the spins outside S of the entropy of f under the conditional law.
double conditional_entropy(const DiscreteDistribution& mu, const SiteFunctional& f,
                           std::span<const int> s);

double crude_factorization_bound(int s, double b);

}  // namespace glauber
