#include <cmath>
#include <numeric>

#include "doctest.h"
#include "glauber/error.hpp"
#include "glauber/models.hpp"
#include "glauber/oracle.hpp"
#include "glauber/oracle_exact.hpp"
#include "glauber/rng.hpp"
#include "graph_zoo.hpp"

using namespace glauber;

namespace {

DiscreteDistribution from_probs(const std::vector<std::vector<std::uint8_t>>& outcomes,
                                const std::vector<double>& probs) {
  DiscreteDistribution d(SiteDomain::kVertices, static_cast<int>(outcomes[0].size()));
  for (std::size_t i = 0; i < outcomes.size(); ++i) d.push_back(outcomes[i], probs[i]);
  return d;
}

// Sum of weight() over all 2^sites configurations.
double brute_z(const Graph& g, const ModelSpec& m) {
  const int s = site_count(g, m);
  double z = 0;
  for (std::uint64_t mask = 0; mask < (1ULL << s); ++mask) {
    Configuration c{m.domain(), std::vector<std::uint8_t>(s)};
    for (int i = 0; i < s; ++i) c.spins[i] = (mask >> i) & 1;
    z += weight(g, m, c);
  }
  return z;
}

}  // namespace

TEST_CASE("exact_distribution examples") {
  auto d = exact_distribution(zoo::cycle(3), ModelSpec::hard_core(1), Pinning::none(3));
  CHECK(d.partition_function() == doctest::Approx(4.0));
  REQUIRE(d.size() == 4);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d.probability(i) == doctest::Approx(0.25));

  d = exact_distribution(zoo::path(2), ModelSpec::hard_core(1), Pinning::none(2));
  CHECK(d.partition_function() == doctest::Approx(3.0));

  d = exact_distribution(zoo::path(2), ModelSpec::monomer_dimer(1), Pinning::none(1));
  CHECK(d.partition_function() == doctest::Approx(2.0));
  CHECK(d.marginal(0) == doctest::Approx(0.5));

  CHECK_THROWS_AS(exact_distribution(Graph(26, {}), ModelSpec::hard_core(1), Pinning::none(26)), Error);
  Pinning bad = Pinning::none(2);
  bad.pin(0, 1).pin(1, 1);
  try {
    exact_distribution(zoo::path(2), ModelSpec::hard_core(1), bad);
    FAIL("expected empty support");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kEmptySupport);
  }
}

TEST_CASE("exact_marginal examples") {
  const double lambda = 1.7;
  CHECK(exact_marginal(Graph(1, {}), ModelSpec::hard_core(lambda), Pinning::none(1), 0) ==
        doctest::Approx(lambda / (1 + lambda)));
  CHECK(exact_marginal(zoo::cycle(4), ModelSpec::hard_core(1), Pinning::none(4), 0) ==
        doctest::Approx(2.0 / 7.0));
  const double beta = 0.3;
  Pinning p = Pinning::none(2);
  p.pin(1, 1);
  CHECK(exact_marginal(zoo::path(2), ModelSpec::ising(beta), p, 0) == doctest::Approx(beta / (1 + beta)));
}

TEST_CASE("tv_distance examples") {
  const auto p = from_probs({{0}, {1}}, {0.5, 0.5});
  CHECK(tv_distance(p, p) == 0.0);
  const auto q = from_probs({{0}}, {1.0});
  CHECK(tv_distance(p, q) == doctest::Approx(0.5));
  const auto a = from_probs({{0, 0}}, {1.0});
  const auto b = from_probs({{1, 1}}, {1.0});
  CHECK(tv_distance(a, b) == doctest::Approx(1.0));
}

TEST_CASE("entropy examples") {
  const auto u = from_probs({{0}, {1}}, {0.5, 0.5});
  CHECK(entropy(u, {3.0, 3.0}) == doctest::Approx(0.0));
  CHECK(entropy(u, {2.0, 0.0}) == doctest::Approx(std::log(2.0)));
  CHECK(entropy(u, {0.0, 0.0}) == 0.0);
  CHECK_THROWS_AS(entropy(u, {-1.0, 1.0}), Error);

  const auto mu = exact_distribution(zoo::path(3), ModelSpec::hard_core(1.3), Pinning::none(3));
  SiteFunctional f(mu.size());
  Rng rng(2);
  for (auto& x : f) x = rng.uniform() * 3;
  std::vector<int> all{0, 1, 2};
  CHECK(conditional_entropy(mu, f, all) == doctest::Approx(entropy(mu, f)).epsilon(1e-12));
  SiteFunctional c(mu.size(), 1.5);
  CHECK(conditional_entropy(mu, c, std::vector<int>{1}) == doctest::Approx(0.0));
}

TEST_CASE("product inequality for entropy") {
  // mu = product of two independent components; Ent <= Ent^{V1} + Ent^{V2}.
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int n1 = 1 + static_cast<int>(rng.below(3)), n2 = 1 + static_cast<int>(rng.below(3));
    const Graph g = zoo::disjoint_union(zoo::random_graph(n1, 0.6, rng), zoo::random_graph(n2, 0.6, rng));
    const ModelSpec m = ModelSpec::hard_core(0.2 + 3 * rng.uniform());
    const auto mu = exact_distribution(g, m, Pinning::none(g.num_vertices()));
    SiteFunctional f(mu.size());
    for (auto& x : f) x = rng.uniform() * 5;
    std::vector<int> v1(n1), v2(n2);
    std::iota(v1.begin(), v1.end(), 0);
    std::iota(v2.begin(), v2.end(), n1);
    CHECK(entropy(mu, f) <= conditional_entropy(mu, f, v1) + conditional_entropy(mu, f, v2) + 1e-10);
  }
}

TEST_CASE("crude factorization bound") {
  CHECK(crude_factorization_bound(1, 0.5) == doctest::Approx(32 * std::log(2.0)));
  CHECK(crude_factorization_bound(1, 1 - 1e-12) < 1e-10);
  CHECK(crude_factorization_bound(2, 0.5) == doctest::Approx(512 * std::log(2.0)));

  // Ent_tau(f) <= C(|S|, b) * sum_v Ent^v_tau(f) on pinned hard-core instances.
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const Graph g = zoo::random_graph(n, 0.5, rng);
    const double lambda = 0.3 + 2 * rng.uniform();
    Pinning p = Pinning::none(n);
    for (int v = 0; v < n; ++v)
      if (rng.bernoulli(0.4)) p.pin(v, 0);
    if (p.free_count() == 0 || p.free_count() > 4) continue;
    const auto mu = exact_distribution(g, ModelSpec::hard_core(lambda), p);
    SiteFunctional f(mu.size());
    for (auto& x : f) x = rng.uniform() * 4;
    double sum = 0;
    for (int v = 0; v < n; ++v)
      if (p.is_free(v)) sum += conditional_entropy(mu, f, std::vector<int>{v});
    const double b = hardcore_marginal_bound(lambda, g.max_degree());
    CHECK(entropy(mu, f) <= crude_factorization_bound(p.free_count(), b) * sum + 1e-12);
  }
}

TEST_CASE("partition function consistency on small graphs") {
  Rng rng(3);
  std::vector<Graph> graphs = zoo::connected_graphs_up_to(5);
  for (int i = 0; i < 12; ++i) graphs.push_back(zoo::random_graph(6 + static_cast<int>(rng.below(3)), 0.35, rng));
  for (const Graph& g : graphs) {
    for (const ModelSpec& m : {ModelSpec::hard_core(1.25), ModelSpec::ising(0.5), ModelSpec::monomer_dimer(0.75)}) {
      const int s = site_count(g, m);
      if (s > 16) continue;
      const auto d = exact_distribution(g, m, Pinning::none(s));
      CHECK(d.partition_function() == doctest::Approx(brute_z(g, m)).epsilon(1e-12));
      double total = 0;
      for (double q : d.probabilities()) {
        CHECK(q > 0);
        total += q;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      // The rational oracle agrees exactly with the sum of exact weights.
      const mpq_class param(m.parameter);
      const mpq_class z = exact_partition_function(g, m.kind, param, Pinning::none(s));
      CHECK(z.get_d() == doctest::Approx(d.partition_function()).epsilon(1e-14));
    }
  }
}

TEST_CASE("rational oracle") {
  // Z(C4, lambda=1) = 7 and Z(triangle, lambda=1/2) = 1 + 3/2.
  CHECK(exact_partition_function(zoo::cycle(4), ModelKind::kHardCore, 1, Pinning::none(4)) == 7);
  CHECK(exact_partition_function(zoo::cycle(3), ModelKind::kHardCore, mpq_class(1, 2), Pinning::none(3)) ==
        mpq_class(5, 2));
  const auto s = exact_summary(zoo::cycle(4), ModelKind::kHardCore, 1, Pinning::none(4));
  CHECK(s.marginals[2] == mpq_class(2, 7));
  CHECK(parse_rational("0.1") == mpq_class(1, 10));
  CHECK(parse_rational("3/4") == mpq_class(3, 4));
  CHECK(parse_rational("2.5e-3") == mpq_class(1, 400));
  CHECK(parse_rational("7") == 7);
  CHECK_THROWS_AS(parse_rational("x1"), Error);
}

TEST_CASE("law of total probability") {
  Rng rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    const Graph g = zoo::random_connected_graph(5 + static_cast<int>(rng.below(3)), 0.45, rng);
    const ModelSpec ms[] = {ModelSpec::hard_core(1.5), ModelSpec::ising(0.4), ModelSpec::monomer_dimer(1.2)};
    const ModelSpec& m = ms[trial % 3];
    const int s = site_count(g, m);
    Pinning p = Pinning::none(s);
    const int u = static_cast<int>(rng.below(s));
    int v = static_cast<int>(rng.below(s));
    if (u == v) v = (v + 1) % s;
    const double direct = exact_marginal(g, m, p, v);
    const double pu = exact_marginal(g, m, p, u);
    double total = 0;
    for (int k = 0; k < 2; ++k) {
      Pinning q = p;
      q.pin(u, k);
      const double w = k ? pu : 1 - pu;
      if (w == 0) continue;
      total += w * exact_marginal(g, m, q, v);
    }
    CHECK(total == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("parallel and serial enumeration agree bit for bit") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Graph g = zoo::random_graph(14, 0.25, rng);
    for (const ModelSpec& m : {ModelSpec::hard_core(0.9), ModelSpec::ising(0.35)}) {
      const auto a = exact_distribution(g, m, Pinning::none(14), Execution::kSerial);
      const auto b = exact_distribution(g, m, Pinning::none(14), Execution::kParallel);
      REQUIRE(a.size() == b.size());
      CHECK(a.probabilities() == b.probabilities());
      CHECK(a.partition_function() == b.partition_function());
      CHECK(exact_marginals(g, m, Pinning::none(14), Execution::kSerial) ==
            exact_marginals(g, m, Pinning::none(14), Execution::kParallel));
    }
  }
}
