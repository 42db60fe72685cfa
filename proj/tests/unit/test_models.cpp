#include <cmath>

#include "doctest.h"
#include "glauber/error.hpp"
#include "glauber/models.hpp"
#include "glauber/rng.hpp"
#include "graph_zoo.hpp"

using namespace glauber;

namespace {

Configuration vertices(std::vector<std::uint8_t> s) { return {SiteDomain::kVertices, std::move(s)}; }
Configuration edges(std::vector<std::uint8_t> s) { return {SiteDomain::kEdges, std::move(s)}; }

}  // namespace

TEST_CASE("model spec parsing and validation") {
  CHECK(parse_model_kind("hardcore") == ModelKind::kHardCore);
  CHECK(parse_model_kind("ising") == ModelKind::kIsing);
  CHECK(parse_model_kind("matchings") == ModelKind::kMonomerDimer);
  CHECK_THROWS_AS(parse_model_kind("potts"), Error);
  CHECK_THROWS_AS(ModelSpec::hard_core(0.0), Error);
  CHECK_THROWS_AS(ModelSpec::ising(-1.0), Error);
  CHECK_THROWS_AS(ModelSpec::monomer_dimer(NAN), Error);
  CHECK(ModelSpec::ising(0.5).antiferromagnetic());
  CHECK_FALSE(ModelSpec::ising(1.5).antiferromagnetic());
}

TEST_CASE("lambda_c") {
  CHECK(lambda_c(2).value == doctest::Approx(4.0).epsilon(1e-14));
  CHECK_FALSE(lambda_c(2).infinite);
  CHECK(lambda_c(0.5).infinite);
  CHECK(lambda_c(1.0).infinite);
  CHECK(lambda_c(5).value == doctest::Approx(3125.0 / 4096.0).epsilon(1e-14));
  CHECK_THROWS_AS(lambda_c(0), Error);
  CHECK_THROWS_AS(lambda_c(-2), Error);

  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    double d1 = 1 + 1e-3 + rng.uniform() * 20, d2 = 1 + 1e-3 + rng.uniform() * 20;
    if (d1 > d2) std::swap(d1, d2);
    if (d1 == d2) continue;
    CHECK(lambda_c(d2) < lambda_c(d1));
  }
}

TEST_CASE("beta_c") {
  CHECK(beta_c(2) == doctest::Approx(1.0 / 3.0));
  CHECK(beta_c(0.5) == 0.0);
  CHECK(beta_c(1) == 0.0);
  CHECK_THROWS_AS(beta_c(0), Error);
}

TEST_CASE("weight") {
  const Graph e = zoo::path(2);
  CHECK(weight(e, ModelSpec::hard_core(2), vertices({1, 1})) == 0.0);
  CHECK(weight(e, ModelSpec::hard_core(2), vertices({1, 0})) == 2.0);
  CHECK(weight(e, ModelSpec::ising(0.5), vertices({1, 1})) == 0.5);
  CHECK(weight(e, ModelSpec::ising(0.5), vertices({0, 1})) == 1.0);
  const Graph p3 = zoo::path(3);
  CHECK(weight(p3, ModelSpec::monomer_dimer(3), edges({1, 1})) == 0.0);
  CHECK(weight(p3, ModelSpec::monomer_dimer(3), edges({0, 1})) == 3.0);
  CHECK_THROWS_AS(weight(p3, ModelSpec::monomer_dimer(3), vertices({0, 1, 0})), Error);
  CHECK_THROWS_AS(weight(p3, ModelSpec::hard_core(3), vertices({0, 1})), Error);
  CHECK(std::isinf(log_weight(e, ModelSpec::hard_core(2), vertices({1, 1}))));

  // Large instances go through log space without overflowing.
  const Graph big(2000, {});
  std::vector<std::uint8_t> all(2000, 1);
  CHECK(log_weight(big, ModelSpec::hard_core(2), vertices(all)) == doctest::Approx(2000 * std::log(2.0)));
  CHECK(std::isinf(weight(big, ModelSpec::hard_core(2), vertices(all))));

  // Multiplicative over disjoint unions.
  Rng rng(4);
  const ModelSpec specs[] = {ModelSpec::hard_core(1.7), ModelSpec::ising(0.3), ModelSpec::monomer_dimer(2.2)};
  for (int trial = 0; trial < 60; ++trial) {
    const Graph a = zoo::random_graph(1 + static_cast<int>(rng.below(6)), 0.5, rng);
    const Graph b = zoo::random_graph(1 + static_cast<int>(rng.below(6)), 0.5, rng);
    const Graph u = zoo::disjoint_union(a, b);
    for (const auto& m : specs) {
      const bool on_edges = m.domain() == SiteDomain::kEdges;
      const int na = on_edges ? a.num_edges() : a.num_vertices();
      const int nb = on_edges ? b.num_edges() : b.num_vertices();
      std::vector<std::uint8_t> sa(na), sb(nb);
      for (auto& s : sa) s = static_cast<std::uint8_t>(rng.below(2));
      for (auto& s : sb) s = static_cast<std::uint8_t>(rng.below(2));
      std::vector<std::uint8_t> su = sa;
      su.insert(su.end(), sb.begin(), sb.end());
      const SiteDomain dom = m.domain();
      const double wu = weight(u, m, {dom, su});
      const double wab = weight(a, m, {dom, sa}) * weight(b, m, {dom, sb});
      CHECK(wu == doctest::Approx(wab).epsilon(1e-12));
    }
  }
}

TEST_CASE("marginal bounds") {
  CHECK(hardcore_marginal_bound(1, 2) == doctest::Approx(0.2));
  CHECK(hardcore_marginal_bound(1, 0) == doctest::Approx(0.5));
  CHECK(hardcore_marginal_bound(2, 1) == doctest::Approx(0.4));
  CHECK(ising_marginal_bound(0.5, 2) == doctest::Approx(0.2));
  CHECK(ising_marginal_bound(0.3, 0) == doctest::Approx(0.5));
  CHECK(ising_marginal_bound(0.5, 1) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(ising_marginal_bound(1.5, 1), Error);
  for (double lambda : {0.1, 1.0, 3.0}) {
    double prev = lambda / (1 + lambda);
    for (int D = 0; D <= 10; ++D) {
      const double b = hardcore_marginal_bound(lambda, D);
      CHECK(b > 0);
      CHECK(b <= prev + 1e-15);
      prev = b;
    }
  }
}
