#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glauber/graph.hpp"

namespace glauber {

enum class ModelKind { kHardCore, kIsing, kMonomerDimer };

// Vertex models put spins on vertices; monomer-dimer puts them on edges.
enum class SiteDomain { kVertices, kEdges };

const char* to_string(ModelKind kind) noexcept;
// Accepts "hardcore", "ising", "matchings" (and "monomer-dimer").
ModelKind parse_model_kind(const std::string& name);

struct ModelSpec {
  ModelKind kind = ModelKind::kHardCore;
  double parameter = 1.0;  // lambda, beta or gamma

  // Throws Error(kInvalidParameter) unless parameter > 0.
  ModelSpec(ModelKind k, double p);

  static ModelSpec hard_core(double lambda) { return {ModelKind::kHardCore, lambda}; }
  static ModelSpec ising(double beta) { return {ModelKind::kIsing, beta}; }
  static ModelSpec monomer_dimer(double gamma) { return {ModelKind::kMonomerDimer, gamma}; }

  SiteDomain domain() const {
    return kind == ModelKind::kMonomerDimer ? SiteDomain::kEdges : SiteDomain::kVertices;
  }
  bool antiferromagnetic() const { return kind == ModelKind::kIsing && parameter < 1.0; }
};

inline int site_count(const Graph& g, SiteDomain domain) {
  return domain == SiteDomain::kEdges ? g.num_edges() : g.num_vertices();
}
inline int site_count(const Graph& g, const ModelSpec& m) { return site_count(g, m.domain()); }

// A real number or +infinity, kept as an explicit tag.
struct ExtendedReal {
  bool infinite = false;
  double value = 0.0;

  static ExtendedReal finite(double v) { return {false, v}; }
  static ExtendedReal infinity() { return {true, 0.0}; }

  double to_double() const;
  friend bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite) return false;
    if (b.infinite) return true;
    return a.value < b.value;
  }
};

struct Configuration {
  SiteDomain domain = SiteDomain::kVertices;
  std::vector<std::uint8_t> spins;

  friend bool operator==(const Configuration&, const Configuration&) = default;
  friend auto operator<=>(const Configuration&, const Configuration&) = default;
};

// Fixed spins on a subset of the sites; kFree marks unpinned sites.
struct Pinning {
  static constexpr std::int8_t kFree = -1;

  std::vector<std::int8_t> spins;

  static Pinning none(int sites) { return Pinning{std::vector<std::int8_t>(sites, kFree)}; }
  static Pinning none(const Graph& g, const ModelSpec& m) { return none(site_count(g, m)); }

  int size() const { return static_cast<int>(spins.size()); }
  bool is_free(int site) const { return spins[site] == kFree; }
  Pinning& pin(int site, int spin);
  int free_count() const;
  // Throws Error(kInvalidParameter) on a size mismatch or a value outside {-1, 0, 1}.
  void validate(int sites) const;
};

// Uniqueness threshold d^d / (d-1)^(d+1); +infinity for d <= 1.
ExtendedReal lambda_c(double d);
// (d-1)/(d+1) for d >= 1, zero below.
double beta_c(double d);

double weight(const Graph& g, const ModelSpec& m, const Configuration& c);
// Natural log of weight(); -infinity for forbidden configurations.
double log_weight(const Graph& g, const ModelSpec& m, const Configuration& c);

// Whether the configuration respects the hard constraints of the model.
bool is_feasible(const Graph& g, const ModelSpec& m, std::span<const std::uint8_t> spins);

double hardcore_marginal_bound(double lambda, double max_degree);
double ising_marginal_bound(double beta, double max_degree);

}  // namespace glauber
