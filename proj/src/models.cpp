#include "glauber/models.hpp"

#include <cmath>
#include <limits>

#include "glauber/error.hpp"

namespace glauber {

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::kHardCore: return "hardcore";
    case ModelKind::kIsing: return "ising";
    case ModelKind::kMonomerDimer: return "matchings";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "hardcore" || name == "hard-core") return ModelKind::kHardCore;
  if (name == "ising") return ModelKind::kIsing;
  if (name == "matchings" || name == "monomer-dimer") return ModelKind::kMonomerDimer;
  throw Error(ErrorKind::kInvalidParameter, "unknown model '" + name + "'");
}

ModelSpec::ModelSpec(ModelKind k, double p) : kind(k), parameter(p) {
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::kInvalidParameter, "model parameter must be a positive finite real");
  }
}

double ExtendedReal::to_double() const {
  return infinite ? std::numeric_limits<double>::infinity() : value;
}

Pinning& Pinning::pin(int site, int spin) {
  if (site < 0 || site >= size()) throw Error(ErrorKind::kInvalidParameter, "pinned site out of range");
  if (spin != 0 && spin != 1 && spin != kFree) {
    throw Error(ErrorKind::kInvalidParameter, "pinned spin must be 0 or 1");
  }
  spins[site] = static_cast<std::int8_t>(spin);
  return *this;
}

int Pinning::free_count() const {
  int count = 0;
  for (auto s : spins) count += s == kFree;
  return count;
}

void Pinning::validate(int sites) const {
  if (size() != sites) {
    throw Error(ErrorKind::kInvalidParameter, "pinning covers " + std::to_string(size()) +
                                                  " sites, expected " + std::to_string(sites));
  }
  for (auto s : spins) {
    if (s != kFree && s != 0 && s != 1) throw Error(ErrorKind::kInvalidParameter, "bad pinned value");
  }
}

ExtendedReal lambda_c(double d) {
  if (!(d > 0.0)) throw Error(ErrorKind::kInvalidParameter, "d must be > 0");
  if (d <= 1.0) return ExtendedReal::infinity();
  return ExtendedReal::finite(std::exp(d * std::log(d) - (d + 1.0) * std::log(d - 1.0)));
}

double beta_c(double d) {
  if (!(d > 0.0)) throw Error(ErrorKind::kInvalidParameter, "d must be > 0");
  if (d < 1.0) return 0.0;
  return (d - 1.0) / (d + 1.0);
}

namespace {

void check_domain(const Graph& g, const ModelSpec& m, const Configuration& c) {
  if (c.domain != m.domain()) {
    throw Error(ErrorKind::kInvalidParameter, "configuration domain does not match the model");
  }
  if (static_cast<int>(c.spins.size()) != site_count(g, m)) {
    throw Error(ErrorKind::kInvalidParameter, "configuration length does not match the graph");
  }
}

// Exponent of the model parameter, or -1 for a forbidden configuration.
long long exponent(const Graph& g, const ModelSpec& m, std::span<const std::uint8_t> s) {
  long long count = 0;
  switch (m.kind) {
    case ModelKind::kHardCore:
      for (const auto& [u, v] : g.edges())
        if (s[u] && s[v]) return -1;
      for (auto x : s) count += x != 0;
      return count;
    case ModelKind::kIsing:
      for (const auto& [u, v] : g.edges()) count += (s[u] != 0) == (s[v] != 0);
      return count;
    case ModelKind::kMonomerDimer:
      for (int v = 0; v < g.num_vertices(); ++v) {
        int used = 0;
        for (int e : g.incident_edges(v)) used += s[e] != 0;
        if (used > 1) return -1;
      }
      for (auto x : s) count += x != 0;
      return count;
  }
  return -1;
}

}  // namespace

bool is_feasible(const Graph& g, const ModelSpec& m, std::span<const std::uint8_t> spins) {
  if (static_cast<int>(spins.size()) != site_count(g, m)) {
    throw Error(ErrorKind::kInvalidParameter, "configuration length does not match the graph");
  }
  return exponent(g, m, spins) >= 0;
}

double weight(const Graph& g, const ModelSpec& m, const Configuration& c) {
  check_domain(g, m, c);
  const long long k = exponent(g, m, c.spins);
  if (k < 0) return 0.0;
  if (c.spins.size() > 64) return std::exp(static_cast<double>(k) * std::log(m.parameter));
  return std::pow(m.parameter, static_cast<double>(k));
}

double log_weight(const Graph& g, const ModelSpec& m, const Configuration& c) {
  check_domain(g, m, c);
  const long long k = exponent(g, m, c.spins);
  if (k < 0) return -std::numeric_limits<double>::infinity();
  return static_cast<double>(k) * std::log(m.parameter);
}

double hardcore_marginal_bound(double lambda, double max_degree) {
  if (!(lambda > 0.0) || !(max_degree >= 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "need lambda > 0 and D >= 0");
  }
  return lambda / (lambda + std::pow(1.0 + lambda, max_degree));
}

double ising_marginal_bound(double beta, double max_degree) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorKind::kInvalidParameter, "beta must lie in (0,1)");
  if (!(max_degree >= 0.0)) throw Error(ErrorKind::kInvalidParameter, "D must be >= 0");
  const double t = std::pow(beta, max_degree);
  return t / (1.0 + t);
}

}  // namespace glauber
