#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "glauber/execution.hpp"
#include "glauber/graph.hpp"
#include "glauber/models.hpp"

namespace glauber {

inline constexpr int kInfluenceMatrixMaxFreeSites = 14;

// P(v = 1 | u = 1) - P(v = 1 | u = 0) under the pinning, by enumeration.
// For matchings this equals P(f = 0 | e = 0) - P(f = 0 | e = 1). Throws
// kUndefinedInfluence when u is (conditionally) frozen.
double pairwise_influence(const Graph& g, const ModelSpec& m, const Pinning& tau, int u, int v);

struct InfluenceMatrix {
  std::vector<std::pair<int, int>> index;  // (site, spin) with positive marginal
  Eigen::MatrixXd entries;
  Pinning tau;

  int dimension() const { return static_cast<int>(index.size()); }
  double max_abs_row_sum() const;
};

// Rows and columns over the free sites of `sites` (all sites when empty).
// Throws kEnumerationOverflow beyond kInfluenceMatrixMaxFreeSites.
InfluenceMatrix influence_matrix(const Graph& g, const ModelSpec& m, const Pinning& tau,
                                 std::span<const int> sites = {});

struct EigenReport {
  double lambda1 = 0.0;
  double max_imag = 0.0;  // dense path only
  bool dense = true;
  int iterations = 0;
};

// Largest real eigenvalue. Dense eigensolve up to dimension 64, shifted
// power iteration above (tolerance 1e-9, at most 1e5 iterations, else
// kNumericFailure).
EigenReport lambda1_report(const Eigen::MatrixXd& m);
double lambda1(const InfluenceMatrix& m);

struct SpectralScan {
  double eta = 0.0;            // max lambda1 over the conditionings visited
  double max_row_sum = 0.0;    // max absolute row sum over the same set
  Pinning worst;               // conditioning attaining eta
  std::int64_t conditionings = 0;
  bool exhaustive = false;
};

// Scans pinnings of the given sites (each free, 0 or 1): all of them when
// 3^|sites| <= budget, otherwise `budget` seeded random ones. Infeasible
// pinnings are skipped.
SpectralScan spectral_independence_scan(const Graph& g, const ModelSpec& m, std::span<const int> sites,
                                        std::int64_t budget, std::uint64_t seed);

struct ContractionContext {
  ModelKind kind = ModelKind::kHardCore;
  double d = 2.0;
  double parameter = 1.0;
  double chi = 1.0;
  double a = 1.0;  // chi / (chi - 1)
};

// Builds chi and a for the model. Throws kInvalidParameter outside the
// regime (hard-core: d > 1 and lambda < lambda_c(d); matchings: d > 1)
// unless allow_outside_regime is set, which exists to exhibit failures.
ContractionContext make_contraction_context(ModelKind kind, double d, double parameter,
                                            bool allow_outside_regime = false);

struct ContractionResult {
  double max_statistic = 0.0;  // max over trials of d * LHS^(chi/a)
  int worst_k = 0;
  bool pass = false;           // max_statistic < 1
};

ContractionResult contraction_check(const ContractionContext& ctx, std::int64_t trials, int k_max,
                                    std::uint64_t seed);

enum class CheckStatus { kPass, kFail, kInconclusive };
const char* to_string(CheckStatus s) noexcept;

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::kPass;
  std::optional<int> witness_vertex;
  std::vector<int> witness_set;
  std::string detail;
  std::vector<std::pair<std::string, double>> stats;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  CheckStatus overall = CheckStatus::kPass;

  bool passed() const { return overall == CheckStatus::kPass; }
  const CheckResult* find(const std::string& name) const;
};

struct VerifyConfig {
  double eps = 1.0;
  double delta = 0.5;
  std::optional<double> D;              // default 20 max(1, d)
  int ell = 6;
  std::optional<double> M;              // default max{10d, 50(1 + log d)}
  double component_slack = 0.5;         // c = (1/e)(1 + slack)
  std::optional<int> ball_radius;       // default floor((log log n)^2)
  std::optional<int> good_radius;       // default floor((log log n)^2) - 1
  int ball_excess = 1;
  std::int64_t set_cap = 1'000'000;     // per-root cap in check (d)
  bool check_ball = true;
  bool check_good = true;
  bool check_components = true;
  bool check_sets = true;
  Execution execution = Execution::kParallel;
};

double default_fr_constant(double d);

VerificationReport verify_graph(const Graph& g, double d, const VerifyConfig& config);

}  // namespace glauber
