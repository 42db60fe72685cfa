#include "glauber/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glauber/dynamics.hpp"
#include "glauber/error.hpp"
#include "glauber/oracle.hpp"
#include "glauber/rng.hpp"
#include "glauber/treecalc.hpp"

namespace glauber {

// ---------------------------------------------------------------------------
// Influences

double pairwise_influence(const Graph& g, const ModelSpec& m, const Pinning& tau, int u, int v) {
  const int sites = site_count(g, m);
  tau.validate(sites);
  if (u < 0 || u >= sites || v < 0 || v >= sites) throw Error(ErrorKind::kInvalidParameter, "site out of range");
  if (!tau.is_free(u)) throw Error(ErrorKind::kInvalidParameter, "source site must be free");
  const double pu = exact_marginal(g, m, tau, u);
  if (pu <= 0.0 || pu >= 1.0) {
    throw Error(ErrorKind::kUndefinedInfluence, "site " + std::to_string(u) + " is frozen under the pinning");
  }
  if (u == v) return 1.0;
  if (!tau.is_free(v)) return 0.0;
  Pinning up = tau, down = tau;
  up.pin(u, 1);
  down.pin(u, 0);
  return exact_marginal(g, m, up, v) - exact_marginal(g, m, down, v);
}

double InfluenceMatrix::max_abs_row_sum() const {
  double best = 0.0;
  for (int i = 0; i < entries.rows(); ++i) best = std::max(best, entries.row(i).cwiseAbs().sum());
  return best;
}

InfluenceMatrix influence_matrix(const Graph& g, const ModelSpec& m, const Pinning& tau,
                                 std::span<const int> sites) {
  const int total = site_count(g, m);
  tau.validate(total);
  std::vector<int> chosen;
  if (sites.empty()) {
    for (int s = 0; s < total; ++s) chosen.push_back(s);
  } else {
    chosen.assign(sites.begin(), sites.end());
    std::sort(chosen.begin(), chosen.end());
    chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  }
  std::vector<int> free;
  for (int s : chosen) {
    if (s < 0 || s >= total) throw Error(ErrorKind::kInvalidParameter, "site out of range");
    if (tau.is_free(s)) free.push_back(s);
  }
  if (static_cast<int>(free.size()) > kInfluenceMatrixMaxFreeSites) {
    throw Error(ErrorKind::kEnumerationOverflow,
                std::to_string(free.size()) + " free sites exceed the influence-matrix limit of " +
                    std::to_string(kInfluenceMatrixMaxFreeSites));
  }
  const auto p = exact_marginals(g, m, tau);
  InfluenceMatrix out;
  out.tau = tau;
  for (int v : free) {
    if (1.0 - p[v] > 0.0) out.index.emplace_back(v, 0);
    if (p[v] > 0.0) out.index.emplace_back(v, 1);
  }
  const int dim = out.dimension();
  out.entries = Eigen::MatrixXd::Zero(dim, dim);
  for (int row = 0; row < dim; ++row) {
    const auto [v, i] = out.index[row];
    Pinning cond = tau;
    cond.pin(v, i);
    const auto c = exact_marginals(g, m, cond);
    for (int col = 0; col < dim; ++col) {
      const auto [w, k] = out.index[col];
      if (w == v) continue;
      const double given = k == 1 ? c[w] : 1.0 - c[w];
      const double base = k == 1 ? p[w] : 1.0 - p[w];
      out.entries(row, col) = given - base;
    }
  }
  return out;
}

EigenReport lambda1_report(const Eigen::MatrixXd& m) {
  EigenReport r;
  const auto dim = m.rows();
  if (dim == 0) return r;
  if (dim <= 64) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::kNumericFailure, "dense eigensolve failed");
    const auto& ev = es.eigenvalues();
    r.lambda1 = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      r.lambda1 = std::max(r.lambda1, ev[i].real());
      r.max_imag = std::max(r.max_imag, std::fabs(ev[i].imag()));
    }
    return r;
  }
  // Shift by the largest absolute row sum so that the wanted eigenvalue
  // becomes the dominant one, then plain power iteration.
  r.dense = false;
  double shift = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) shift = std::max(shift, m.row(i).cwiseAbs().sum());
  if (shift == 0.0) return r;
  Eigen::MatrixXd b = m + shift * Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  double prev = 0.0;
  for (int it = 1; it <= 100000; ++it) {
    Eigen::VectorXd y = b * x;
    const double norm = y.norm();
    if (norm == 0.0) {
      r.lambda1 = -shift;
      r.iterations = it;
      return r;
    }
    x = y / norm;
    if (it > 1 && std::fabs(norm - prev) <= 1e-9 * std::max(1.0, norm)) {
      r.lambda1 = norm - shift;
      r.iterations = it;
      return r;
    }
    prev = norm;
  }
  throw Error(ErrorKind::kNumericFailure, "power iteration did not converge in 1e5 iterations");
}

double lambda1(const InfluenceMatrix& m) { return lambda1_report(m.entries).lambda1; }

SpectralScan spectral_independence_scan(const Graph& g, const ModelSpec& m, std::span<const int> sites,
                                        std::int64_t budget, std::uint64_t seed) {
  if (budget < 1) throw Error(ErrorKind::kInvalidParameter, "budget must be >= 1");
  const int total_sites = site_count(g, m);
  std::vector<int> chosen(sites.begin(), sites.end());
  if (chosen.empty())
    for (int s = 0; s < total_sites; ++s) chosen.push_back(s);
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  const int k = static_cast<int>(chosen.size());

  std::int64_t count = 1;
  bool exhaustive = true;
  for (int i = 0; i < k && exhaustive; ++i) {
    if (count > budget / 3) exhaustive = false;
    count *= 3;
  }
  exhaustive = exhaustive && count <= budget;

  SpectralScan scan;
  scan.exhaustive = exhaustive;
  scan.worst = Pinning::none(total_sites);
  Rng rng(seed);
  const std::int64_t rounds = exhaustive ? count : budget;
  for (std::int64_t round = 0; round < rounds; ++round) {
    Pinning tau = Pinning::none(total_sites);
    std::int64_t code = round;
    for (int i = 0; i < k; ++i) {
      const int digit = exhaustive ? static_cast<int>(code % 3) : static_cast<int>(rng.below(3));
      code /= 3;
      if (digit > 0) tau.spins[chosen[i]] = static_cast<std::int8_t>(digit - 1);
    }
    try {
      const InfluenceMatrix mat = influence_matrix(g, m, tau, chosen);
      ++scan.conditionings;
      if (mat.dimension() == 0) continue;
      const double l1 = lambda1(mat);
      scan.max_row_sum = std::max(scan.max_row_sum, mat.max_abs_row_sum());
      if (l1 > scan.eta) {
        scan.eta = l1;
        scan.worst = tau;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kEmptySupport) throw;
    }
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Contraction

ContractionContext make_contraction_context(ModelKind kind, double d, double parameter,
                                            bool allow_outside_regime) {
  if (!(d > 1.0)) throw Error(ErrorKind::kInvalidParameter, "contraction check needs d > 1");
  if (!(parameter > 0.0)) throw Error(ErrorKind::kInvalidParameter, "parameter must be > 0");
  ContractionContext ctx;
  ctx.kind = kind;
  ctx.d = d;
  ctx.parameter = parameter;
  double inv_chi = 0.0;
  switch (kind) {
    case ModelKind::kHardCore:
      if (!allow_outside_regime && !(parameter < lambda_c(d).to_double())) {
        throw Error(ErrorKind::kInvalidParameter, "lambda must be below lambda_c(d)");
      }
      inv_chi = 1.0 - (d - 1.0) / 2.0 * std::log1p(1.0 / (d - 1.0));
      break;
    case ModelKind::kMonomerDimer:
      inv_chi = 1.0 - 1.0 / (4.0 * parameter * d);
      if (!(inv_chi > 0.0)) throw Error(ErrorKind::kInvalidParameter, "need 4 gamma d > 1");
      break;
    case ModelKind::kIsing:
      throw Error(ErrorKind::kInvalidParameter, "no contraction potential for the Ising model");
  }
  ctx.chi = 1.0 / inv_chi;
  ctx.a = ctx.chi / (ctx.chi - 1.0);
  return ctx;
}

ContractionResult contraction_check(const ContractionContext& ctx, std::int64_t trials, int k_max,
                                    std::uint64_t seed) {
  if (trials < 1 || k_max < 1) throw Error(ErrorKind::kInvalidParameter, "trials and k_max must be >= 1");
  Rng rng(seed);
  ContractionResult out;
  const double a = ctx.a, p = ctx.parameter;
  auto phi_hc = [](double y) { return 1.0 / std::sqrt(y * (1.0 + y)); };
  auto phi_md = [](double x) { return 1.0 / std::sqrt(x * (2.0 - x)); };
  std::vector<double> xs;
  for (std::int64_t t = 0; t < trials; ++t) {
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k_max)));
    xs.resize(k);
    double lhs = 0.0;
    if (ctx.kind == ModelKind::kHardCore) {
      double x = p;
      for (double& xi : xs) {
        xi = rng.uniform() * p;
        x /= 1.0 + xi;
      }
      double sum = 0.0;
      for (double xi : xs) {
        if (xi <= 0.0) continue;  // Phi(0) is infinite, the term vanishes
        sum += std::pow(x / ((1.0 + xi) * phi_hc(xi)), a);
      }
      lhs = std::pow(phi_hc(x), a) * sum;
    } else {
      double total = 0.0;
      for (double& r : xs) {
        r = 1.0 - rng.uniform();  // (0, 1]
        total += r;
      }
      const double big_r = 1.0 / (1.0 + p * total);
      double sum = 0.0;
      for (double r : xs) sum += std::pow(p * big_r * big_r / phi_md(r), a);
      lhs = std::pow(phi_md(big_r), a) * sum;
    }
    const double stat = ctx.d * std::pow(lhs, ctx.chi / a);
    if (stat > out.max_statistic) {
      out.max_statistic = stat;
      out.worst_k = k;
    }
  }
  out.pass = out.max_statistic < 1.0;
  return out;
}

// ---------------------------------------------------------------------------
// Graph verification

const char* to_string(CheckStatus s) noexcept {
  switch (s) {
    case CheckStatus::kPass: return "pass";
    case CheckStatus::kFail: return "fail";
    case CheckStatus::kInconclusive: return "inconclusive";
  }
  return "unknown";
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

double default_fr_constant(double d) { return std::max(10.0 * d, 50.0 * (1.0 + std::log(d))); }

namespace {

template <typename F>
void for_each_vertex(int n, Execution exec, F&& body) {
  if (exec == Execution::kSerial) {
    for (int v = 0; v < n; ++v) body(v);
    return;
  }
#pragma omp parallel for schedule(dynamic, 64)
  for (int v = 0; v < n; ++v) body(v);
}

// Size of B(v, r) and the number of edges of the induced subgraph.
std::pair<std::int64_t, std::int64_t> ball_stats(const Graph& g, int v, int r) {
  thread_local std::vector<int> dist;
  if (static_cast<int>(dist.size()) < g.num_vertices()) dist.resize(g.num_vertices(), -1);
  std::vector<int> queue{v};
  dist[v] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int x = queue[head];
    if (dist[x] == r) continue;
    for (int w : g.neighbors(x)) {
      if (dist[w] < 0) {
        dist[w] = dist[x] + 1;
        queue.push_back(w);
      }
    }
  }
  std::int64_t twice_edges = 0;
  for (int x : queue)
    for (int w : g.neighbors(x)) twice_edges += dist[w] >= 0;
  for (int x : queue) dist[x] = -1;
  return {static_cast<std::int64_t>(queue.size()), twice_edges / 2};
}

int loglog_squared(int n) {
  if (n < 3) return 0;
  const double ll = std::log(std::log(static_cast<double>(n)));
  return ll > 0.0 ? static_cast<int>(std::floor(ll * ll)) : 0;
}

CheckResult check_balls(const Graph& g, double d, const VerifyConfig& cfg) {
  const int n = g.num_vertices();
  const int radius = cfg.ball_radius.value_or(loglog_squared(n));
  const double size_bound = std::pow(d, radius) * std::log(static_cast<double>(n));
  std::vector<std::int64_t> sizes(n), excess(n);
  for_each_vertex(n, cfg.execution, [&](int v) {
    const auto [size, edges] = ball_stats(g, v, radius);
    sizes[v] = size;
    excess[v] = edges - size + 1;
  });
  CheckResult r;
  r.name = "ball";
  std::int64_t max_size = 0, max_excess = 0, size_failures = 0, excess_failures = 0;
  for (int v = 0; v < n; ++v) {
    max_size = std::max(max_size, sizes[v]);
    max_excess = std::max(max_excess, excess[v]);
    const bool big = static_cast<double>(sizes[v]) > size_bound;
    const bool cyclic = excess[v] > cfg.ball_excess;
    size_failures += big;
    excess_failures += cyclic;
    if ((big || cyclic) && !r.witness_vertex) {
      r.status = CheckStatus::kFail;
      r.witness_vertex = v;
      r.detail = big ? "|B(v,R)| = " + std::to_string(sizes[v]) + " exceeds d^R log n"
                     : "tree-excess of G[B(v,R)] = " + std::to_string(excess[v]) + " exceeds " +
                           std::to_string(cfg.ball_excess);
    }
  }
  r.stats = {{"radius", radius},
             {"size_bound", size_bound},
             {"max_ball_size", static_cast<double>(max_size)},
             {"max_tree_excess", static_cast<double>(max_excess)},
             {"size_failures", static_cast<double>(size_failures)},
             {"excess_failures", static_cast<double>(excess_failures)}};
  return r;
}

CheckResult check_good(const Graph& g, double d, const VerifyConfig& cfg) {
  const int n = g.num_vertices();
  const int radius = cfg.good_radius.value_or(default_good_radius(n));
  std::vector<double> values(n);
  for_each_vertex(n, cfg.execution,
                  [&](int v) { values[v] = epsilon_good_check(g, v, d, cfg.eps, radius).value; });
  CheckResult r;
  r.name = "good";
  const double threshold = cfg.eps * std::log(static_cast<double>(n));
  double worst = 0.0;
  std::int64_t failures = 0;
  for (int v = 0; v < n; ++v) {
    worst = std::max(worst, values[v]);
    if (values[v] > threshold) {
      ++failures;
      if (!r.witness_vertex) {
        r.status = CheckStatus::kFail;
        r.witness_vertex = v;
        r.detail = "level series " + std::to_string(values[v]) + " exceeds eps log n = " +
                   std::to_string(threshold);
      }
    }
  }
  r.stats = {{"radius", radius}, {"threshold", threshold}, {"max_value", worst},
             {"failures", static_cast<double>(failures)}};
  return r;
}

CheckResult check_components(const Graph& g, double d, const VerifyConfig& cfg) {
  const int n = g.num_vertices();
  const double D = cfg.D.value_or(default_degree_threshold(d));
  const double size_bound = (1.0 + cfg.component_slack) / std::exp(1.0) * std::log(static_cast<double>(n));
  const VertexPartition p = degree_partition(g, D);
  const ComponentDecomposition dec = induced_components(g, p.high);
  CheckResult r;
  r.name = "components";
  std::int64_t max_size = 0, max_excess = 0;
  for (const auto& c : dec.components) {
    max_size = std::max<std::int64_t>(max_size, c.vertices.size());
    max_excess = std::max<std::int64_t>(max_excess, c.tree_excess());
    if (r.witness_vertex) continue;
    const bool big = static_cast<double>(c.vertices.size()) > size_bound;
    if (big || c.tree_excess() > cfg.ell) {
      r.status = CheckStatus::kFail;
      r.witness_vertex = c.vertices.front();
      r.witness_set = c.vertices;
      r.detail = big ? "component of size " + std::to_string(c.vertices.size()) + " exceeds c log n"
                     : "component tree-excess " + std::to_string(c.tree_excess()) + " exceeds ell = " +
                           std::to_string(cfg.ell);
    }
  }
  r.stats = {{"D", D},
             {"size_bound", size_bound},
             {"high_vertices", static_cast<double>(p.high.size())},
             {"components", static_cast<double>(dec.components.size())},
             {"max_component_size", static_cast<double>(max_size)},
             {"max_tree_excess", static_cast<double>(max_excess)}};
  return r;
}

CheckResult check_sets(const Graph& g, double d, const VerifyConfig& cfg) {
  const int n = g.num_vertices();
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw Error(ErrorKind::kInvalidParameter, "delta must lie in (0,1)");
  if (n == 0) {
    CheckResult empty;
    empty.name = "connected_sets";
    return empty;
  }
  const int k = std::max(1, static_cast<int>(std::ceil(cfg.delta * std::log(static_cast<double>(n)))));
  const double M = cfg.M.value_or(default_fr_constant(d));
  const double big_delta = 1.0 / (cfg.delta * std::log(1.0 / cfg.delta));
  const double bound = M * big_delta * k;
  // Per root: 0 ok, 1 failure, 2 overflow.
  std::vector<std::uint8_t> state(n, 0);
  std::vector<std::vector<int>> witness(n);
  std::vector<std::int64_t> counts(n, 0), max_sum(n, 0);
  for_each_vertex(n, cfg.execution, [&](int v) {
    try {
      counts[v] = for_each_connected_set_rooted_at_min(g, v, k, cfg.set_cap, [&](const std::vector<int>& s) {
        std::int64_t sum = 0;
        for (int x : s) sum += g.degree(x);
        max_sum[v] = std::max(max_sum[v], sum);
        if (static_cast<double>(sum) > bound && state[v] == 0) {
          state[v] = 1;
          witness[v] = s;
          std::sort(witness[v].begin(), witness[v].end());
        }
      });
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kEnumerationOverflow) throw;
      if (state[v] == 0) state[v] = 2;
    }
  });
  CheckResult r;
  r.name = "connected_sets";
  std::int64_t total = 0, worst = 0, overflows = 0;
  int first_overflow = -1;
  for (int v = 0; v < n; ++v) {
    total += counts[v];
    worst = std::max(worst, max_sum[v]);
    if (state[v] == 2) {
      ++overflows;
      if (first_overflow < 0) first_overflow = v;
    }
    if (state[v] == 1 && !r.witness_vertex) {
      r.status = CheckStatus::kFail;
      r.witness_vertex = v;
      r.witness_set = witness[v];
      r.detail = "connected set with degree sum above M * Delta * |S| = " + std::to_string(bound);
    }
  }
  if (r.status == CheckStatus::kPass && overflows > 0) {
    r.status = CheckStatus::kInconclusive;
    r.witness_vertex = first_overflow;
    r.detail = "enumeration cap exceeded at " + std::to_string(overflows) + " roots";
  }
  r.stats = {{"set_size", k},           {"M", M},
             {"bound", bound},          {"sets", static_cast<double>(total)},
             {"max_degree_sum", static_cast<double>(worst)},
             {"overflow_roots", static_cast<double>(overflows)}};
  return r;
}

}  // namespace

VerificationReport verify_graph(const Graph& g, double d, const VerifyConfig& config) {
  if (!(d > 0.0)) throw Error(ErrorKind::kInvalidParameter, "d must be > 0");
  if (!(config.eps > 0.0)) throw Error(ErrorKind::kInvalidParameter, "eps must be > 0");
  if (config.ell < 0) throw Error(ErrorKind::kInvalidParameter, "ell must be >= 0");
  VerificationReport report;
  if (config.check_ball) report.checks.push_back(check_balls(g, d, config));
  if (config.check_good) report.checks.push_back(check_good(g, d, config));
  if (config.check_components) report.checks.push_back(check_components(g, d, config));
  if (config.check_sets) report.checks.push_back(check_sets(g, d, config));
  report.overall = CheckStatus::kPass;
  for (const auto& c : report.checks) {
    if (c.status == CheckStatus::kFail) report.overall = CheckStatus::kFail;
  }
  if (report.overall == CheckStatus::kPass) {
    for (const auto& c : report.checks)
      if (c.status == CheckStatus::kInconclusive) report.overall = CheckStatus::kInconclusive;
  }
  return report;
}

}  // namespace glauber
