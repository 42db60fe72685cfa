#include "glauber/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include <gmpxx.h>

#include "glauber/error.hpp"
#include "glauber/oracle_exact.hpp"

namespace glauber {

// ---------------------------------------------------------------------------
// DiscreteDistribution

DiscreteDistribution::DiscreteDistribution(SiteDomain domain, int num_sites)
    : domain_(domain), num_sites_(num_sites), words_(std::max(1, (num_sites + 63) / 64)) {
  if (num_sites < 0) throw Error(ErrorKind::kInvalidParameter, "negative site count");
}

Configuration DiscreteDistribution::outcome(std::size_t i) const {
  Configuration c{domain_, std::vector<std::uint8_t>(num_sites_)};
  for (int s = 0; s < num_sites_; ++s) c.spins[s] = spin(i, s);
  return c;
}

void DiscreteDistribution::push_back(std::span<const std::uint8_t> spins, double p) {
  if (static_cast<int>(spins.size()) != num_sites_) {
    throw Error(ErrorKind::kInvalidParameter, "outcome length does not match the distribution");
  }
  const auto k = pack_spins(spins);
  push_back_key(k, p);
}

void DiscreteDistribution::push_back_key(std::span<const std::uint64_t> key, double p) {
  bits_.insert(bits_.end(), key.begin(), key.end());
  bits_.resize(probs_.size() * words_ + words_, 0);
  probs_.push_back(p);
}

void DiscreteDistribution::reserve(std::size_t count) {
  bits_.reserve(count * words_);
  probs_.reserve(count);
}

double DiscreteDistribution::marginal(int site) const {
  if (site < 0 || site >= num_sites_) throw Error(ErrorKind::kInvalidParameter, "site out of range");
  double total = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    if (spin(i, site)) total += probs_[i];
  return total;
}

double DiscreteDistribution::probability_of(std::span<const std::uint8_t> spins) const {
  const auto k = pack_spins(spins);
  for (std::size_t i = 0; i < size(); ++i) {
    auto row = key(i);
    if (std::equal(row.begin(), row.end(), k.begin(), k.end())) return probs_[i];
  }
  return 0.0;
}

std::vector<std::uint64_t> pack_spins(std::span<const std::uint8_t> spins) {
  std::vector<std::uint64_t> k(std::max<std::size_t>(1, (spins.size() + 63) / 64), 0);
  for (std::size_t s = 0; s < spins.size(); ++s)
    if (spins[s]) k[s / 64] |= std::uint64_t{1} << (s % 64);
  return k;
}

void ConfigurationCounter::add(std::span<const std::uint8_t> spins) {
  if (static_cast<int>(spins.size()) != num_sites_) {
    throw Error(ErrorKind::kInvalidParameter, "sample length does not match the counter");
  }
  ++counts_[pack_spins(spins)];
  ++total_;
}

void ConfigurationCounter::merge(const ConfigurationCounter& other) {
  for (const auto& [k, c] : other.counts_) counts_[k] += c;
  total_ += other.total_;
}

DiscreteDistribution ConfigurationCounter::to_distribution() const {
  DiscreteDistribution d(domain_, num_sites_);
  d.reserve(counts_.size());
  for (const auto& [k, c] : counts_) {
    d.push_back_key(k, static_cast<double>(c) / static_cast<double>(total_));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Enumeration of the support over the free sites

namespace {

struct Support {
  std::vector<int> free_sites;
  std::vector<std::uint64_t> base_key;  // pinned spins
  int constant_exponent = 0;            // contribution of the pinned sites
  std::vector<std::uint32_t> masks;     // feasible free-site assignments, ascending
  std::vector<int> exponents;           // free-site exponent per mask
  int max_exponent = 0;
};

class SupportEnumerator {
 public:
  SupportEnumerator(const Graph& g, ModelKind kind, const Pinning& p) : kind_(kind) {
    const SiteDomain domain =
        kind == ModelKind::kMonomerDimer ? SiteDomain::kEdges : SiteDomain::kVertices;
    const int sites = site_count(g, domain);
    p.validate(sites);
    for (int s = 0; s < sites; ++s)
      if (p.is_free(s)) free_.push_back(s);
    f_ = static_cast<int>(free_.size());
    if (f_ > kOracleMaxFreeSites) {
      throw Error(ErrorKind::kEnumerationOverflow,
                  std::to_string(f_) + " free sites exceed the oracle limit of " +
                      std::to_string(kOracleMaxFreeSites));
    }
    std::vector<int> index(sites, -1);
    for (int j = 0; j < f_; ++j) index[free_[j]] = j;
    conflict_.assign(f_, 0);
    adj_hi_.assign(f_, 0);
    c0_.assign(f_, 0);
    c1_.assign(f_, 0);
    allowed_ = f_ == 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << f_) - 1;

    auto pinned = [&p](int s) { return static_cast<int>(p.spins[s]); };
    switch (kind) {
      case ModelKind::kHardCore:
        for (const auto& [u, v] : g.edges()) {
          const int iu = index[u], iv = index[v];
          if (iu < 0 && iv < 0) {
            if (pinned(u) == 1 && pinned(v) == 1) infeasible_ = true;
          } else if (iu >= 0 && iv >= 0) {
            conflict_[iu] |= std::uint32_t{1} << iv;
            conflict_[iv] |= std::uint32_t{1} << iu;
          } else {
            const int j = iu >= 0 ? iu : iv;
            const int other = iu >= 0 ? v : u;
            if (pinned(other) == 1) allowed_ &= ~(std::uint32_t{1} << j);
          }
        }
        for (int s = 0; s < sites; ++s) constant_ += index[s] < 0 && pinned(s) == 1;
        break;
      case ModelKind::kMonomerDimer: {
        std::vector<int> covered(g.num_vertices(), 0);
        for (int e = 0; e < sites; ++e) {
          if (index[e] >= 0 || pinned(e) != 1) continue;
          ++constant_;
          const auto [a, b] = g.edge(e);
          if (++covered[a] > 1 || ++covered[b] > 1) infeasible_ = true;
        }
        for (int j = 0; j < f_; ++j) {
          const auto [a, b] = g.edge(free_[j]);
          if (covered[a] || covered[b]) allowed_ &= ~(std::uint32_t{1} << j);
          for (int end : {a, b}) {
            for (int e : g.incident_edges(end)) {
              if (e != free_[j] && index[e] >= 0) conflict_[j] |= std::uint32_t{1} << index[e];
            }
          }
        }
        break;
      }
      case ModelKind::kIsing:
        for (const auto& [u, v] : g.edges()) {
          const int iu = index[u], iv = index[v];
          if (iu < 0 && iv < 0) {
            constant_ += pinned(u) == pinned(v);
          } else if (iu >= 0 && iv >= 0) {
            adj_hi_[std::min(iu, iv)] |= std::uint32_t{1} << std::max(iu, iv);
          } else {
            const int j = iu >= 0 ? iu : iv;
            const int other = iu >= 0 ? v : u;
            (pinned(other) == 1 ? c1_[j] : c0_[j]) += 1;
          }
        }
        break;
    }

    base_key_.assign(std::max(1, (sites + 63) / 64), 0);
    for (int s = 0; s < sites; ++s)
      if (index[s] < 0 && pinned(s) == 1) base_key_[s / 64] |= std::uint64_t{1} << (s % 64);
  }

  int free_count() const { return f_; }

  // Free-site exponent of the assignment, or -1 when forbidden.
  int evaluate(std::uint32_t mask) const {
    if (kind_ == ModelKind::kIsing) {
      int count = 0;
      for (int j = 0; j < f_; ++j) {
        if ((mask >> j) & 1U) {
          count += c1_[j] + std::popcount(adj_hi_[j] & mask);
        } else {
          count += c0_[j] + std::popcount(adj_hi_[j] & ~mask);
        }
      }
      return count;
    }
    if (mask & ~allowed_) return -1;
    for (std::uint32_t rest = mask; rest != 0; rest &= rest - 1) {
      if (mask & conflict_[std::countr_zero(rest)]) return -1;
    }
    return std::popcount(mask);
  }

  Support run(Execution exec) const {
    Support out;
    out.free_sites = free_;
    out.base_key = base_key_;
    out.constant_exponent = constant_;
    if (infeasible_) return out;
    const std::uint64_t total = std::uint64_t{1} << f_;
    if (exec == Execution::kSerial) {
      for (std::uint64_t mask = 0; mask < total; ++mask) {
        const int k = evaluate(static_cast<std::uint32_t>(mask));
        if (k < 0) continue;
        out.masks.push_back(static_cast<std::uint32_t>(mask));
        out.exponents.push_back(k);
      }
    } else {
      // Fixed contiguous blocks concatenated in order, so the result does
      // not depend on the schedule.
      const std::uint64_t blocks = std::min<std::uint64_t>(total, 256);
      const std::uint64_t per_block = (total + blocks - 1) / blocks;
      std::vector<std::vector<std::uint32_t>> block_masks(blocks);
      std::vector<std::vector<int>> block_exps(blocks);
#pragma omp parallel for schedule(dynamic)
      for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b) {
        const std::uint64_t lo = b * per_block;
        const std::uint64_t hi = std::min(total, lo + per_block);
        for (std::uint64_t mask = lo; mask < hi; ++mask) {
          const int k = evaluate(static_cast<std::uint32_t>(mask));
          if (k < 0) continue;
          block_masks[b].push_back(static_cast<std::uint32_t>(mask));
          block_exps[b].push_back(k);
        }
      }
      std::size_t count = 0;
      for (const auto& v : block_masks) count += v.size();
      out.masks.reserve(count);
      out.exponents.reserve(count);
      for (std::uint64_t b = 0; b < blocks; ++b) {
        out.masks.insert(out.masks.end(), block_masks[b].begin(), block_masks[b].end());
        out.exponents.insert(out.exponents.end(), block_exps[b].begin(), block_exps[b].end());
      }
    }
    for (int k : out.exponents) out.max_exponent = std::max(out.max_exponent, k);
    return out;
  }

 private:
  ModelKind kind_;
  std::vector<int> free_;
  int f_ = 0;
  bool infeasible_ = false;
  int constant_ = 0;
  std::uint32_t allowed_ = 0;
  std::vector<std::uint32_t> conflict_;
  std::vector<std::uint32_t> adj_hi_;
  std::vector<int> c0_, c1_;
  std::vector<std::uint64_t> base_key_;
};

Support enumerate_support(const Graph& g, ModelKind kind, const Pinning& p, Execution exec) {
  SupportEnumerator e(g, kind, p);
  Support s = e.run(exec);
  if (s.masks.empty()) {
    throw Error(ErrorKind::kEmptySupport, "no positive-weight configuration matches the pinning");
  }
  return s;
}

std::vector<std::int64_t> histogram(const Support& s) {
  std::vector<std::int64_t> h(s.max_exponent + 1, 0);
  for (int k : s.exponents) ++h[k];
  return h;
}

mpq_class power(const mpq_class& q, unsigned long k) {
  mpq_class r;
  mpz_pow_ui(r.get_num_mpz_t(), q.get_num_mpz_t(), k);
  mpz_pow_ui(r.get_den_mpz_t(), q.get_den_mpz_t(), k);
  return r;
}

double log_mpz(const mpz_class& z) {
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp) * std::log(2.0);
}

double log_mpq(const mpq_class& q) { return log_mpz(q.get_num()) - log_mpz(q.get_den()); }

// Per-exponent probabilities of the free part plus log Z of the free part.
struct FreeWeights {
  std::vector<double> prob_by_exponent;
  double log_z_free = 0.0;
};

FreeWeights free_weights(const Support& s, double parameter) {
  const auto h = histogram(s);
  FreeWeights out;
  out.prob_by_exponent.assign(h.size(), 0.0);
  if (static_cast<int>(s.free_sites.size()) <= kOracleExactFreeSites) {
    const mpq_class q(parameter);
    mpq_class z = 0;
    std::vector<mpq_class> pw(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
      if (h[k] == 0) continue;
      pw[k] = power(q, static_cast<unsigned long>(k));
      z += mpq_class(mpz_class(static_cast<long>(h[k]))) * pw[k];
    }
    for (std::size_t k = 0; k < h.size(); ++k) {
      if (h[k] == 0) continue;
      out.prob_by_exponent[k] = mpq_class(pw[k] / z).get_d();
    }
    out.log_z_free = log_mpq(z);
    return out;
  }
  int kmin = 0;
  while (h[kmin] == 0) ++kmin;
  const double lq = std::log(parameter);
  double total = 0.0;
  for (std::size_t k = kmin; k < h.size(); ++k) {
    if (h[k] == 0) continue;
    out.prob_by_exponent[k] = std::exp((static_cast<double>(k) - kmin) * lq);
    total += static_cast<double>(h[k]) * out.prob_by_exponent[k];
  }
  for (double& w : out.prob_by_exponent) w /= total;
  out.log_z_free = kmin * lq + std::log(total);
  return out;
}

std::vector<mpq_class> exact_free_marginals(const Support& s, const mpq_class& q,
                                            mpq_class& z_free) {
  const int f = static_cast<int>(s.free_sites.size());
  const std::size_t levels = static_cast<std::size_t>(s.max_exponent) + 1;
  std::vector<std::int64_t> h(levels, 0);
  std::vector<std::vector<std::int64_t>> hv(f, std::vector<std::int64_t>(levels, 0));
  for (std::size_t i = 0; i < s.masks.size(); ++i) {
    const int k = s.exponents[i];
    ++h[k];
    for (std::uint32_t rest = s.masks[i]; rest != 0; rest &= rest - 1) ++hv[std::countr_zero(rest)][k];
  }
  std::vector<mpq_class> pw(levels);
  z_free = 0;
  for (std::size_t k = 0; k < levels; ++k) {
    if (h[k] == 0) continue;
    pw[k] = power(q, static_cast<unsigned long>(k));
    z_free += mpq_class(mpz_class(static_cast<long>(h[k]))) * pw[k];
  }
  std::vector<mpq_class> out(f);
  for (int j = 0; j < f; ++j) {
    mpq_class num = 0;
    for (std::size_t k = 0; k < levels; ++k)
      if (hv[j][k] != 0) num += mpq_class(mpz_class(static_cast<long>(hv[j][k]))) * pw[k];
    out[j] = num / z_free;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Oracle entry points

DiscreteDistribution exact_distribution(const Graph& g, const ModelSpec& m, const Pinning& p,
                                        Execution exec) {
  const Support s = enumerate_support(g, m.kind, p, exec);
  const FreeWeights fw = free_weights(s, m.parameter);
  const int sites = site_count(g, m);
  DiscreteDistribution d(m.domain(), sites);
  d.reserve(s.masks.size());
  std::vector<std::uint64_t> key = s.base_key;
  for (std::size_t i = 0; i < s.masks.size(); ++i) {
    std::copy(s.base_key.begin(), s.base_key.end(), key.begin());
    for (std::uint32_t rest = s.masks[i]; rest != 0; rest &= rest - 1) {
      const int site = s.free_sites[std::countr_zero(rest)];
      key[site / 64] |= std::uint64_t{1} << (site % 64);
    }
    d.push_back_key(key, fw.prob_by_exponent[s.exponents[i]]);
  }
  const double log_z = s.constant_exponent * std::log(m.parameter) + fw.log_z_free;
  d.set_partition_function(std::exp(log_z), log_z);
  return d;
}

std::vector<double> exact_marginals(const Graph& g, const ModelSpec& m, const Pinning& p,
                                    Execution exec) {
  const Support s = enumerate_support(g, m.kind, p, exec);
  std::vector<double> out(site_count(g, m));
  for (int site = 0; site < static_cast<int>(out.size()); ++site) {
    out[site] = p.is_free(site) ? 0.0 : p.spins[site];
  }
  const int f = static_cast<int>(s.free_sites.size());
  if (f <= kOracleExactFreeSites) {
    mpq_class z_free;
    const auto marg = exact_free_marginals(s, mpq_class(m.parameter), z_free);
    for (int j = 0; j < f; ++j) out[s.free_sites[j]] = marg[j].get_d();
    return out;
  }
  const FreeWeights fw = free_weights(s, m.parameter);
  std::vector<double> acc(f, 0.0);
  for (std::size_t i = 0; i < s.masks.size(); ++i) {
    const double w = fw.prob_by_exponent[s.exponents[i]];
    for (std::uint32_t rest = s.masks[i]; rest != 0; rest &= rest - 1) acc[std::countr_zero(rest)] += w;
  }
  for (int j = 0; j < f; ++j) out[s.free_sites[j]] = acc[j];
  return out;
}

double exact_marginal(const Graph& g, const ModelSpec& m, const Pinning& p, int site,
                      Execution exec) {
  if (site < 0 || site >= site_count(g, m)) throw Error(ErrorKind::kInvalidParameter, "site out of range");
  return exact_marginals(g, m, p, exec)[site];
}

ExactSummary exact_summary(const Graph& g, ModelKind kind, const mpq_class& parameter,
                           const Pinning& p) {
  if (parameter <= 0) throw Error(ErrorKind::kInvalidParameter, "parameter must be positive");
  const Support s = enumerate_support(g, kind, p, Execution::kParallel);
  ExactSummary out;
  mpq_class z_free;
  const auto marg = exact_free_marginals(s, parameter, z_free);
  out.partition_function = power(parameter, static_cast<unsigned long>(s.constant_exponent)) * z_free;
  out.marginals.resize(p.spins.size());
  for (std::size_t site = 0; site < p.spins.size(); ++site) {
    out.marginals[site] = p.is_free(static_cast<int>(site)) ? 0 : p.spins[site];
  }
  for (std::size_t j = 0; j < s.free_sites.size(); ++j) out.marginals[s.free_sites[j]] = marg[j];
  return out;
}

mpq_class exact_partition_function(const Graph& g, ModelKind kind, const mpq_class& parameter,
                                   const Pinning& p) {
  return exact_summary(g, kind, parameter, p).partition_function;
}

mpq_class parse_rational(const std::string& text) {
  auto fail = [&text]() -> mpq_class {
    throw Error(ErrorKind::kParseError, "not a rational number: '" + text + "'");
  };
  if (text.empty()) return fail();
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    mpq_class q;
    if (q.set_str(text, 10) != 0 || mpz_sgn(q.get_den_mpz_t()) == 0) return fail();
    q.canonicalize();
    return q;
  }
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') negative = text[i++] == '-';
  std::string digits;
  long scale = 0;
  bool any = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    digits += text[i++];
    any = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      digits += text[i++];
      --scale;
      any = true;
    }
  }
  if (!any) return fail();
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    std::size_t used = 0;
    long e = 0;
    try {
      e = std::stol(text.substr(i), &used);
    } catch (const std::exception&) {
      return fail();
    }
    if (used == 0) return fail();
    i += used;
    scale += e;
  }
  if (i != text.size()) return fail();
  mpz_class num(digits, 10);
  mpz_class ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(scale)));
  mpq_class q = scale >= 0 ? mpq_class(num * ten_pow) : mpq_class(num, ten_pow);
  q.canonicalize();
  return negative ? mpq_class(-q) : q;
}

// ---------------------------------------------------------------------------
// Distances and entropy

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint64_t>& k) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto w : k) h = (h ^ w) * 0xff51afd7ed558ccdULL;
    return static_cast<std::size_t>(h ^ (h >> 33));
  }
};

}  // namespace

double tv_distance(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.num_sites() != q.num_sites() || p.domain() != q.domain()) {
    throw Error(ErrorKind::kInvalidParameter, "distributions live on different site sets");
  }
  std::unordered_map<std::vector<std::uint64_t>, std::size_t, KeyHash> index;
  index.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    auto k = q.key(i);
    index.emplace(std::vector<std::uint64_t>(k.begin(), k.end()), i);
  }
  std::vector<std::uint8_t> matched(q.size(), 0);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto k = p.key(i);
    auto it = index.find(std::vector<std::uint64_t>(k.begin(), k.end()));
    if (it == index.end()) {
      total += p.probability(i);
    } else {
      matched[it->second] = 1;
      total += std::fabs(p.probability(i) - q.probability(it->second));
    }
  }
  for (std::size_t j = 0; j < q.size(); ++j)
    if (!matched[j]) total += q.probability(j);
  return std::clamp(0.5 * total, 0.0, 1.0);
}

namespace {

double entropy_of(const std::vector<double>& probs, const std::vector<double>& values) {
  double mean = 0.0, mean_flogf = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    mass += probs[i];
    mean += probs[i] * values[i];
    if (values[i] > 0.0) mean_flogf += probs[i] * values[i] * std::log(values[i]);
  }
  if (mass <= 0.0) return 0.0;
  mean /= mass;
  mean_flogf /= mass;
  if (mean <= 0.0) return 0.0;
  return std::max(0.0, mean_flogf - mean * std::log(mean));
}

void check_functional(const DiscreteDistribution& mu, const SiteFunctional& f) {
  if (f.size() != mu.size()) {
    throw Error(ErrorKind::kInvalidParameter, "functional must have one value per outcome");
  }
  for (double v : f)
    if (!(v >= 0.0)) throw Error(ErrorKind::kInvalidParameter, "functional values must be >= 0");
}

}  // namespace

double entropy(const DiscreteDistribution& mu, const SiteFunctional& f) {
  check_functional(mu, f);
  return entropy_of(mu.probabilities(), f);
}

double conditional_entropy(const DiscreteDistribution& mu, const SiteFunctional& f,
                           std::span<const int> s) {
  check_functional(mu, f);
  std::vector<std::uint64_t> clear(mu.words_per_outcome(), 0);
  for (int site : s) {
    if (site < 0 || site >= mu.num_sites()) throw Error(ErrorKind::kInvalidParameter, "site out of range");
    clear[site / 64] |= std::uint64_t{1} << (site % 64);
  }
  // Group outcomes by their spins outside S.
  std::map<std::vector<std::uint64_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto k = mu.key(i);
    std::vector<std::uint64_t> outside(k.begin(), k.end());
    for (std::size_t w = 0; w < outside.size(); ++w) outside[w] &= ~clear[w];
    groups[outside].push_back(i);
  }
  double total = 0.0;
  std::vector<double> probs, values;
  for (const auto& [key, members] : groups) {
    probs.clear();
    values.clear();
    double mass = 0.0;
    for (auto i : members) {
      probs.push_back(mu.probability(i));
      values.push_back(f[i]);
      mass += mu.probability(i);
    }
    total += mass * entropy_of(probs, values);
  }
  return total;
}

double crude_factorization_bound(int s, double b) {
  if (s < 1 || !(b > 0.0 && b < 1.0)) {
    throw Error(ErrorKind::kInvalidParameter, "need s >= 1 and b in (0,1)");
  }
  return 2.0 * s * s * std::log(1.0 / b) / std::pow(b, 2.0 * s + 2.0);
}

}  // namespace glauber
