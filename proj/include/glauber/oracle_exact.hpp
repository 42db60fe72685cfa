#pragma once

#include <string>
#include <vector>

#include <gmpxx.h>

#include "glauber/graph.hpp"
#include "glauber/models.hpp"

namespace glauber {

struct ExactSummary {
  mpq_class partition_function;
  // P(site = 1 | pinning) for every site; pinned sites carry their pin.
  std::vector<mpq_class> marginals;
};

// Rational-arithmetic oracle. The parameter is taken as an exact rational,
// so ModelKind plus mpq_class replaces ModelSpec here.
ExactSummary exact_summary(const Graph& g, ModelKind kind, const mpq_class& parameter,
                           const Pinning& p);

mpq_class exact_partition_function(const Graph& g, ModelKind kind, const mpq_class& parameter,
                                   const Pinning& p);

// Parses "a/b", integers and decimals with an optional exponent ("0.1",
// "2.5e-3") into the exact rational they denote.
mpq_class parse_rational(const std::string& text);

}  // namespace glauber
