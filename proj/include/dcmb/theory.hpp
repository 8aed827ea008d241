#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcmb/dcm.hpp"
#include "dcmb/rng.hpp"

namespace dcmb {

// Randomized input for the or-function inequalities: x >= y coordinatewise in
// [0, p_max]^K, c descending in [0,1]^K, gamma in [0,1].
struct InequalitySample {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> c;
  double gamma = 1.0;
  double p_max = 1.0;
  double alpha = 1.0;  // (1 - p_max)^(K-1)

  std::string describe() const;
};

// Mixes uniform draws with boundary-heavy ones (entries in {0, tiny, p_max}).
InequalitySample sample_inequality(std::size_t k, double p_max, Rng& rng);

namespace detail {

void require_unit_range(std::span<const double> v, const char* name);
void require_dominating_pair(std::span<const double> x, std::span<const double> y);
void require_descending(std::span<const double> c);

// Margin primitives are parameterized on the or-function so the test suite
// can inject a corrupted one and confirm the checks would catch it.
template <class OrFn>
double lemma1_margin(std::span<const double> x, std::span<const double> y, OrFn&& v) {
  require_dominating_pair(x, y);
  double sum_x = 0.0, sum_y = 0.0;
  for (double e : x) sum_x += e;
  for (double e : y) sum_y += e;
  return (sum_x - sum_y) - (v(x) - v(y));
}

template <class OrFn>
double lemma2_margin(std::span<const double> x, std::span<const double> y,
                     double p_max, OrFn&& v) {
  require_dominating_pair(x, y);
  if (!(p_max >= 0.0 && p_max <= 1.0))
    throw std::invalid_argument("p_max must be in [0,1]");
  for (double e : x)
    if (e > p_max) throw std::invalid_argument("entries must not exceed p_max");
  const double alpha =
      x.empty() ? 1.0 : std::pow(1.0 - p_max, static_cast<double>(x.size() - 1));
  double sum_x = 0.0, sum_y = 0.0;
  for (double e : x) sum_x += e;
  for (double e : y) sum_y += e;
  return (v(x) - v(y)) - alpha * (sum_x - sum_y);
}

template <class OrFn>
double lemma3_margin(std::span<const double> x, std::span<const double> c, OrFn&& v) {
  require_unit_range(x, "x");
  require_descending(c);
  if (x.size() != c.size()) throw std::invalid_argument("x and c must have equal length");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  std::vector<double> cx(x.size()), cs(x.size());
  double linear = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    cx[k] = c[k] * x[k];
    cs[k] = c[k] * sorted[k];
    linear += cs[k] - cx[k];
  }
  return linear - (v(std::span<const double>(cs)) - v(std::span<const double>(cx)));
}

template <class OrFn>
double lemma4_margin(std::span<const double> x, std::span<const double> y,
                     double gamma, OrFn&& v) {
  require_dominating_pair(x, y);
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("gamma must be in [0,1]");
  std::vector<double> gx(x.size()), gy(y.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    gx[k] = gamma * x[k];
    gy[k] = gamma * y[k];
  }
  return (v(std::span<const double>(gx)) - v(std::span<const double>(gy))) -
         gamma * (v(x) - v(y));
}

}  // namespace detail

// Each check returns the inequality's slack, which must be >= -1e-12.
// lemma1:  sum(x) - sum(y) >= V(x) - V(y)               for x >= y
double check_lemma1(std::span<const double> x, std::span<const double> y);
// lemma2:  V(x) - V(y) >= alpha [sum(x) - sum(y)]       for x >= y in [0, p_max]
double check_lemma2(std::span<const double> x, std::span<const double> y, double p_max);
// lemma3:  sum(c x') - sum(c x) >= V(c.x') - V(c.x)     for descending c, x' = sorted x
double check_lemma3(std::span<const double> x, std::span<const double> c);
// lemma4:  V(gx) - V(gy) >= g [V(x) - V(y)]             for x >= y, g in [0,1]
double check_lemma4(std::span<const double> x, std::span<const double> y, double gamma);

struct LemmaSuiteReport {
  int lemma = 0;
  std::int64_t samples = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string worst_case;
  bool pass = false;
};

// Runs all four lemma checks on samples_per_k randomized samples for each
// K in 1..k_max. A report fails when any margin drops below -tolerance.
std::vector<LemmaSuiteReport> run_lemma_suite(std::int64_t samples_per_k,
                                              std::size_t k_max, std::uint64_t seed,
                                              double tolerance = 1e-12);

// Enumeration oracle: argmax of expected_reward over all K-permutations,
// first hit in lexicographic order on ties. Only for small instances.
ActionList exhaustive_best_list(std::span<const double> w, std::span<const double> v);

struct OracleEquivalenceReport {
  std::int64_t trials = 0;
  std::int64_t optimal_list_mismatches = 0;
  std::int64_t select_list_mismatches = 0;
  std::string first_mismatch;
  bool pass() const {
    return optimal_list_mismatches == 0 && select_list_mismatches == 0;
  }
};

// Random small instances (L <= 6, K <= 3): optimal_list and select_list must
// match the enumeration oracle exactly.
OracleEquivalenceReport run_oracle_equivalence(std::int64_t trials, std::uint64_t seed);

}  // namespace dcmb
