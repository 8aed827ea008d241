#include "dcmb/theory.hpp"

#include <cstdio>
#include <sstream>

#include "dcmb/policies.hpp"

namespace dcmb {

namespace detail {

void require_unit_range(std::span<const double> v, const char* name) {
  for (double e : v)
    if (!(e >= 0.0 && e <= 1.0))
      throw std::invalid_argument(std::string(name) + " entries must be in [0,1]");
}

void require_dominating_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("x and y must have equal length");
  require_unit_range(x, "x");
  require_unit_range(y, "y");
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] < y[k]) throw std::invalid_argument("x must dominate y coordinatewise");
}

void require_descending(std::span<const double> c) {
  require_unit_range(c, "c");
  for (std::size_t k = 0; k + 1 < c.size(); ++k)
    if (c[k] < c[k + 1]) throw std::invalid_argument("c must be descending");
}

}  // namespace detail

namespace {

const auto kOr = [](std::span<const double> v) { return or_value(v); };

std::string join_g17(std::span<const double> v) {
  std::string out = "[";
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
    if (i) out += ", ";
    out += buf;
  }
  return out + "]";
}

}  // namespace

std::string InequalitySample::describe() const {
  std::ostringstream os;
  os << "K=" << x.size() << " x=" << join_g17(x) << " y=" << join_g17(y)
     << " c=" << join_g17(c);
  char buf[96];
  std::snprintf(buf, sizeof(buf), " gamma=%.17g p_max=%.17g", gamma, p_max);
  os << buf;
  return os.str();
}

double check_lemma1(std::span<const double> x, std::span<const double> y) {
  return detail::lemma1_margin(x, y, kOr);
}

double check_lemma2(std::span<const double> x, std::span<const double> y, double p_max) {
  return detail::lemma2_margin(x, y, p_max, kOr);
}

double check_lemma3(std::span<const double> x, std::span<const double> c) {
  return detail::lemma3_margin(x, c, kOr);
}

double check_lemma4(std::span<const double> x, std::span<const double> y, double gamma) {
  return detail::lemma4_margin(x, y, gamma, kOr);
}

InequalitySample sample_inequality(std::size_t k, double p_max, Rng& rng) {
  if (k == 0) throw std::invalid_argument("K must be >= 1");
  if (!(p_max >= 0.0 && p_max <= 1.0))
    throw std::invalid_argument("p_max must be in [0,1]");
  constexpr double kTiny = 1e-9;

  InequalitySample s;
  s.p_max = p_max;
  s.alpha = std::pow(1.0 - p_max, static_cast<double>(k - 1));
  // mode 0: uniform; 1: boundary values only; 2: per-coordinate mix
  const auto mode = rng.next_u64() % 3;
  const auto draw = [&]() -> double {
    const bool boundary = mode == 1 || (mode == 2 && rng.bernoulli(0.5));
    if (!boundary) return rng.next_double() * p_max;
    const double choices[3] = {0.0, std::min(kTiny, p_max), p_max};
    return choices[rng.next_u64() % 3];
  };

  s.x.resize(k);
  s.y.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double a = draw(), b = draw();
    s.x[i] = std::max(a, b);
    s.y[i] = std::min(a, b);
  }
  s.c.resize(k);
  for (auto& e : s.c) e = draw();
  std::sort(s.c.begin(), s.c.end(), std::greater<double>());

  switch (rng.next_u64() % 4) {
    case 0: s.gamma = 0.0; break;
    case 1: s.gamma = 1.0; break;
    default: s.gamma = rng.next_double(); break;
  }
  return s;
}

std::vector<LemmaSuiteReport> run_lemma_suite(std::int64_t samples_per_k,
                                              std::size_t k_max, std::uint64_t seed,
                                              double tolerance) {
  if (samples_per_k < 1 || k_max < 1) throw std::invalid_argument("empty lemma suite");
  std::vector<LemmaSuiteReport> reports(4);
  for (int i = 0; i < 4; ++i) reports[i].lemma = i + 1;

  const auto note = [&](int lemma, double margin, const InequalitySample& s) {
    auto& rep = reports[lemma - 1];
    ++rep.samples;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_case = s.describe();
    }
  };

  Rng rng(derive_seed(seed, "lemma-suite"));
  for (std::size_t k = 1; k <= k_max; ++k) {
    for (std::int64_t i = 0; i < samples_per_k; ++i) {
      // full-range sample for lemmas 1, 3, 4
      const InequalitySample full = sample_inequality(k, 1.0, rng);
      note(1, check_lemma1(full.x, full.y), full);
      note(3, check_lemma3(full.x, full.c), full);
      note(4, check_lemma4(full.x, full.y, full.gamma), full);
      // capped sample for lemma 2
      double cap = 0.0;
      switch (rng.next_u64() % 4) {
        case 0: cap = 0.1; break;
        case 1: cap = 0.9; break;
        case 2: cap = 1.0; break;
        default: cap = rng.uniform(0.05, 0.95); break;
      }
      const InequalitySample capped = sample_inequality(k, cap, rng);
      note(2, check_lemma2(capped.x, capped.y, capped.p_max), capped);
    }
  }
  for (auto& rep : reports) rep.pass = rep.worst_margin >= -tolerance;
  return reports;
}

ActionList exhaustive_best_list(std::span<const double> w, std::span<const double> v) {
  detail::require_unit_range(w, "w");
  detail::require_unit_range(v, "v");
  const std::size_t item_count = w.size();
  const std::size_t positions = v.size();
  if (positions == 0 || positions > item_count)
    throw std::invalid_argument("need 1 <= K <= L");
  double permutations = 1.0;
  for (std::size_t j = 0; j < positions; ++j)
    permutations *= static_cast<double>(item_count - j);
  if (permutations > 2e7)
    throw std::invalid_argument("instance too large for exhaustive enumeration");

  ActionList best, current;
  current.items.resize(positions);
  double best_value = -1.0;
  std::vector<char> used(item_count, 0);
  // lexicographic depth-first enumeration; strict improvement keeps the first
  // maximizer, which is the lexicographically smallest one
  const std::function<void(std::size_t)> recurse = [&](std::size_t depth) {
    if (depth == positions) {
      const double value = expected_reward(current, w, v);
      if (value > best_value) {
        best_value = value;
        best = current;
      }
      return;
    }
    for (std::size_t e = 0; e < item_count; ++e) {
      if (used[e]) continue;
      used[e] = 1;
      current.items[depth] = static_cast<std::int32_t>(e);
      recurse(depth + 1);
      used[e] = 0;
    }
  };
  recurse(0);
  return best;
}

OracleEquivalenceReport run_oracle_equivalence(std::int64_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  OracleEquivalenceReport report;
  report.trials = trials;
  Rng rng(derive_seed(seed, "oracle-equivalence"));
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    const std::size_t item_count = 2 + rng.next_u64() % 5;  // 2..6
    const std::size_t positions = 1 + rng.next_u64() % std::min<std::size_t>(3, item_count);

    DcmInstance dcm;
    dcm.attraction.resize(item_count);
    for (auto& w : dcm.attraction) w = rng.next_double();
    dcm.termination.resize(positions);
    for (auto& v : dcm.termination) v = rng.next_double();

    const ActionList fast = optimal_list(dcm);
    const ActionList brute = exhaustive_best_list(dcm.attraction, dcm.termination);
    if (fast != brute) {
      ++report.optimal_list_mismatches;
      if (report.first_mismatch.empty()) {
        std::ostringstream os;
        os << "optimal_list mismatch: w=" << join_g17(dcm.attraction)
           << " v=" << join_g17(dcm.termination);
        report.first_mismatch = os.str();
      }
    }

    // select_list against the same oracle under a random but consistent
    // termination vector
    std::vector<double> ucbs(item_count);
    for (auto& u : ucbs) u = rng.next_double();
    std::vector<std::int32_t> order = identity_order(positions);
    for (std::size_t k = positions; k > 1; --k)
      std::swap(order[k - 1], order[rng.next_u64() % k]);
    std::vector<double> ranked(positions);
    for (auto& e : ranked) e = rng.next_double();
    std::sort(ranked.begin(), ranked.end(), std::greater<double>());
    std::vector<double> consistent(positions);
    for (std::size_t r = 0; r < positions; ++r)
      consistent[static_cast<std::size_t>(order[r])] = ranked[r];

    const ActionList picked = select_list(ucbs, order);
    const ActionList argmax = exhaustive_best_list(ucbs, consistent);
    if (picked != argmax) {
      ++report.select_list_mismatches;
      if (report.first_mismatch.empty()) {
        std::ostringstream os;
        os << "select_list mismatch: ucbs=" << join_g17(ucbs)
           << " v=" << join_g17(consistent);
        report.first_mismatch = os.str();
      }
    }
  }
  return report;
}

}  // namespace dcmb
