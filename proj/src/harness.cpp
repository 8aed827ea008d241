#include "dcmb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "dcmb/klucb.hpp"

namespace dcmb {

namespace {

std::string g10(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// post-init cumulative regret helper
double value_at(const std::vector<double>& cum, std::size_t init, bool include_init,
                std::size_t index) {
  if (include_init) return cum[index];
  const double base = init > 0 ? cum[init - 1] : 0.0;
  return cum[init + index] - base;
}

std::vector<double> sorted_descending(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

}  // namespace

void LbSpec::validate() const {
  if (item_count == 0) throw std::invalid_argument("need at least one item");
  if (optimal_items.empty()) throw std::invalid_argument("optimal set must be nonempty");
  if (optimal_items.size() > item_count)
    throw std::invalid_argument("optimal set larger than the ground set");
  std::vector<char> seen(item_count, 0);
  for (std::int32_t e : optimal_items) {
    if (e < 0 || static_cast<std::size_t>(e) >= item_count)
      throw std::out_of_range("optimal item index out of range");
    if (seen[static_cast<std::size_t>(e)])
      throw std::invalid_argument("optimal items must be distinct");
    seen[static_cast<std::size_t>(e)] = 1;
  }
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p must be in (0,1]");
  if (!(gap >= 0.0 && gap <= p)) throw std::invalid_argument("need 0 <= gap <= p");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0,1]");
}

DcmInstance make_lb_instance(const LbSpec& spec) {
  spec.validate();
  if (spec.gap == 0.0)
    std::cerr << "warning: zero gap makes every item equally attractive (degenerate)\n";
  DcmInstance dcm;
  dcm.attraction.assign(spec.item_count, spec.p - spec.gap);
  for (std::int32_t e : spec.optimal_items)
    dcm.attraction[static_cast<std::size_t>(e)] = spec.p;
  dcm.termination.assign(spec.positions(), spec.gamma);
  dcm.order_known = true;  // constant termination is trivially descending
  return dcm;
}

double RegretTrace::final_regret(bool include_init, bool expected_mode) const {
  const auto& cum = expected_mode ? cum_expected : cum_realized;
  if (cum.empty()) return 0.0;
  return value_at(cum, init_steps, include_init, cum.size() - 1 - (include_init ? 0 : init_steps));
}

RegretTrace run_episode(const DcmInstance& dcm, Policy& policy, std::int64_t horizon,
                        std::uint64_t seed, const EpisodeOptions& options) {
  dcm.validate();
  if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
  RegretTrace trace;
  trace.policy = policy.id();
  trace.seed = seed;
  if (horizon == 0) return trace;

  if (options.cascade_prefix) {
    if (*options.cascade_prefix < 1 || *options.cascade_prefix > dcm.positions())
      throw std::out_of_range("cascade prefix must be in [1, K]");
    trace.cascade_prefix = options.cascade_prefix;
  }

  trace.init_steps = static_cast<std::size_t>(policy.init_steps());
  const std::size_t total = trace.init_steps + static_cast<std::size_t>(horizon);
  trace.cum_realized.reserve(total);
  trace.cum_expected.reserve(total);
  if (trace.cascade_prefix) trace.cum_cascade.reserve(total);

  Rng env(derive_seed(seed, "env"));
  const ActionList best = optimal_list(dcm);
  const double best_mean = expected_reward(best, dcm.attraction, dcm.termination);

  const ClickVector* previous = nullptr;
  ClickVector held;
  double cum_realized = 0.0, cum_expected = 0.0, cum_cascade = 0.0;
  for (std::size_t s = 0; s < total; ++s) {
    const ActionList action = policy.step(previous);
    validate_action(action, dcm.item_count(), dcm.positions());
    StepOutcome out = sample_step(dcm, action, env);

    const double star =
        realized_reward(best, out.attraction_draw, out.termination_draw) ? 1.0 : 0.0;
    cum_realized += star - (out.reward ? 1.0 : 0.0);
    trace.cum_realized.push_back(cum_realized);

    cum_expected += best_mean - expected_reward(action, dcm.attraction, dcm.termination);
    trace.cum_expected.push_back(cum_expected);

    if (trace.cascade_prefix) {
      const std::size_t prefix = *trace.cascade_prefix;
      double star_hits = 1.0, got_hits = 1.0;
      for (std::size_t k = 0; k < prefix; ++k) {
        star_hits *= 1.0 - out.attraction_draw[static_cast<std::size_t>(best[k])];
        got_hits *= 1.0 - out.attraction_draw[static_cast<std::size_t>(action[k])];
      }
      cum_cascade += got_hits - star_hits;  // (1 - miss_star) - (1 - miss_action)
      trace.cum_cascade.push_back(cum_cascade);
    }

    held = std::move(out.clicks);
    previous = &held;
  }
  return trace;
}

void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<RegretTrace> run_batch(const DcmInstance& dcm, std::string_view policy_id,
                                   std::int64_t horizon, int runs, std::uint64_t base_seed,
                                   int jobs, const EpisodeOptions& options) {
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  dcm.validate();
  std::vector<RegretTrace> traces(static_cast<std::size_t>(runs));
  const std::string id(policy_id);
  parallel_for(static_cast<std::size_t>(runs), jobs, [&](std::size_t i) {
    const std::uint64_t seed = base_seed + i;
    auto policy = make_policy(id, dcm.item_count(), dcm.positions(), horizon,
                              derive_seed(seed, "policy"));
    traces[i] = run_episode(dcm, *policy, horizon, seed, options);
  });
  return traces;
}

SummaryCurve aggregate(std::span<const RegretTrace> traces, bool include_init,
                       bool expected_mode) {
  if (traces.empty()) throw std::invalid_argument("aggregate: empty trace set");
  const std::size_t total = traces.front().total_steps();
  const std::size_t init = traces.front().init_steps;
  for (const auto& t : traces)
    if (t.total_steps() != total || t.init_steps != init)
      throw std::invalid_argument("aggregate: traces must have equal horizons");

  const std::size_t steps = include_init ? total : total - init;
  SummaryCurve curve;
  curve.runs = traces.size();
  curve.mean.resize(steps);
  curve.sem.resize(steps);
  const double n = static_cast<double>(traces.size());
  std::vector<double> values(traces.size());
  for (std::size_t i = 0; i < steps; ++i) {
    double mean = 0.0;
    for (std::size_t r = 0; r < traces.size(); ++r) {
      const auto& cum = expected_mode ? traces[r].cum_expected : traces[r].cum_realized;
      values[r] = value_at(cum, init, include_init, i);
      mean += values[r];
    }
    mean /= n;
    curve.mean[i] = mean;
    if (traces.size() == 1) {
      curve.sem[i] = 0.0;
    } else {
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      curve.sem[i] = std::sqrt(ss / (n - 1.0) / n);
    }
  }
  return curve;
}

BoundResult theorem1_leading_bound(const DcmInstance& dcm, std::int64_t n, double eps) {
  dcm.validate();
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  for (double v : dcm.termination)
    if (v != dcm.termination.front())
      throw std::invalid_argument("theorem1 needs equal termination probabilities");
  const double gamma = dcm.termination.front();
  const std::size_t item_count = dcm.item_count();
  const std::size_t positions = dcm.positions();
  if (gamma == 0.0 || item_count == positions) return {0.0, false};

  const auto w = sorted_descending(dcm.attraction);
  const double alpha = std::pow(1.0 - w.front(), static_cast<double>(positions - 1));
  BoundResult result;
  double sum = 0.0;
  for (std::size_t e = positions; e < item_count; ++e) {
    const double gap = w[positions - 1] - w[e];
    if (gap <= 0.0) {  // zero gap: the bound's summand diverges
      result.has_infinite_term = true;
      sum = std::numeric_limits<double>::infinity();
      continue;
    }
    sum += gap * (1.0 + std::log(1.0 / gap)) / kl_bernoulli(w[e], w[positions - 1]);
  }
  result.value = gamma / alpha * (1.0 + eps) * sum * exploration_budget(n);
  if (!std::isfinite(result.value)) result.has_infinite_term = true;
  return result;
}

BoundResult theorem2_leading_bound(const DcmInstance& dcm, std::int64_t n, double eps) {
  dcm.validate();
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  const auto& v = dcm.termination;
  for (std::size_t k = 0; k + 1 < v.size(); ++k)
    if (v[k] < v[k + 1])
      throw std::invalid_argument("theorem2 needs descending termination probabilities");

  const std::size_t item_count = dcm.item_count();
  const std::size_t positions = dcm.positions();
  const auto w = sorted_descending(dcm.attraction);
  const double alpha = std::pow(1.0 - w.front(), static_cast<double>(positions - 1));

  BoundResult result;
  double total = 0.0;
  for (std::size_t i = 1; i <= positions; ++i) {
    const double drop = v[i - 1] - (i < positions ? v[i] : 0.0);
    if (drop == 0.0) continue;  // the term vanishes; skip its inner sum
    double inner = 0.0;
    for (std::size_t e = i; e < item_count; ++e) {
      const double gap = w[i - 1] - w[e];
      if (gap <= 0.0) {
        result.has_infinite_term = true;
        inner = std::numeric_limits<double>::infinity();
        continue;
      }
      inner += gap * (1.0 + std::log(1.0 / gap)) / kl_bernoulli(w[e], w[i - 1]);
    }
    total += drop / alpha * (1.0 + eps) * inner * exploration_budget(n);
  }
  result.value = total;
  if (!std::isfinite(result.value)) result.has_infinite_term = true;
  return result;
}

double theorem3_lower_bound(const LbSpec& spec, std::int64_t n) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (spec.gap == 0.0) throw std::invalid_argument("theorem3 needs a positive gap");
  const std::size_t item_count = spec.item_count;
  const std::size_t positions = spec.positions();
  if (item_count == positions || spec.gamma == 0.0) return 0.0;
  const double alpha = std::pow(1.0 - spec.p, static_cast<double>(positions - 1));
  return spec.gamma * alpha * static_cast<double>(item_count - positions) * spec.gap /
         kl_bernoulli(spec.p - spec.gap, spec.p) * std::log(static_cast<double>(n));
}

std::vector<std::int64_t> csv_checkpoints(std::int64_t steps) {
  std::vector<std::int64_t> ts;
  if (steps <= 0) return ts;
  for (std::int64_t t = 1; t <= std::min<std::int64_t>(steps, 1000); ++t) ts.push_back(t);
  for (std::int64_t t = 1100; t <= steps; t += 100) ts.push_back(t);
  if (ts.back() != steps) ts.push_back(steps);
  return ts;
}

void write_trace_csv(std::ostream& out, std::span<const RegretTrace> traces,
                     bool include_init, bool expected_mode) {
  out << "policy,seed,t,cum_regret\n";
  for (const auto& trace : traces) {
    const auto& cum = expected_mode ? trace.cum_expected : trace.cum_realized;
    if (cum.empty()) continue;
    const std::size_t steps =
        include_init ? cum.size() : cum.size() - trace.init_steps;
    for (const std::int64_t t : csv_checkpoints(static_cast<std::int64_t>(steps))) {
      const double value =
          value_at(cum, trace.init_steps, include_init, static_cast<std::size_t>(t - 1));
      out << trace.policy << ',' << trace.seed << ',' << t << ',' << g10(value) << '\n';
    }
  }
}

void write_summary_header(std::ostream& out) { out << "policy,t,mean,sem,runs\n"; }

void write_summary_rows(std::ostream& out, std::string_view policy,
                        const SummaryCurve& curve) {
  for (const std::int64_t t : csv_checkpoints(static_cast<std::int64_t>(curve.mean.size()))) {
    const auto i = static_cast<std::size_t>(t - 1);
    out << policy << ',' << t << ',' << g10(curve.mean[i]) << ',' << g10(curve.sem[i])
        << ',' << curve.runs << '\n';
  }
}

}  // namespace dcmb
