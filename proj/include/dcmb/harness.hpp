#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcmb/dcm.hpp"
#include "dcmb/policies.hpp"

namespace dcmb {

// Parametric lower-bound problem family: optimal items share attraction p,
// the rest sit at p - gap, and every position terminates with probability
// gamma.
struct LbSpec {
  std::size_t item_count = 0;               // L
  std::vector<std::int32_t> optimal_items;  // distinct 0-based indices; size K
  double p = 0.0;
  double gap = 0.0;  // 0 <= gap <= p; zero is degenerate (warned)
  double gamma = 0.0;

  std::size_t positions() const { return optimal_items.size(); }
  void validate() const;
};

DcmInstance make_lb_instance(const LbSpec& spec);

struct EpisodeOptions {
  // When set, also trace the realized cascade regret for this prefix length.
  std::optional<std::size_t> cascade_prefix;
};

// Per-step cumulative regret of one seeded run. Initialization steps are
// always recorded; init_steps marks how many leading entries they occupy so
// consumers can include or drop them.
struct RegretTrace {
  std::string policy;
  std::uint64_t seed = 0;
  std::size_t init_steps = 0;
  std::vector<double> cum_realized;  // f(A*,w_t,v_t) - f(A_t,w_t,v_t), realized draws
  std::vector<double> cum_expected;  // f(A*,w,v) - f(A_t,w,v), conditional mean
  std::vector<double> cum_cascade;   // empty unless cascade_prefix was set
  std::optional<std::size_t> cascade_prefix;

  std::size_t total_steps() const { return cum_realized.size(); }
  double final_regret(bool include_init, bool expected_mode) const;
};

// Runs the interaction loop: the policy proposes, the environment samples,
// the policy sees clicks only. Regret is evaluated on the hidden draws of the
// same step. Deterministic given the seed ("env" and "policy" substreams).
RegretTrace run_episode(const DcmInstance& dcm, Policy& policy, std::int64_t horizon,
                        std::uint64_t seed, const EpisodeOptions& options = {});

// Fans runs out across seeds base_seed, base_seed+1, ...; each run gets a
// fresh policy built from policy_id. jobs <= 0 means hardware concurrency.
std::vector<RegretTrace> run_batch(const DcmInstance& dcm, std::string_view policy_id,
                                   std::int64_t horizon, int runs, std::uint64_t base_seed,
                                   int jobs = 0, const EpisodeOptions& options = {});

struct SummaryCurve {
  std::vector<double> mean;  // pointwise mean cumulative regret
  std::vector<double> sem;   // standard error of that mean
  std::size_t runs = 0;

  double final_mean() const { return mean.empty() ? 0.0 : mean.back(); }
  double final_sem() const { return sem.empty() ? 0.0 : sem.back(); }
};

// Pointwise mean and standard error across traces of equal shape. With
// include_init false the curves restart at zero after the init steps.
SummaryCurve aggregate(std::span<const RegretTrace> traces, bool include_init = false,
                       bool expected_mode = false);

// Closed-form leading logarithmic terms of the regret bounds. The additive
// constant that depends on externally defined quantities is excluded, and a
// flag reports infinite contributions from zero attraction gaps.
struct BoundResult {
  double value = 0.0;
  bool has_infinite_term = false;
};

// Equal termination probabilities required.
BoundResult theorem1_leading_bound(const DcmInstance& dcm, std::int64_t n, double eps);
// Descending termination probabilities required; reduces to theorem1 when
// they are constant.
BoundResult theorem2_leading_bound(const DcmInstance& dcm, std::int64_t n, double eps);
// Asymptotic lower bound for any consistent algorithm on the LbSpec family.
double theorem3_lower_bound(const LbSpec& spec, std::int64_t n);

// Step indices kept in CSV output: every step up to 10^3, then every 10^2
// steps, and always the last one.
std::vector<std::int64_t> csv_checkpoints(std::int64_t steps);

// Trace CSV: policy,seed,t,cum_regret (subsampled per csv_checkpoints).
void write_trace_csv(std::ostream& out, std::span<const RegretTrace> traces,
                     bool include_init = false, bool expected_mode = false);

// Summary CSV: policy,t,mean,sem,runs.
void write_summary_header(std::ostream& out);
void write_summary_rows(std::ostream& out, std::string_view policy,
                        const SummaryCurve& curve);

// Runs body(0..count-1) on up to `jobs` worker threads (jobs <= 0: hardware
// concurrency). Rethrows the first exception after all workers join.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace dcmb
