#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dcmb/dcm.hpp"
#include "dcmb/harness.hpp"

namespace dcmb {

// Search sessions present a fixed-length result page.
inline constexpr std::size_t kSessionPositions = 10;

// One logged search session: a results page of ten distinct item ids and the
// aligned binary click flags.
struct Session {
  std::int64_t query_id = 0;
  std::array<std::int32_t, kSessionPositions> items{};
  std::array<std::uint8_t, kSessionPositions> clicks{};

  friend bool operator==(const Session&, const Session&) = default;
};

struct ParseIssue {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct ParseResult {
  std::vector<Session> sessions;
  std::vector<ParseIssue> skipped;  // empty in strict mode (first issue throws)
};

// Streaming parse of tab-separated lines: query_id, ten item ids, ten binary
// click flags. Lenient mode skips malformed lines and reports them with line
// numbers; strict mode throws on the first one.
ParseResult parse_log(std::istream& in, bool strict = false);

void write_log(std::ostream& out, std::span<const Session> sessions);

// Samples sessions of the fixed display list from a ground-truth model.
// Item ids in the log are written 1-based. Deterministic given the seed.
std::vector<Session> generate_log(const DcmInstance& dcm, const ActionList& display,
                                  std::int64_t sessions, std::uint64_t seed,
                                  std::int64_t query_id);

// One estimated model per query, with the counts behind the estimates.
// Estimation uses the last-click examination rule: positions up to the last
// click are examined; sessions with no clicks count all ten as examined.
// The termination estimate v(k) = P(last click at k | click at k) conflates
// termination with abandonment and is approximate by construction.
struct EstimatedDcm {
  std::int64_t query_id = 0;
  std::vector<std::int32_t> item_ids;  // sorted distinct ids; index = item in `instance`
  DcmInstance instance;                // L = |item_ids|, K = 10, order_known = false

  std::vector<std::int64_t> item_examined;
  std::vector<std::int64_t> item_clicked;
  std::vector<std::int64_t> position_click_sessions;      // sessions with a click at k
  std::vector<std::int64_t> position_last_click_sessions; // sessions whose last click is k
  std::vector<std::uint8_t> item_low_confidence;          // zero-denominator items
  std::vector<std::uint8_t> position_low_confidence;      // zero-denominator positions
  std::int64_t sessions = 0;
};

// All sessions must share one query id.
EstimatedDcm estimate_dcm(std::span<const Session> sessions);

// Groups sessions by query id (ascending) and estimates each.
std::vector<EstimatedDcm> estimate_per_query(std::span<const Session> sessions);

struct ReplayConfig {
  std::vector<std::string> policy_ids = {"dcm-klucb", "ranked-klucb", "ranked-exp3"};
  std::size_t recommend = 5;  // list length K <= 10 used for the replay
  std::int64_t horizon = 10000;
  int runs_per_query = 5;
  std::uint64_t base_seed = 1;
  int jobs = 0;
  bool include_init = false;
  bool expected_mode = false;
};

struct PolicyReplayResult {
  std::string policy;
  SummaryCurve curve;  // aggregated over queries x runs
};

// Treats each estimated model as ground truth, truncated to the first
// `recommend` positions, and replays the configured policies on it. Policies
// assume positions are already ordered most-terminating first, which the
// estimates need not satisfy; regret is measured against each query's true
// optimum under its estimated parameters.
std::vector<PolicyReplayResult> replay(std::span<const EstimatedDcm> queries,
                                       const ReplayConfig& config);

}  // namespace dcmb
