#include "dcmb/clicklog.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dcmb {

namespace {

bool parse_int(std::string_view text, std::int64_t& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

// splits a space-separated field into exactly kSessionPositions tokens
bool split_field(std::string_view field, std::array<std::string_view, kSessionPositions>& out) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while (pos < field.size()) {
    while (pos < field.size() && field[pos] == ' ') ++pos;
    if (pos >= field.size()) break;
    const std::size_t start = pos;
    while (pos < field.size() && field[pos] != ' ') ++pos;
    if (count == kSessionPositions) return false;
    out[count++] = field.substr(start, pos - start);
  }
  return count == kSessionPositions;
}

std::string parse_session_line(std::string_view line, Session& session) {
  std::array<std::string_view, 3> fields;
  std::size_t count = 0;
  std::size_t pos = 0;
  while (true) {
    const std::size_t tab = line.find('\t', pos);
    const std::string_view field =
        tab == std::string_view::npos ? line.substr(pos) : line.substr(pos, tab - pos);
    if (count == 3) return "expected 3 tab-separated fields";
    fields[count++] = field;
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  if (count != 3) return "expected 3 tab-separated fields";

  if (!parse_int(fields[0], session.query_id)) return "query id is not an integer";

  std::array<std::string_view, kSessionPositions> tokens;
  if (!split_field(fields[1], tokens))
    return "expected 10 item ids";
  for (std::size_t k = 0; k < kSessionPositions; ++k) {
    std::int64_t id = 0;
    if (!parse_int(tokens[k], id)) return "item id is not an integer";
    session.items[k] = static_cast<std::int32_t>(id);
  }
  for (std::size_t k = 0; k < kSessionPositions; ++k)
    for (std::size_t j = k + 1; j < kSessionPositions; ++j)
      if (session.items[k] == session.items[j]) return "item ids must be distinct";

  if (!split_field(fields[2], tokens))
    return "expected 10 click flags";
  for (std::size_t k = 0; k < kSessionPositions; ++k) {
    if (tokens[k] == "0")
      session.clicks[k] = 0;
    else if (tokens[k] == "1")
      session.clicks[k] = 1;
    else
      return "click flags must be 0 or 1";
  }
  return {};
}

}  // namespace

ParseResult parse_log(std::istream& in, bool strict) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Session session;
    const std::string problem = parse_session_line(line, session);
    if (problem.empty()) {
      result.sessions.push_back(session);
    } else if (strict) {
      throw std::runtime_error("click log line " + std::to_string(line_no) + ": " + problem);
    } else {
      result.skipped.push_back({line_no, problem});
    }
  }
  return result;
}

void write_log(std::ostream& out, std::span<const Session> sessions) {
  for (const Session& s : sessions) {
    out << s.query_id << '\t';
    for (std::size_t k = 0; k < kSessionPositions; ++k) {
      if (k) out << ' ';
      out << s.items[k];
    }
    out << '\t';
    for (std::size_t k = 0; k < kSessionPositions; ++k) {
      if (k) out << ' ';
      out << static_cast<int>(s.clicks[k]);
    }
    out << '\n';
  }
}

std::vector<Session> generate_log(const DcmInstance& dcm, const ActionList& display,
                                  std::int64_t sessions, std::uint64_t seed,
                                  std::int64_t query_id) {
  dcm.validate();
  if (dcm.positions() != kSessionPositions)
    throw std::invalid_argument("session logs need a 10-position model");
  validate_action(display, dcm.item_count(), dcm.positions());
  if (sessions < 0) throw std::invalid_argument("session count must be >= 0");

  std::vector<Session> log;
  log.reserve(static_cast<std::size_t>(sessions));
  Rng rng(derive_seed(seed, "session-log"));
  for (std::int64_t i = 0; i < sessions; ++i) {
    const StepOutcome out = sample_step(dcm, display, rng);
    Session s;
    s.query_id = query_id;
    for (std::size_t k = 0; k < kSessionPositions; ++k) {
      s.items[k] = display.items[k] + 1;  // ids are written 1-based
      s.clicks[k] = out.clicks[k];
    }
    log.push_back(s);
  }
  return log;
}

EstimatedDcm estimate_dcm(std::span<const Session> sessions) {
  if (sessions.empty()) throw std::invalid_argument("estimate_dcm: no sessions");
  const std::int64_t query = sessions.front().query_id;
  for (const Session& s : sessions)
    if (s.query_id != query)
      throw std::invalid_argument("estimate_dcm: sessions span multiple queries");

  EstimatedDcm est;
  est.query_id = query;
  est.sessions = static_cast<std::int64_t>(sessions.size());
  for (const Session& s : sessions)
    est.item_ids.insert(est.item_ids.end(), s.items.begin(), s.items.end());
  std::sort(est.item_ids.begin(), est.item_ids.end());
  est.item_ids.erase(std::unique(est.item_ids.begin(), est.item_ids.end()),
                     est.item_ids.end());
  const auto index_of = [&](std::int32_t id) -> std::size_t {
    return static_cast<std::size_t>(
        std::lower_bound(est.item_ids.begin(), est.item_ids.end(), id) -
        est.item_ids.begin());
  };

  const std::size_t item_count = est.item_ids.size();
  est.item_examined.assign(item_count, 0);
  est.item_clicked.assign(item_count, 0);
  est.position_click_sessions.assign(kSessionPositions, 0);
  est.position_last_click_sessions.assign(kSessionPositions, 0);

  for (const Session& s : sessions) {
    std::size_t last = kSessionPositions;  // sentinel: no click
    for (std::size_t k = kSessionPositions; k > 0; --k) {
      if (s.clicks[k - 1]) {
        last = k - 1;
        break;
      }
    }
    // examined prefix: through the last click, or the whole page without one
    const std::size_t examined = last == kSessionPositions ? kSessionPositions : last + 1;
    for (std::size_t k = 0; k < examined; ++k) {
      const std::size_t e = index_of(s.items[k]);
      ++est.item_examined[e];
      est.item_clicked[e] += s.clicks[k];
    }
    if (last != kSessionPositions) {
      ++est.position_last_click_sessions[last];
      for (std::size_t k = 0; k < kSessionPositions; ++k)
        if (s.clicks[k]) ++est.position_click_sessions[k];
    }
  }

  est.instance.attraction.assign(item_count, 0.0);
  est.item_low_confidence.assign(item_count, 0);
  for (std::size_t e = 0; e < item_count; ++e) {
    if (est.item_examined[e] > 0)
      est.instance.attraction[e] = static_cast<double>(est.item_clicked[e]) /
                                   static_cast<double>(est.item_examined[e]);
    else
      est.item_low_confidence[e] = 1;
  }
  est.instance.termination.assign(kSessionPositions, 0.0);
  est.position_low_confidence.assign(kSessionPositions, 0);
  for (std::size_t k = 0; k < kSessionPositions; ++k) {
    if (est.position_click_sessions[k] > 0)
      est.instance.termination[k] =
          static_cast<double>(est.position_last_click_sessions[k]) /
          static_cast<double>(est.position_click_sessions[k]);
    else
      est.position_low_confidence[k] = 1;
  }
  est.instance.order_known = false;
  est.instance.validate();
  return est;
}

std::vector<EstimatedDcm> estimate_per_query(std::span<const Session> sessions) {
  std::map<std::int64_t, std::vector<Session>> grouped;
  for (const Session& s : sessions) grouped[s.query_id].push_back(s);
  std::vector<EstimatedDcm> out;
  out.reserve(grouped.size());
  for (const auto& [query, group] : grouped) out.push_back(estimate_dcm(group));
  return out;
}

std::vector<PolicyReplayResult> replay(std::span<const EstimatedDcm> queries,
                                       const ReplayConfig& config) {
  if (queries.empty()) throw std::invalid_argument("replay: no estimated queries");
  if (config.recommend < 1 || config.recommend > kSessionPositions)
    throw std::invalid_argument("replay: recommend must be in [1, 10]");
  if (config.runs_per_query < 1) throw std::invalid_argument("replay: need runs >= 1");
  if (config.horizon < 0) throw std::invalid_argument("replay: horizon must be >= 0");
  if (config.policy_ids.empty()) throw std::invalid_argument("replay: no policies");

  // each estimated model, truncated to the first `recommend` positions, is
  // the ground truth of its query
  std::vector<DcmInstance> instances;
  instances.reserve(queries.size());
  for (const EstimatedDcm& est : queries) {
    DcmInstance dcm = est.instance;
    if (config.recommend > dcm.item_count())
      throw std::invalid_argument("replay: recommend exceeds a query's item count");
    dcm.termination.resize(config.recommend);
    dcm.order_known = false;
    dcm.validate();
    instances.push_back(std::move(dcm));
  }

  std::vector<PolicyReplayResult> results;
  for (const std::string& policy_id : config.policy_ids) {
    const std::size_t runs =
        queries.size() * static_cast<std::size_t>(config.runs_per_query);
    std::vector<RegretTrace> traces(runs);
    parallel_for(runs, config.jobs, [&](std::size_t i) {
      const std::size_t query = i / static_cast<std::size_t>(config.runs_per_query);
      const std::uint64_t seed = config.base_seed + i;
      const DcmInstance& dcm = instances[query];
      auto policy = make_policy(policy_id, dcm.item_count(), dcm.positions(),
                                config.horizon, derive_seed(seed, "policy"));
      traces[i] = run_episode(dcm, *policy, config.horizon, seed);
    });
    PolicyReplayResult result;
    result.policy = policy_id;
    if (config.horizon > 0)
      result.curve = aggregate(traces, config.include_init, config.expected_mode);
    else
      result.curve.runs = runs;  // empty traces stay empty curves
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace dcmb
