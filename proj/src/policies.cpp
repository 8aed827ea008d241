#include "dcmb/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "dcmb/klucb.hpp"

namespace dcmb {

namespace {

constexpr double kWeightRescaleCeiling = 1e150;

void require_feedback_shape(const ClickVector& c, std::size_t positions, bool has_action) {
  if (!has_action) throw std::logic_error("feedback arrived before any action was proposed");
  if (c.size() != positions) throw std::invalid_argument("feedback length must equal K");
}

}  // namespace

ClickVector first_click_filter(const ClickVector& c) {
  ClickVector out(c.size(), 0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k]) {
      out[k] = 1;
      break;
    }
  }
  return out;
}

ClickVector last_click_filter(const ClickVector& c) {
  ClickVector out(c.size(), 0);
  if (const auto last = last_click_index(c)) out[*last] = 1;
  return out;
}

std::vector<std::int32_t> identity_order(std::size_t positions) {
  std::vector<std::int32_t> order(positions);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

ActionList select_list(std::span<const double> ucbs,
                       std::span<const std::int32_t> termination_order) {
  const std::size_t positions = termination_order.size();
  if (positions == 0 || positions > ucbs.size())
    throw std::invalid_argument("need 1 <= K <= L");
  {
    std::vector<char> seen(positions, 0);
    for (std::int32_t pos : termination_order) {
      if (pos < 0 || static_cast<std::size_t>(pos) >= positions || seen[pos])
        throw std::invalid_argument("termination_order must be a permutation of positions");
      seen[pos] = 1;
    }
  }
  const auto item_rank = rank_descending(ucbs);
  ActionList a;
  a.items.resize(positions);
  for (std::size_t r = 0; r < positions; ++r)
    a.items[static_cast<std::size_t>(termination_order[r])] = item_rank[r];
  return a;
}

// --- DcmKlUcbPolicy ---------------------------------------------------------

DcmKlUcbPolicy::DcmKlUcbPolicy(std::size_t item_count, std::size_t positions,
                               std::vector<std::int32_t> termination_order,
                               ClickFilter filter, std::string id)
    : item_count_(item_count),
      positions_(positions),
      termination_order_(std::move(termination_order)),
      filter_(filter),
      id_(std::move(id)),
      pulls_(item_count, 0),
      successes_(item_count, 0) {
  if (item_count_ == 0 || positions_ == 0 || positions_ > item_count_)
    throw std::invalid_argument("need 1 <= K <= L");
  if (termination_order_.empty()) termination_order_ = identity_order(positions_);
  if (termination_order_.size() != positions_)
    throw std::invalid_argument("termination_order size must be K");
}

std::vector<double> DcmKlUcbPolicy::means() const {
  std::vector<double> m(item_count_, 0.0);
  for (std::size_t e = 0; e < item_count_; ++e)
    if (pulls_[e] > 0) m[e] = static_cast<double>(successes_[e]) / static_cast<double>(pulls_[e]);
  return m;
}

void DcmKlUcbPolicy::absorb(const ClickVector& clicks) {
  if (last_was_init_) {
    // the first position is always examined, so clicks[0] samples the item's
    // attraction exactly once
    pulls_[static_cast<std::size_t>(last_init_item_)] = 1;
    successes_[static_cast<std::size_t>(last_init_item_)] = clicks[0];
    return;
  }
  ClickVector filtered;
  const ClickVector* feed = &clicks;
  if (filter_ == ClickFilter::kFirstOnly) {
    filtered = first_click_filter(clicks);
    feed = &filtered;
  } else if (filter_ == ClickFilter::kLastOnly) {
    filtered = last_click_filter(clicks);
    feed = &filtered;
  }
  const std::size_t upto = observed_prefix(*feed);
  for (std::size_t k = 0; k < upto; ++k) {
    const auto e = static_cast<std::size_t>(last_action_.items[k]);
    ++pulls_[e];
    successes_[e] += (*feed)[k];
  }
}

ActionList DcmKlUcbPolicy::step(const ClickVector* previous_clicks) {
  if (previous_clicks != nullptr) {
    require_feedback_shape(*previous_clicks, positions_, has_action_);
    absorb(*previous_clicks);
  }
  ActionList a;
  if (init_issued_ < item_count_) {
    // initialization: item t at the first position, the rest cyclic filler
    a.items.resize(positions_);
    for (std::size_t j = 0; j < positions_; ++j)
      a.items[j] = static_cast<std::int32_t>((init_issued_ + j) % item_count_);
    last_was_init_ = true;
    last_init_item_ = static_cast<std::int32_t>(init_issued_);
    ++init_issued_;
  } else {
    last_was_init_ = false;
    ++step_;
    std::vector<double> ucbs(item_count_);
    for (std::size_t e = 0; e < item_count_; ++e)
      ucbs[e] = klucb_upper(
          static_cast<double>(successes_[e]) / static_cast<double>(pulls_[e]),
          pulls_[e], step_);
    a = select_list(ucbs, termination_order_);
  }
  last_action_ = a;
  has_action_ = true;
  return a;
}

// --- RankedKlUcbPolicy ------------------------------------------------------

RankedKlUcbPolicy::RankedKlUcbPolicy(std::size_t item_count, std::size_t positions,
                                     std::string id)
    : item_count_(item_count),
      positions_(positions),
      id_(std::move(id)),
      pulls_(item_count * positions, 0),
      successes_(item_count * positions, 0),
      last_chosen_(positions, -1),
      last_displayed_(positions, -1) {
  if (item_count_ == 0 || positions_ == 0 || positions_ > item_count_)
    throw std::invalid_argument("need 1 <= K <= L");
}

std::int64_t RankedKlUcbPolicy::pulls(std::size_t position, std::size_t item) const {
  return pulls_[position * item_count_ + item];
}

double RankedKlUcbPolicy::ucb(std::size_t position, std::size_t item) const {
  const auto n = pulls_[position * item_count_ + item];
  if (n == 0) return 1.0;  // lazy optimistic initialization
  const auto s = successes_[position * item_count_ + item];
  return klucb_upper(static_cast<double>(s) / static_cast<double>(n), n, step_);
}

ActionList RankedKlUcbPolicy::step(const ClickVector* previous_clicks) {
  if (previous_clicks != nullptr) {
    require_feedback_shape(*previous_clicks, positions_, has_action_);
    const std::size_t upto = observed_prefix(*previous_clicks);
    for (std::size_t k = 0; k < upto; ++k) {
      const auto row = k * item_count_;
      const auto shown = static_cast<std::size_t>(last_displayed_[k]);
      const auto picked = static_cast<std::size_t>(last_chosen_[k]);
      if (picked != shown) ++pulls_[row + picked];  // skipped duplicate pick, reward 0
      ++pulls_[row + shown];
      successes_[row + shown] += (*previous_clicks)[k];
    }
  }
  ++step_;
  ActionList a;
  a.items.resize(positions_);
  std::vector<char> used(item_count_, 0);
  for (std::size_t k = 0; k < positions_; ++k) {
    double best_any = -1.0, best_free = -1.0;
    std::int32_t pick_any = -1, pick_free = -1;
    for (std::size_t e = 0; e < item_count_; ++e) {
      const double u = ucb(k, e);
      if (u > best_any) {
        best_any = u;
        pick_any = static_cast<std::int32_t>(e);
      }
      if (!used[e] && u > best_free) {
        best_free = u;
        pick_free = static_cast<std::int32_t>(e);
      }
    }
    if (pick_free < 0) throw std::logic_error("ranked bandit ran out of items");
    last_chosen_[k] = pick_any;
    last_displayed_[k] = pick_free;
    used[static_cast<std::size_t>(pick_free)] = 1;
    a.items[k] = pick_free;
  }
  has_action_ = true;
  return a;
}

// --- RankedExp3Policy -------------------------------------------------------

RankedExp3Policy::RankedExp3Policy(std::size_t item_count, std::size_t positions,
                                   std::int64_t horizon, std::uint64_t seed,
                                   std::string id)
    : item_count_(item_count),
      positions_(positions),
      id_(std::move(id)),
      weights_(item_count * positions, 1.0),
      rng_(seed),
      last_displayed_(positions, -1),
      last_displayed_prob_(positions, 0.0) {
  if (item_count_ == 0 || positions_ == 0 || positions_ > item_count_)
    throw std::invalid_argument("need 1 <= K <= L");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const double l = static_cast<double>(item_count_);
  const double tuned = std::sqrt(l * std::log(l) /
                                 ((std::exp(1.0) - 1.0) * static_cast<double>(horizon)));
  eta_ = std::min(1.0, tuned);
}

std::vector<double> RankedExp3Policy::position_distribution(std::size_t position) const {
  if (position >= positions_) throw std::out_of_range("position out of range");
  const double* row = weights_.data() + position * item_count_;
  double total = 0.0;
  for (std::size_t e = 0; e < item_count_; ++e) total += row[e];
  std::vector<double> p(item_count_);
  for (std::size_t e = 0; e < item_count_; ++e)
    p[e] = (1.0 - eta_) * row[e] / total + eta_ / static_cast<double>(item_count_);
  return p;
}

ActionList RankedExp3Policy::step(const ClickVector* previous_clicks) {
  if (previous_clicks != nullptr) {
    require_feedback_shape(*previous_clicks, positions_, has_action_);
    const std::size_t upto = observed_prefix(*previous_clicks);
    for (std::size_t k = 0; k < upto; ++k) {
      // a skipped duplicate pick earns reward 0, which leaves its weight as is
      const double reward = (*previous_clicks)[k];
      if (reward <= 0.0) continue;
      const auto row = k * item_count_;
      const auto shown = row + static_cast<std::size_t>(last_displayed_[k]);
      weights_[shown] *= std::exp(eta_ / static_cast<double>(item_count_) *
                                  (reward / last_displayed_prob_[k]));
      if (weights_[shown] > kWeightRescaleCeiling) {
        // rescaling a whole row leaves its sampling distribution unchanged
        double top = 0.0;
        for (std::size_t e = 0; e < item_count_; ++e) top = std::max(top, weights_[row + e]);
        for (std::size_t e = 0; e < item_count_; ++e) weights_[row + e] /= top;
      }
    }
  }
  ActionList a;
  a.items.resize(positions_);
  std::vector<char> used(item_count_, 0);
  for (std::size_t k = 0; k < positions_; ++k) {
    const std::vector<double> p = position_distribution(k);
    std::size_t shown = rng_.categorical(p);
    if (used[shown]) {
      // skip to the heaviest unused item
      const double* row = weights_.data() + k * item_count_;
      double best = -1.0;
      std::size_t pick = 0;
      for (std::size_t e = 0; e < item_count_; ++e) {
        if (!used[e] && row[e] > best) {
          best = row[e];
          pick = e;
        }
      }
      shown = pick;
    }
    used[shown] = 1;
    a.items[k] = static_cast<std::int32_t>(shown);
    last_displayed_[k] = static_cast<std::int32_t>(shown);
    last_displayed_prob_[k] = p[shown];
  }
  has_action_ = true;
  return a;
}

// --- registry ----------------------------------------------------------------

std::unique_ptr<Policy> make_policy(std::string_view id, std::size_t item_count,
                                    std::size_t positions, std::int64_t horizon,
                                    std::uint64_t seed,
                                    std::vector<std::int32_t> termination_order) {
  if (id == "dcm-klucb")
    return std::make_unique<DcmKlUcbPolicy>(item_count, positions,
                                            std::move(termination_order),
                                            ClickFilter::kNone, "dcm-klucb");
  if (id == "first-click")
    return std::make_unique<DcmKlUcbPolicy>(item_count, positions,
                                            std::move(termination_order),
                                            ClickFilter::kFirstOnly, "first-click");
  if (id == "last-click")
    return std::make_unique<DcmKlUcbPolicy>(item_count, positions,
                                            std::move(termination_order),
                                            ClickFilter::kLastOnly, "last-click");
  if (id == "ranked-klucb")
    return std::make_unique<RankedKlUcbPolicy>(item_count, positions);
  if (id == "ranked-exp3")
    return std::make_unique<RankedExp3Policy>(item_count, positions, horizon, seed);
  std::string known;
  for (auto name : kPolicyIds) {
    if (!known.empty()) known += ", ";
    known += name;
  }
  throw std::invalid_argument("unknown policy '" + std::string(id) + "' (known: " + known + ")");
}

}  // namespace dcmb
