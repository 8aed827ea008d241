#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dcmb/rng.hpp"

namespace dcmb {

// Binary click feedback, one entry per recommended position. This is the only
// observation a learning policy ever receives.
using ClickVector = std::vector<std::uint8_t>;

// A ranked recommendation: distinct 0-based item indices, first position first.
struct ActionList {
  std::vector<std::int32_t> items;

  std::size_t size() const { return items.size(); }
  std::int32_t operator[](std::size_t k) const { return items[k]; }

  friend bool operator==(const ActionList&, const ActionList&) = default;
};

// Throws unless `a` holds `positions` distinct indices into [0, item_count).
void validate_action(const ActionList& a, std::size_t item_count, std::size_t positions);

/// Ground-truth dependent click model: per-item attraction probabilities and
/// per-position termination probabilities, all conditional on examination.
struct DcmInstance {
  std::vector<double> attraction;   // size L, entries in [0,1]
  std::vector<double> termination;  // size K <= L, entries in [0,1]
  // Asserts the positions are indexed so termination[0] >= ... >= termination[K-1].
  bool order_known = false;

  std::size_t item_count() const { return attraction.size(); }
  std::size_t positions() const { return termination.size(); }
  void validate() const;  // throws std::invalid_argument on a bad instance
};

// One interaction. Policies may look at `clicks` only; the hidden draws are
// retained so tests and the regret accounting can evaluate counterfactuals on
// the same realization.
struct StepOutcome {
  ClickVector clicks;                          // per position
  bool reward = false;                         // hidden
  std::vector<std::uint8_t> attraction_draw;   // per item, hidden
  std::vector<std::uint8_t> termination_draw;  // per position, hidden
};

// 1 - prod_k (1 - x_k), the probability that at least one of K independent
// events fires. Entries must lie in [0,1].
double or_value(std::span<const double> x);

// 1 - prod_k (1 - v(k) * w(a_k)): the chance list `a` satisfies the user.
double expected_reward(const ActionList& a, std::span<const double> w,
                       std::span<const double> v);

// or_value over the attraction of the first `prefix` entries of `a`.
double cascade_reward(const ActionList& a, std::span<const double> w, std::size_t prefix);

// Samples one interaction: independent Bernoulli attraction/termination draws,
// then a top-down scan that clicks every attractive item and stops, satisfied,
// at the first attractive item whose position terminates. Deterministic given
// the rng state.
StepOutcome sample_step(const DcmInstance& dcm, const ActionList& a, Rng& rng);

// 0-based index of the last click; nullopt when there is none (the "no click"
// case the model treats as an unbounded last-click position).
std::optional<std::size_t> last_click_index(const ClickVector& c);

// Number of leading positions whose attraction draws are revealed by `c`:
// up to the last click, or all positions when there is no click.
std::size_t observed_prefix(const ClickVector& c);

// Expected-reward argmax: k-th most attractive item at the k-th most
// terminating position. Ties break to the lowest item / position index.
ActionList optimal_list(const DcmInstance& dcm);

// Reward of `a` under fixed binary draws.
bool realized_reward(const ActionList& a, std::span<const std::uint8_t> attraction_draw,
                     std::span<const std::uint8_t> termination_draw);

// Item indices sorted by descending value, ties to the lowest index.
std::vector<std::int32_t> rank_descending(std::span<const double> values);

// Key-value text serialization; doubles are written with enough digits to
// round-trip bit-exactly.
void save_instance(std::ostream& out, const DcmInstance& dcm);
DcmInstance load_instance(std::istream& in);

}  // namespace dcmb
