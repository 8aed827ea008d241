#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcmb/dcm.hpp"
#include "dcmb/rng.hpp"

namespace dcmb {

// Keeps only the earliest click.
ClickVector first_click_filter(const ClickVector& c);
// Keeps only the latest click.
ClickVector last_click_filter(const ClickVector& c);

// Rank-for-rank matching: the item with the k-th largest UCB goes to
// termination_order[k], the k-th most terminating position. Item ties break
// to the lowest index. Equals the exhaustive expected-reward argmax for any
// termination vector consistent with the order.
ActionList select_list(std::span<const double> ucbs,
                       std::span<const std::int32_t> termination_order);

std::vector<std::int32_t> identity_order(std::size_t positions);

// Feedback-in/action-out learner. The episode loop owns the environment: it
// calls step() with the clicks observed for the previously proposed list
// (nullptr on the first call) and displays whatever comes back.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual ActionList step(const ClickVector* previous_clicks) = 0;
  // Leading forced-exploration steps this policy takes before learning.
  virtual std::int64_t init_steps() const { return 0; }
  virtual const std::string& id() const = 0;
};

enum class ClickFilter { kNone, kFirstOnly, kLastOnly };

// KL-UCB list policy for the dependent click model. Runs L initialization
// steps (item t at the first position, remaining slots filled cyclically),
// then per step: fold the previous clicks into the per-item statistics up to
// the observable prefix, recompute the KL-UCB of every item, and place items
// by UCB rank onto positions by termination rank. The first-click / last-click
// variants apply their filter to the feedback before the update.
class DcmKlUcbPolicy final : public Policy {
 public:
  DcmKlUcbPolicy(std::size_t item_count, std::size_t positions,
                 std::vector<std::int32_t> termination_order,
                 ClickFilter filter = ClickFilter::kNone,
                 std::string id = "dcm-klucb");

  ActionList step(const ClickVector* previous_clicks) override;
  std::int64_t init_steps() const override { return static_cast<std::int64_t>(item_count_); }
  const std::string& id() const override { return id_; }

  // observation statistics, exposed for verification
  const std::vector<std::int64_t>& pulls() const { return pulls_; }
  const std::vector<std::int64_t>& successes() const { return successes_; }
  std::vector<double> means() const;
  std::int64_t current_step() const { return step_; }

 private:
  void absorb(const ClickVector& clicks);

  std::size_t item_count_;
  std::size_t positions_;
  std::vector<std::int32_t> termination_order_;
  ClickFilter filter_;
  std::string id_;
  std::vector<std::int64_t> pulls_;
  std::vector<std::int64_t> successes_;
  std::int64_t step_ = 0;        // learning-phase step index t
  std::size_t init_issued_ = 0;  // initialization lists proposed so far
  bool last_was_init_ = false;
  std::int32_t last_init_item_ = -1;
  ActionList last_action_;
  bool has_action_ = false;
};

// One KL-UCB bandit per position, choosing greedily from the top position
// down; an item already taken above is skipped and the next-best shown. The
// skipped pick is credited zero reward, the shown item gets its click, and
// positions past the observable prefix get no update. Unobserved arms are
// optimistic (UCB 1), so initialization is lazy.
class RankedKlUcbPolicy final : public Policy {
 public:
  RankedKlUcbPolicy(std::size_t item_count, std::size_t positions,
                    std::string id = "ranked-klucb");

  ActionList step(const ClickVector* previous_clicks) override;
  const std::string& id() const override { return id_; }

  std::int64_t pulls(std::size_t position, std::size_t item) const;

 private:
  double ucb(std::size_t position, std::size_t item) const;

  std::size_t item_count_;
  std::size_t positions_;
  std::string id_;
  std::vector<std::int64_t> pulls_;      // positions x items
  std::vector<std::int64_t> successes_;  // positions x items
  std::int64_t step_ = 0;
  std::vector<std::int32_t> last_chosen_;
  std::vector<std::int32_t> last_displayed_;
  bool has_action_ = false;
};

// One Exp3 bandit per position. Sampling distribution mixes the normalized
// weights with uniform exploration; the shown item's weight is scaled by
// exp(eta/L * click/p). Duplicates are resolved as in RankedKlUcbPolicy with
// zero reward credited to the skipped pick (a weight no-op).
class RankedExp3Policy final : public Policy {
 public:
  // horizon fixes the exploration rate eta = min{1, sqrt(L ln L / ((e-1) n))}.
  RankedExp3Policy(std::size_t item_count, std::size_t positions,
                   std::int64_t horizon, std::uint64_t seed,
                   std::string id = "ranked-exp3");

  ActionList step(const ClickVector* previous_clicks) override;
  const std::string& id() const override { return id_; }

  double exploration_rate() const { return eta_; }
  std::vector<double> position_distribution(std::size_t position) const;

 private:
  std::size_t item_count_;
  std::size_t positions_;
  std::string id_;
  double eta_;
  std::vector<double> weights_;  // positions x items, strictly positive
  Rng rng_;
  std::vector<std::int32_t> last_displayed_;
  std::vector<double> last_displayed_prob_;
  bool has_action_ = false;
};

inline constexpr std::array<std::string_view, 5> kPolicyIds = {
    "dcm-klucb", "first-click", "last-click", "ranked-klucb", "ranked-exp3"};

// Builds a policy from its CLI identifier. An empty termination order means
// the identity (positions already ranked most-terminating first). `horizon`
// and `seed` are only consumed by policies that need them (ranked-exp3).
std::unique_ptr<Policy> make_policy(std::string_view id, std::size_t item_count,
                                    std::size_t positions, std::int64_t horizon,
                                    std::uint64_t seed,
                                    std::vector<std::int32_t> termination_order = {});

}  // namespace dcmb
