#include <cmath>
#include <numeric>

#include "dcmb/harness.hpp"
#include "dcmb/klucb.hpp"
#include "dcmb/policies.hpp"
#include "dcmb/theory.hpp"
#include "doctest.h"

using namespace dcmb;

namespace {

// Feeds scripted clicks through a policy and returns each proposed list.
std::vector<ActionList> drive(Policy& policy, const std::vector<ClickVector>& feedback) {
  std::vector<ActionList> actions;
  const ClickVector* prev = nullptr;
  for (const auto& clicks : feedback) {
    actions.push_back(policy.step(prev));
    prev = &clicks;
  }
  actions.push_back(policy.step(prev));
  return actions;
}

}  // namespace

TEST_CASE("click filters") {
  CHECK(first_click_filter({0, 1, 1, 0}) == ClickVector{0, 1, 0, 0});
  CHECK(first_click_filter({0, 0, 0, 0}) == ClickVector{0, 0, 0, 0});
  CHECK(first_click_filter({1, 0, 1, 1}) == ClickVector{1, 0, 0, 0});
  CHECK(last_click_filter({0, 1, 1, 0}) == ClickVector{0, 0, 1, 0});
  CHECK(last_click_filter({0, 0, 0, 0}) == ClickVector{0, 0, 0, 0});
  CHECK(last_click_filter({1, 0, 0, 0}) == ClickVector{1, 0, 0, 0});
}

TEST_CASE("select_list ranks items onto positions") {
  {
    const std::vector<double> ucbs{0.1, 0.9, 0.5, 0.7};
    const auto order = identity_order(3);
    CHECK(select_list(ucbs, order) == ActionList{{1, 3, 2}});
  }
  {
    // all ties: lowest item indices in position order
    const std::vector<double> ucbs(5, 0.4);
    CHECK(select_list(ucbs, identity_order(3)) == ActionList{{0, 1, 2}});
  }
  {
    // position 2 is the most terminating, then position 0
    const std::vector<double> ucbs{0.2, 0.8, 0.6};
    const std::vector<std::int32_t> order{2, 0, 1};
    CHECK(select_list(ucbs, order) == ActionList{{2, 0, 1}});
  }
  CHECK_THROWS_AS(select_list(std::vector<double>{0.5}, identity_order(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(select_list(std::vector<double>{0.5, 0.2},
                              std::vector<std::int32_t>{0, 0}),
                  std::invalid_argument);
}

TEST_CASE("select_list output depends on the termination order only") {
  Rng rng(515);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t item_count = 2 + rng.next_u64() % 7;
    const std::size_t positions = 1 + rng.next_u64() % std::min<std::size_t>(4, item_count);
    std::vector<double> ucbs(item_count);
    for (auto& u : ucbs) u = rng.next_double();
    auto order = identity_order(positions);
    for (std::size_t k = positions; k > 1; --k)
      std::swap(order[k - 1], order[rng.next_u64() % k]);

    const ActionList picked = select_list(ucbs, order);
    // any two termination vectors with this order give the same argmax; the
    // achieved value differs but the list does not
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<double> ranked(positions);
      for (auto& v : ranked) v = rng.next_double();
      std::sort(ranked.begin(), ranked.end(), std::greater<double>());
      std::vector<double> consistent(positions);
      for (std::size_t r = 0; r < positions; ++r)
        consistent[static_cast<std::size_t>(order[r])] = ranked[r];
      CHECK(select_list(ucbs, order) == picked);
      CHECK(exhaustive_best_list(ucbs, consistent) == picked);
    }
  }
}

TEST_CASE("dcm-klucb initialization covers every item once") {
  const std::size_t item_count = 6, positions = 3;
  {
    // deterministic clicks: every mean is 1 after initialization
    DcmKlUcbPolicy policy(item_count, positions, {});
    const DcmInstance dcm{std::vector<double>(item_count, 1.0),
                          std::vector<double>(positions, 0.0), true};
    Rng rng(1);
    const ClickVector* prev = nullptr;
    ClickVector held;
    for (std::size_t t = 0; t < item_count; ++t) {
      const ActionList a = policy.step(prev);
      CHECK(a.items[0] == static_cast<std::int32_t>(t));  // item t leads its init list
      validate_action(a, item_count, positions);
      held = sample_step(dcm, a, rng).clicks;
      prev = &held;
    }
    policy.step(prev);  // absorbs the last init sample
    for (std::size_t e = 0; e < item_count; ++e) {
      CHECK(policy.pulls()[e] == 1);
      CHECK(policy.means()[e] == 1.0);
    }
  }
  {
    // binomial check: initialization means average 0.5 over many replays
    const DcmInstance dcm{std::vector<double>(item_count, 0.5),
                          std::vector<double>(positions, 0.5), true};
    Rng rng(77);
    double total = 0.0;
    const int replays = 1000;
    for (int rep = 0; rep < replays; ++rep) {
      DcmKlUcbPolicy policy(item_count, positions, {});
      const ClickVector* prev = nullptr;
      ClickVector held;
      for (std::size_t t = 0; t <= item_count; ++t) {
        const ActionList a = policy.step(prev);
        held = sample_step(dcm, a, rng).clicks;
        prev = &held;
      }
      const auto means = policy.means();
      total += std::accumulate(means.begin(), means.end(), 0.0);
    }
    const double grand_mean = total / (replays * item_count);
    const double se = std::sqrt(0.25 / (replays * item_count));
    CHECK(std::abs(grand_mean - 0.5) <= 3.0 * se);
  }
}

TEST_CASE("dcm-klucb updates exactly the observable prefix") {
  // L = K = 4 so initialization is copy-free to reason about
  DcmKlUcbPolicy policy(4, 4, {});
  std::vector<ClickVector> init_feedback(4, ClickVector{0, 0, 0, 0});
  drive(policy, init_feedback);  // after this, learning has begun

  const auto before = policy.pulls();
  ClickVector clicks{0, 1, 1, 0};
  policy.step(&clicks);
  const auto after = policy.pulls();
  std::int64_t delta = 0;
  for (std::size_t e = 0; e < 4; ++e) delta += after[e] - before[e];
  CHECK(delta == 3);  // positions 1..3 observed, position 4 not

  // no clicks: every displayed item is updated with weight zero
  const auto before2 = policy.pulls();
  const auto succ2 = policy.successes();
  ClickVector none{0, 0, 0, 0};
  policy.step(&none);
  std::int64_t delta2 = 0, dsucc = 0;
  for (std::size_t e = 0; e < 4; ++e) {
    delta2 += policy.pulls()[e] - before2[e];
    dsucc += policy.successes()[e] - succ2[e];
  }
  CHECK(delta2 == 4);
  CHECK(dsucc == 0);
}

TEST_CASE("dcm-klucb running mean arithmetic") {
  // craft a state with T=2, w=1/2 for item 0, then observe a click on it
  DcmKlUcbPolicy policy(2, 2, {});
  std::vector<ClickVector> script;
  script.push_back({1, 0});  // init item 0: success
  script.push_back({0, 0});  // init item 1: miss
  script.push_back({0, 0});  // learning step: item 0 shown first, no clicks
  const auto actions = drive(policy, script);
  CHECK(actions[2].items[0] == 0);  // UCB of item 0 is higher after its init hit
  CHECK(policy.pulls()[0] == 2);
  CHECK(policy.means()[0] == 0.5);

  ClickVector click_first{1, 0};
  policy.step(&click_first);
  CHECK(policy.pulls()[0] == 3);
  CHECK(policy.means()[0] == doctest::Approx(2.0 / 3.0));
  // the running mean times the count stays integral (weights are binary)
  const double product = policy.means()[0] * static_cast<double>(policy.pulls()[0]);
  CHECK(product == doctest::Approx(std::round(product)));
}

TEST_CASE("policy feedback shape is validated") {
  DcmKlUcbPolicy policy(3, 2, {});
  ClickVector wrong{1, 0, 0};
  CHECK_THROWS_AS(policy.step(&wrong), std::logic_error);  // feedback before any action
  policy.step(nullptr);
  CHECK_THROWS_AS(policy.step(&wrong), std::invalid_argument);
}

TEST_CASE("observed weights equal the environment's hidden draws") {
  const DcmInstance dcm{{0.8, 0.5, 0.3, 0.6, 0.1}, {0.7, 0.4, 0.2}, true};
  auto policy = make_policy("dcm-klucb", 5, 3, 1000, 9);
  Rng env(33);
  auto* dcm_policy = dynamic_cast<DcmKlUcbPolicy*>(policy.get());
  REQUIRE(dcm_policy != nullptr);

  const ClickVector* prev = nullptr;
  ClickVector held;
  std::vector<std::int64_t> succ_before;
  ActionList last;
  bool was_init = true;
  for (int t = 0; t < 400; ++t) {
    succ_before = dcm_policy->successes();
    const ActionList action = policy->step(prev);
    // check the absorbed values against the previous outcome's hidden draws
    const StepOutcome out = sample_step(dcm, action, env);
    if (t >= 5 && !was_init) {
      // nothing to re-check here; prefix accounting is verified below
    }
    const std::size_t upto = observed_prefix(out.clicks);
    // fold and verify in the next iteration via direct recomputation
    held = out.clicks;
    prev = &held;
    last = action;
    was_init = t + 1 < 5;
    if (t + 1 >= 5 && !was_init) {
      // verify the upcoming absorption: every value folded must equal the draw
      for (std::size_t k = 0; k < upto; ++k) {
        const auto item = static_cast<std::size_t>(action[k]);
        CHECK(out.clicks[k] == out.attraction_draw[item]);
      }
    }
  }
}

TEST_CASE("all policies emit valid lists on every step") {
  const DcmInstance dcm{{0.4, 0.2, 0.7, 0.1, 0.5, 0.3}, {0.9, 0.6, 0.3}, true};
  for (const auto id : kPolicyIds) {
    auto policy = make_policy(id, dcm.item_count(), dcm.positions(), 300, 11);
    Rng env(1234);
    const ClickVector* prev = nullptr;
    ClickVector held;
    for (int t = 0; t < 300; ++t) {
      const ActionList a = policy->step(prev);
      CHECK_NOTHROW(validate_action(a, dcm.item_count(), dcm.positions()));
      held = sample_step(dcm, a, env).clicks;
      prev = &held;
    }
  }
}

TEST_CASE("make_policy rejects unknown ids") {
  CHECK_THROWS_AS(make_policy("thompson", 4, 2, 100, 1), std::invalid_argument);
}

TEST_CASE("ranked-klucb with one position is a plain KL-UCB bandit") {
  const std::size_t item_count = 5;
  RankedKlUcbPolicy ranked(item_count, 1);

  // reference: a single KL-UCB bandit with lazy optimism, written directly
  std::vector<std::int64_t> pulls(item_count, 0), successes(item_count, 0);
  std::int64_t t = 0;
  const auto reference_pick = [&]() -> std::int32_t {
    ++t;
    double best = -1.0;
    std::int32_t pick = -1;
    for (std::size_t e = 0; e < item_count; ++e) {
      const double u = pulls[e] == 0
                           ? 1.0
                           : klucb_upper(static_cast<double>(successes[e]) /
                                             static_cast<double>(pulls[e]),
                                         pulls[e], t);
      if (u > best) {
        best = u;
        pick = static_cast<std::int32_t>(e);
      }
    }
    return pick;
  };

  Rng clicks_rng(2718);
  const ClickVector* prev = nullptr;
  ClickVector held;
  std::int32_t expected = -1;
  for (int step = 0; step < 400; ++step) {
    const ActionList a = ranked.step(prev);
    expected = reference_pick();
    CHECK(a.items[0] == expected);
    const bool click = clicks_rng.bernoulli(0.3 + 0.1 * (a.items[0] % 3));
    held = ClickVector{static_cast<std::uint8_t>(click)};
    // reference update: single position always observes its slot
    ++pulls[static_cast<std::size_t>(expected)];
    successes[static_cast<std::size_t>(expected)] += click ? 1 : 0;
    prev = &held;
  }
}

TEST_CASE("ranked-klucb resolves duplicate picks to the next best item") {
  // two positions, two items; drive both position bandits to prefer item 0
  RankedKlUcbPolicy ranked(3, 2);
  const ClickVector* prev = nullptr;
  ClickVector held;
  ActionList a = ranked.step(prev);
  // first step: all UCBs are the optimistic 1, ties break to the lowest index
  CHECK(a == ActionList{{0, 1}});
  // reward item 0 at both positions repeatedly
  for (int step = 0; step < 60; ++step) {
    held = ClickVector{1, static_cast<std::uint8_t>(a.items[1] == 0 ? 1 : 0)};
    a = ranked.step(&held);
    CHECK(a.items[0] != a.items[1]);
  }
  // position 0 monopolizes item 0, so position 1 must display its runner-up
  CHECK(a.items[0] == 0);
  CHECK(a.items[1] != 0);
  // the skipped duplicate picks were credited: position 1 holds observations
  // of item 0 despite never displaying it after step one
  CHECK(ranked.pulls(1, 0) > 1);
}

TEST_CASE("ranked-exp3 distributions") {
  const std::size_t item_count = 6;
  {
    RankedExp3Policy exp3(item_count, 3, 10000, 5);
    for (std::size_t k = 0; k < 3; ++k) {
      const auto p = exp3.position_distribution(k);
      for (double e : p) CHECK(e == doctest::Approx(1.0 / item_count));  // uniform start
    }
  }
  {
    // horizon 1 forces eta = 1: pure exploration keeps the distribution uniform
    RankedExp3Policy exp3(item_count, 2, 1, 5);
    CHECK(exp3.exploration_rate() == 1.0);
    const ClickVector* prev = nullptr;
    ClickVector held{1, 1};
    for (int step = 0; step < 200; ++step) {
      exp3.step(prev);
      prev = &held;
    }
    const auto p = exp3.position_distribution(0);
    for (double e : p) CHECK(e == doctest::Approx(1.0 / item_count).epsilon(1e-12));
  }
  {
    // normalization holds after many importance-weighted updates
    RankedExp3Policy exp3(item_count, 2, 100000, 5);
    Rng rng(6);
    const ClickVector* prev = nullptr;
    ClickVector held;
    for (int step = 0; step < 10000; ++step) {
      exp3.step(prev);
      held = ClickVector{static_cast<std::uint8_t>(rng.bernoulli(0.6)),
                         static_cast<std::uint8_t>(rng.bernoulli(0.3))};
      prev = &held;
    }
    for (std::size_t k = 0; k < 2; ++k) {
      const auto p = exp3.position_distribution(k);
      double total = 0.0;
      for (double e : p) {
        CHECK(e > 0.0);
        total += e;
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("baseline filters change what the update sees") {
  // feedback (0,1,1,0): first-click sees prefix 2 with one success,
  // last-click sees prefix 3 whose earlier click is zeroed out
  const auto run_variant = [](ClickFilter filter) {
    DcmKlUcbPolicy policy(4, 4, {}, filter, "probe");
    std::vector<ClickVector> init(4, ClickVector{0, 0, 0, 0});
    drive(policy, init);
    ClickVector clicks{0, 1, 1, 0};
    policy.step(&clicks);
    return std::pair{policy.pulls(), policy.successes()};
  };

  const auto [plain_pulls, plain_succ] = run_variant(ClickFilter::kNone);
  const auto [first_pulls, first_succ] = run_variant(ClickFilter::kFirstOnly);
  const auto [last_pulls, last_succ] = run_variant(ClickFilter::kLastOnly);

  const auto total = [](const std::vector<std::int64_t>& v) {
    return std::accumulate(v.begin(), v.end(), std::int64_t{0});
  };
  CHECK(total(plain_pulls) == 4 + 3);   // init + prefix 3
  CHECK(total(plain_succ) == 2);
  CHECK(total(first_pulls) == 4 + 2);   // filtered prefix ends at the first click
  CHECK(total(first_succ) == 1);
  CHECK(total(last_pulls) == 4 + 3);
  CHECK(total(last_succ) == 1);         // the earlier click is discarded
}
