#include <cmath>
#include <sstream>

#include "dcmb/dcm.hpp"
#include "dcmb/rng.hpp"
#include "doctest.h"

using namespace dcmb;

namespace {

DcmInstance random_instance(Rng& rng, std::size_t max_items = 8, std::size_t max_positions = 5) {
  DcmInstance dcm;
  const std::size_t item_count = 2 + rng.next_u64() % (max_items - 1);
  const std::size_t positions =
      1 + rng.next_u64() % std::min(max_positions, item_count);
  dcm.attraction.resize(item_count);
  for (auto& w : dcm.attraction) w = rng.next_double();
  dcm.termination.resize(positions);
  for (auto& v : dcm.termination) v = rng.next_double();
  return dcm;
}

ActionList random_action(const DcmInstance& dcm, Rng& rng) {
  auto order = rank_descending(dcm.attraction);
  for (std::size_t k = order.size(); k > 1; --k)
    std::swap(order[k - 1], order[rng.next_u64() % k]);
  ActionList a;
  a.items.assign(order.begin(), order.begin() + static_cast<long>(dcm.positions()));
  return a;
}

}  // namespace

TEST_CASE("or_value basics") {
  CHECK(or_value(std::vector<double>{0.0, 0.0, 0.0}) == 0.0);
  CHECK(or_value(std::vector<double>{1.0, 0.3}) == 1.0);
  CHECK(or_value(std::vector<double>{0.5, 0.5}) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(or_value(std::vector<double>{}) == 0.0);
  CHECK_THROWS_AS(or_value(std::vector<double>{1.2}), std::invalid_argument);
  CHECK_THROWS_AS(or_value(std::vector<double>{-0.1}), std::invalid_argument);
}

TEST_CASE("or_value is bounded by the sum and monotone") {
  Rng rng(7101);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 1 + rng.next_u64() % 8;
    std::vector<double> x(k);
    for (auto& e : x) e = rng.next_double();
    const double v = or_value(x);
    double sum = 0.0;
    for (double e : x) sum += e;
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v <= sum + 1e-12);  // union bound
    // raising one coordinate never lowers the value
    const std::size_t i = rng.next_u64() % k;
    std::vector<double> hi = x;
    hi[i] = hi[i] + (1.0 - hi[i]) * rng.next_double();
    CHECK(or_value(hi) >= v - 1e-15);
  }
}

TEST_CASE("expected_reward closed forms") {
  {
    ActionList a{{0, 1}};
    CHECK(expected_reward(a, std::vector<double>{0.0, 0.0, 0.0},
                          std::vector<double>{0.7, 0.2}) == 0.0);
  }
  {
    ActionList a{{2}};
    std::vector<double> w{0.1, 0.5, 0.3};
    CHECK(expected_reward(a, w, std::vector<double>{1.0}) ==
          doctest::Approx(0.3).epsilon(1e-15));
  }
  {
    ActionList a{{0, 1}};
    std::vector<double> w{0.2, 0.2};
    std::vector<double> v{0.5, 0.5};
    CHECK(expected_reward(a, w, v) == doctest::Approx(0.19).epsilon(1e-15));
  }
  ActionList bad{{0, 0}};
  CHECK_THROWS_AS(expected_reward(bad, std::vector<double>{0.1, 0.2},
                                  std::vector<double>{0.5, 0.5}),
                  std::invalid_argument);
  ActionList out_of_range{{0, 5}};
  CHECK_THROWS_AS(expected_reward(out_of_range, std::vector<double>{0.1, 0.2},
                                  std::vector<double>{0.5, 0.5}),
                  std::out_of_range);
}

TEST_CASE("cascade_reward matches expected_reward with certain termination") {
  ActionList a{{0, 1, 2}};
  std::vector<double> w{0.2, 0.2, 0.2, 0.9};
  CHECK(cascade_reward(a, w, 2) == doctest::Approx(0.36).epsilon(1e-15));
  CHECK(cascade_reward(a, std::vector<double>{0.0, 0.0, 0.0}, 3) == 0.0);
  const std::vector<double> ones(3, 1.0);
  CHECK(cascade_reward(a, w, 3) == doctest::Approx(expected_reward(a, w, ones)));
  CHECK_THROWS_AS(cascade_reward(a, w, 0), std::out_of_range);
  CHECK_THROWS_AS(cascade_reward(a, w, 4), std::out_of_range);
}

TEST_CASE("sample_step degenerate models") {
  Rng rng(11);
  {
    DcmInstance dcm{{0.0, 0.0, 0.0}, {1.0, 1.0}, true};
    ActionList a{{0, 1}};
    for (int i = 0; i < 50; ++i) {
      const StepOutcome out = sample_step(dcm, a, rng);
      CHECK(out.clicks == ClickVector{0, 0});
      CHECK_FALSE(out.reward);
    }
  }
  {
    DcmInstance dcm{{1.0, 0.3, 0.3}, {1.0, 0.5}, true};
    ActionList a{{0, 1}};
    for (int i = 0; i < 50; ++i) {
      const StepOutcome out = sample_step(dcm, a, rng);
      CHECK(out.clicks == ClickVector{1, 0});  // satisfied immediately
      CHECK(out.reward);
    }
  }
}

TEST_CASE("sample_step outcome invariants") {
  Rng rng(2024);
  for (int trial = 0; trial < 400; ++trial) {
    const DcmInstance dcm = random_instance(rng);
    const ActionList a = random_action(dcm, rng);
    const StepOutcome out = sample_step(dcm, a, rng);

    const std::size_t upto = observed_prefix(out.clicks);
    bool satisfied_before = false;
    for (std::size_t k = 0; k < dcm.positions(); ++k) {
      const auto item = static_cast<std::size_t>(a[k]);
      if (out.clicks[k]) CHECK(out.attraction_draw[item] == 1);
      if (satisfied_before) CHECK(out.clicks[k] == 0);
      // within the observable prefix the clicks reveal the attraction draws
      if (k < upto) CHECK(out.clicks[k] == out.attraction_draw[item]);
      if (out.clicks[k] && out.termination_draw[k]) satisfied_before = true;
    }
    CHECK(out.reward ==
          realized_reward(a, out.attraction_draw, out.termination_draw));
  }
}

TEST_CASE("sampled reward mean matches expected_reward") {
  // Monte-Carlo oracle for the reward decomposition
  Rng rng(5150);
  const DcmInstance dcm{{0.7, 0.4, 0.15, 0.6}, {0.8, 0.35, 0.1}, true};
  const ActionList a{{0, 2, 3}};
  const double mean_reward = expected_reward(a, dcm.attraction, dcm.termination);
  const int samples = 100000;
  long hits = 0;
  for (int i = 0; i < samples; ++i)
    if (sample_step(dcm, a, rng).reward) ++hits;
  const double mc = static_cast<double>(hits) / samples;
  const double se = std::sqrt(mean_reward * (1.0 - mean_reward) / samples);
  CHECK(std::abs(mc - mean_reward) <= 3.0 * se);
}

TEST_CASE("sample_step is deterministic given the seed") {
  const DcmInstance dcm{{0.7, 0.4, 0.15, 0.6}, {0.8, 0.35, 0.1}, true};
  const ActionList a{{3, 1, 0}};
  Rng first(42), second(42);
  for (int i = 0; i < 200; ++i) {
    const StepOutcome x = sample_step(dcm, a, first);
    const StepOutcome y = sample_step(dcm, a, second);
    CHECK(x.clicks == y.clicks);
    CHECK(x.reward == y.reward);
    CHECK(x.attraction_draw == y.attraction_draw);
    CHECK(x.termination_draw == y.termination_draw);
  }
}

TEST_CASE("last_click_index and observed_prefix") {
  CHECK(last_click_index({0, 1, 1, 0}) == 2);  // third position
  CHECK_FALSE(last_click_index({0, 0, 0, 0}).has_value());
  CHECK(last_click_index({1, 0, 0, 0}) == 0);
  CHECK(observed_prefix({0, 1, 1, 0}) == 3);
  CHECK(observed_prefix({0, 0, 0, 0}) == 4);  // no click reveals everything
  CHECK(observed_prefix({1, 0, 0, 0}) == 1);
}

TEST_CASE("optimal_list basics") {
  {
    DcmInstance dcm{{0.9, 0.1, 0.1}, {1.0, 0.5}, true};
    CHECK(optimal_list(dcm) == ActionList{{0, 1}});
  }
  {
    // most attractive item goes to the most terminating position
    DcmInstance dcm{{0.9, 0.2}, {0.3, 0.8}, false};
    CHECK(optimal_list(dcm) == ActionList{{1, 0}});
  }
}

TEST_CASE("optimal_list only depends on the termination order") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    DcmInstance dcm = random_instance(rng);
    const ActionList base = optimal_list(dcm);
    // squash the termination values while keeping their relative order
    DcmInstance other = dcm;
    const auto rank = rank_descending(dcm.termination);
    for (std::size_t r = 0; r < rank.size(); ++r)
      other.termination[static_cast<std::size_t>(rank[r])] =
          1.0 - static_cast<double>(r) / static_cast<double>(rank.size() + 1);
    CHECK(optimal_list(other) == base);
  }
}

TEST_CASE("instance serialization round-trips bit-exactly") {
  Rng rng(31337);
  for (int trial = 0; trial < 100; ++trial) {
    const DcmInstance dcm = random_instance(rng);
    std::stringstream buffer;
    save_instance(buffer, dcm);
    const DcmInstance back = load_instance(buffer);
    REQUIRE(back.item_count() == dcm.item_count());
    REQUIRE(back.positions() == dcm.positions());
    CHECK(back.order_known == dcm.order_known);
    for (std::size_t e = 0; e < dcm.item_count(); ++e)
      CHECK(back.attraction[e] == dcm.attraction[e]);
    for (std::size_t k = 0; k < dcm.positions(); ++k)
      CHECK(back.termination[k] == dcm.termination[k]);
  }
}

TEST_CASE("instance parsing rejects malformed documents") {
  std::stringstream missing("dcmb-instance v1\nL 2\nK 1\n");
  CHECK_THROWS_AS(load_instance(missing), std::runtime_error);
  std::stringstream bad_header("instance\nL 2\n");
  CHECK_THROWS_AS(load_instance(bad_header), std::runtime_error);
  std::stringstream bad_range(
      "dcmb-instance v1\nL 1\nK 1\norder_known 0\nattraction 1.5\ntermination 0.5\n");
  CHECK_THROWS_AS(load_instance(bad_range), std::invalid_argument);
}

TEST_CASE("instance validation") {
  DcmInstance too_many_positions{{0.5}, {0.5, 0.5}, false};
  CHECK_THROWS_AS(too_many_positions.validate(), std::invalid_argument);
  DcmInstance misordered{{0.5, 0.5}, {0.2, 0.8}, true};
  CHECK_THROWS_AS(misordered.validate(), std::invalid_argument);
  DcmInstance fine{{0.5, 0.5}, {0.2, 0.8}, false};
  CHECK_NOTHROW(fine.validate());
}
