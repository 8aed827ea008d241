#include "dcmb/dcm.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dcmb {

namespace {

void require_unit(std::span<const double> v, const char* name) {
  for (double e : v)
    if (!(e >= 0.0 && e <= 1.0))
      throw std::invalid_argument(std::string(name) + " entries must be in [0,1]");
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void validate_action(const ActionList& a, std::size_t item_count, std::size_t positions) {
  if (a.items.size() != positions)
    throw std::invalid_argument("action list length must equal the number of positions");
  std::vector<char> seen(item_count, 0);
  for (std::int32_t e : a.items) {
    if (e < 0 || static_cast<std::size_t>(e) >= item_count)
      throw std::out_of_range("action list item index out of range");
    if (seen[static_cast<std::size_t>(e)])
      throw std::invalid_argument("action list items must be distinct");
    seen[static_cast<std::size_t>(e)] = 1;
  }
}

void DcmInstance::validate() const {
  if (attraction.empty()) throw std::invalid_argument("instance needs at least one item");
  if (termination.empty()) throw std::invalid_argument("instance needs at least one position");
  if (termination.size() > attraction.size())
    throw std::invalid_argument("positions K must not exceed item count L");
  require_unit(attraction, "attraction");
  require_unit(termination, "termination");
  if (order_known) {
    for (std::size_t k = 0; k + 1 < termination.size(); ++k)
      if (termination[k] < termination[k + 1])
        throw std::invalid_argument("order_known set but termination is not descending");
  }
}

double or_value(std::span<const double> x) {
  require_unit(x, "or_value");
  double miss = 1.0;
  for (double e : x) miss *= 1.0 - e;
  return 1.0 - miss;
}

double expected_reward(const ActionList& a, std::span<const double> w,
                       std::span<const double> v) {
  validate_action(a, w.size(), v.size());
  require_unit(w, "attraction");
  require_unit(v, "termination");
  double miss = 1.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    miss *= 1.0 - v[k] * w[static_cast<std::size_t>(a[k])];
  return 1.0 - miss;
}

double cascade_reward(const ActionList& a, std::span<const double> w, std::size_t prefix) {
  if (prefix < 1 || prefix > a.size())
    throw std::out_of_range("cascade prefix must be in [1, K]");
  require_unit(w, "attraction");
  double miss = 1.0;
  for (std::size_t k = 0; k < prefix; ++k) {
    const auto e = a[k];
    if (e < 0 || static_cast<std::size_t>(e) >= w.size())
      throw std::out_of_range("action list item index out of range");
    miss *= 1.0 - w[static_cast<std::size_t>(e)];
  }
  return 1.0 - miss;
}

StepOutcome sample_step(const DcmInstance& dcm, const ActionList& a, Rng& rng) {
  dcm.validate();
  validate_action(a, dcm.item_count(), dcm.positions());
  StepOutcome out;
  out.attraction_draw.resize(dcm.item_count());
  for (std::size_t e = 0; e < dcm.item_count(); ++e)
    out.attraction_draw[e] = rng.bernoulli(dcm.attraction[e]) ? 1 : 0;
  out.termination_draw.resize(dcm.positions());
  for (std::size_t k = 0; k < dcm.positions(); ++k)
    out.termination_draw[k] = rng.bernoulli(dcm.termination[k]) ? 1 : 0;

  out.clicks.assign(dcm.positions(), 0);
  for (std::size_t k = 0; k < dcm.positions(); ++k) {
    if (!out.attraction_draw[static_cast<std::size_t>(a[k])]) continue;
    out.clicks[k] = 1;
    if (out.termination_draw[k]) {  // satisfied; the scan stops here
      out.reward = true;
      break;
    }
  }
  return out;
}

std::optional<std::size_t> last_click_index(const ClickVector& c) {
  for (std::size_t k = c.size(); k > 0; --k)
    if (c[k - 1]) return k - 1;
  return std::nullopt;
}

std::size_t observed_prefix(const ClickVector& c) {
  const auto last = last_click_index(c);
  return last ? *last + 1 : c.size();
}

std::vector<std::int32_t> rank_descending(std::span<const double> values) {
  std::vector<std::int32_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::int32_t a, std::int32_t b) {
    return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
  });
  return idx;
}

ActionList optimal_list(const DcmInstance& dcm) {
  dcm.validate();
  const auto item_rank = rank_descending(dcm.attraction);
  const auto pos_rank = rank_descending(dcm.termination);
  ActionList a;
  a.items.resize(dcm.positions());
  for (std::size_t r = 0; r < dcm.positions(); ++r)
    a.items[static_cast<std::size_t>(pos_rank[r])] = item_rank[r];
  return a;
}

bool realized_reward(const ActionList& a, std::span<const std::uint8_t> attraction_draw,
                     std::span<const std::uint8_t> termination_draw) {
  for (std::size_t k = 0; k < a.size(); ++k)
    if (attraction_draw[static_cast<std::size_t>(a[k])] && termination_draw[k]) return true;
  return false;
}

void save_instance(std::ostream& out, const DcmInstance& dcm) {
  dcm.validate();
  out << "dcmb-instance v1\n";
  out << "L " << dcm.item_count() << "\n";
  out << "K " << dcm.positions() << "\n";
  out << "order_known " << (dcm.order_known ? 1 : 0) << "\n";
  out << "attraction";
  for (double w : dcm.attraction) out << ' ' << g17(w);
  out << "\ntermination";
  for (double v : dcm.termination) out << ' ' << g17(v);
  out << "\n";
}

DcmInstance load_instance(std::istream& in) {
  auto fail = [](const std::string& what) -> void {
    throw std::runtime_error("dcm instance parse: " + what);
  };
  std::string line;
  if (!std::getline(in, line) || line != "dcmb-instance v1") fail("missing header line");

  DcmInstance dcm;
  std::size_t item_count = 0, positions = 0;
  bool have_l = false, have_k = false, have_w = false, have_v = false;
  std::string key;
  while (in >> key) {
    if (key == "L") {
      if (!(in >> item_count) || item_count == 0) fail("bad L");
      have_l = true;
    } else if (key == "K") {
      if (!(in >> positions) || positions == 0) fail("bad K");
      have_k = true;
    } else if (key == "order_known") {
      int flag = 0;
      if (!(in >> flag) || (flag != 0 && flag != 1)) fail("bad order_known");
      dcm.order_known = flag == 1;
    } else if (key == "attraction") {
      if (!have_l) fail("attraction before L");
      dcm.attraction.resize(item_count);
      for (auto& w : dcm.attraction)
        if (!(in >> w)) fail("attraction list shorter than L");
      have_w = true;
    } else if (key == "termination") {
      if (!have_k) fail("termination before K");
      dcm.termination.resize(positions);
      for (auto& v : dcm.termination)
        if (!(in >> v)) fail("termination list shorter than K");
      have_v = true;
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!have_l || !have_k || !have_w || !have_v) fail("missing fields");
  dcm.validate();
  return dcm;
}

}  // namespace dcmb
