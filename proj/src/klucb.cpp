#include "dcmb/klucb.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dcmb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(name) + " must be in [0,1]");
}

}  // namespace

double kl_bernoulli(double p, double q) {
  check_unit(p, "p");
  check_unit(q, "q");
  if (p == q) return 0.0;
  double div = 0.0;
  if (p > 0.0) {
    if (q == 0.0) return kInf;
    div += p * std::log(p / q);
  }
  if (p < 1.0) {
    if (q == 1.0) return kInf;
    div += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  }
  // rounding can leave a tiny negative for p ~ q
  return div > 0.0 ? div : 0.0;
}

double exploration_budget(std::int64_t t) {
  if (t < 1) throw std::invalid_argument("step index t must be >= 1");
  const double log_t = std::log(static_cast<double>(t));
  if (t < 3) return log_t > 0.0 ? log_t : 0.0;
  return log_t + 3.0 * std::log(log_t);
}

double klucb_upper(double w_hat, std::int64_t pulls, std::int64_t t) {
  check_unit(w_hat, "w_hat");
  if (pulls < 1) throw std::invalid_argument("pulls must be >= 1");
  const double allowance = exploration_budget(t) / static_cast<double>(pulls);
  if (w_hat >= 1.0) return 1.0;  // kl(1, q) = +inf for every q < 1
  if (allowance <= 0.0) return w_hat;

  // kl(w_hat, q) without re-validation, for the hot loop
  const double p = w_hat;
  const double self_info = (p > 0.0 ? p * std::log(p) : 0.0) +
                           (p < 1.0 ? (1.0 - p) * std::log(1.0 - p) : 0.0);
  const auto divergence = [&](double q) {
    double d = self_info;
    if (p > 0.0) d -= p * std::log(q);
    d -= (1.0 - p) * std::log(1.0 - q);
    return d;
  };

  double lo = w_hat, hi = 1.0;
  for (int i = 0; i < 100 && hi - lo > 1e-9; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (divergence(mid) <= allowance)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace dcmb
