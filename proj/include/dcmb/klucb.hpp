#pragma once

#include <cstdint>

namespace dcmb {

// KL divergence between Bernoulli(p) and Bernoulli(q), with the conventions
// 0 log 0 = 0 and +inf when q in {0,1} disagrees with p.
double kl_bernoulli(double p, double q);

// Exploration allowance log t + 3 log log t, clamped to max(log t, 0) for
// t < 3 where log log t is undefined or negative.
double exploration_budget(std::int64_t t);

// Largest q in [w_hat, 1] with pulls * kl(w_hat, q) <= exploration_budget(t),
// found by bisection to absolute tolerance 1e-9 (kl is increasing in q there).
double klucb_upper(double w_hat, std::int64_t pulls, std::int64_t t);

}  // namespace dcmb
