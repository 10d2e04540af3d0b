#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sysrisk/disjoint.hpp"
#include "sysrisk/overlap.hpp"

namespace sysrisk {

constexpr int kChunkSize = 8192;

std::uint64_t splitmix64(std::uint64_t x);

// n x count draws from N(mu, sigma); chunk c uses its own stream seeded from
// (seed, c), so the output does not depend on the thread count
Mat sample_X(const Market& m, int count, std::uint64_t seed);

struct Estimate {
    double value;
    double se;
};

// plain mean and standard error
Estimate mean_estimate(const Vec& f);

// E_Q[f] with dQ/dP = e^{-S/beta}/E[e^{-S/beta}], S = a.X, self-normalised
Estimate tilted_estimate(const Mat& samples, const Vec& a, double beta, const Vec& f);
Estimate tilted_estimate(const Mat& samples, const Vec& a, double beta,
                         const std::function<double(const Vec&)>& f);

// E[sum_j sum_{i in I_j} u_i(w_ij X^i + Y^{ij})], u_i(x) = -e^{-alpha_i x}/alpha_i.
// d_shift is added to every group constant (negative control)
Estimate budget_check(const Market& m, const WeightMatrix& w, const Mat& samples,
                      double d_shift = 0.0);
Estimate budget_check(const Market& m, const Partition& p, const Mat& samples,
                      double d_shift = 0.0);

struct TrivialNashBound {
    std::vector<bool> per_bank;
    Vec critical_B;  // bank i keeps the single group iff B >= critical_B(i)
    bool overall;
};

// diagonal sigma with a common variance only
TrivialNashBound trivial_nash_B_bound(const Market& m);

} // namespace sysrisk
