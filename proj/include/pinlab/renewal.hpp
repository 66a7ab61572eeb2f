#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "pinlab/law.hpp"
#include "pinlab/rng.hpp"

namespace pinlab {

// One sampled trajectory of the renewal set on [0, horizon].
struct RenewalPath {
  std::vector<std::int64_t> points;  // epochs; points[0] == 0, strictly increasing, <= horizon
  std::int64_t horizon = 0;
  bool censored = false;  // true iff the last drawn gap overshot the horizon
};

// Largest gap among the first n gaps of a path, with the smallest attaining index.
struct GapExtremum {
  std::int64_t max_gap = 0;
  std::int64_t argmax_index = 0;  // 1-based
};

// u[n] = P(n is a renewal epoch); u[0] = 1.
struct RenewalMassTable {
  std::vector<double> u;
};

// Law of the sum of `steps` i.i.d. gaps, truncated at a cap.
struct NStepLaw {
  std::int64_t steps = 0;
  std::vector<double> pmf;       // pmf[x] for x = 0..x_cap; zero below `steps`
  double truncation_mass = 0.0;  // probability mass beyond x_cap
};

// Draws i.i.d. gaps by inversion until one overshoots the horizon.
RenewalPath sample_path(const InterArrivalLaw& law, std::int64_t horizon,
                        std::uint64_t seed);

// Maximum over the first `first_n_gaps` gaps; ties resolved to the smallest index.
GapExtremum longest_gap(const RenewalPath& path, std::int64_t first_n_gaps);

// Exact renewal-mass recursion u(n) = sum_{j=1}^{n} K(j) u(n-j), O(n_max^2).
RenewalMassTable renewal_mass_table(const InterArrivalLaw& law, std::int64_t n_max);

// Exact `steps`-fold convolution of the gap law, truncated at x_cap.
NStepLaw n_step_law(const InterArrivalLaw& law, std::int64_t steps, std::int64_t x_cap);

// Exact probability that the renewal set meets target_set within [1, M].
double hitting_probability(const InterArrivalLaw& law,
                           const std::set<std::int64_t>& target_set, std::int64_t M);

}  // namespace pinlab
