#include "pinlab/renewal.hpp"

#include <algorithm>
#include <string>

#include "pinlab/errors.hpp"

namespace pinlab {

RenewalPath sample_path(const InterArrivalLaw& law, std::int64_t horizon,
                        std::uint64_t seed) {
  if (horizon < 0 || horizon > law.horizon())
    throw HorizonExceedsCache("sample_path: horizon " + std::to_string(horizon) +
                              " not covered by law cache " +
                              std::to_string(law.horizon()));
  RenewalPath path;
  path.horizon = horizon;
  path.points.push_back(0);
  SplitMix64 rng(seed);
  std::int64_t last = 0;
  while (last < horizon) {
    const std::int64_t gap = law.sample_gap(rng);
    const std::int64_t next = last + gap;  // gap == cache+1 encodes "beyond cache"
    if (next > horizon) {
      path.censored = true;
      break;
    }
    path.points.push_back(next);
    last = next;
  }
  return path;
}

GapExtremum longest_gap(const RenewalPath& path, std::int64_t first_n_gaps) {
  const std::int64_t gaps = static_cast<std::int64_t>(path.points.size()) - 1;
  if (first_n_gaps < 1 || first_n_gaps > gaps)
    throw NotEnoughGaps("longest_gap: requested " + std::to_string(first_n_gaps) +
                        " gaps, path has " + std::to_string(gaps));
  GapExtremum ex;
  for (std::int64_t i = 1; i <= first_n_gaps; ++i) {
    const std::int64_t gap = path.points[static_cast<std::size_t>(i)] -
                             path.points[static_cast<std::size_t>(i - 1)];
    if (gap > ex.max_gap) {
      ex.max_gap = gap;
      ex.argmax_index = i;
    }
  }
  return ex;
}

RenewalMassTable renewal_mass_table(const InterArrivalLaw& law, std::int64_t n_max) {
  if (n_max < 0 || n_max > law.horizon())
    throw HorizonExceedsCache("renewal_mass_table: n_max " + std::to_string(n_max) +
                              " not covered by law cache " +
                              std::to_string(law.horizon()));
  const std::vector<double>& k = law.pmf_table();  // k[0] == 0
  RenewalMassTable table;
  table.u.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  table.u[0] = 1.0;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    double acc = 0.0;
    for (std::int64_t j = 1; j <= n; ++j)
      acc += k[static_cast<std::size_t>(j)] * table.u[static_cast<std::size_t>(n - j)];
    table.u[static_cast<std::size_t>(n)] = acc;
  }
  return table;
}

namespace {

// Truncated convolution on [0, cap]; exact there because indices never exceed cap.
std::vector<double> convolve_capped(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  const std::size_t cap = a.size() - 1;
  std::vector<double> out(cap + 1, 0.0);
  for (std::size_t i = 0; i <= cap; ++i) {
    if (a[i] == 0.0) continue;
    const double ai = a[i];
    for (std::size_t j = 0; i + j <= cap; ++j) out[i + j] += ai * b[j];
  }
  return out;
}

}  // namespace

NStepLaw n_step_law(const InterArrivalLaw& law, std::int64_t steps, std::int64_t x_cap) {
  if (steps < 1) throw Error("n_step_law: steps must be >= 1");
  if (x_cap < steps)
    throw CapTooSmall("n_step_law: x_cap " + std::to_string(x_cap) +
                      " below steps " + std::to_string(steps));
  if (x_cap > law.horizon())
    throw HorizonExceedsCache("n_step_law: x_cap " + std::to_string(x_cap) +
                              " not covered by law cache " +
                              std::to_string(law.horizon()));
  const std::size_t cap = static_cast<std::size_t>(x_cap);
  std::vector<double> base(cap + 1, 0.0);
  for (std::size_t x = 1; x <= cap; ++x)
    base[x] = law.pmf(static_cast<std::int64_t>(x));

  // Repeated doubling: result = base^(*steps) truncated at the cap.
  std::vector<double> result(cap + 1, 0.0);
  result[0] = 1.0;
  std::vector<double> power = base;
  std::uint64_t e = static_cast<std::uint64_t>(steps);
  while (e > 0) {
    if (e & 1u) result = convolve_capped(result, power);
    e >>= 1;
    if (e > 0) power = convolve_capped(power, power);
  }

  NStepLaw out;
  out.steps = steps;
  out.pmf = std::move(result);
  double total = 0.0;
  for (double v : out.pmf) total += v;
  out.truncation_mass = std::max(0.0, 1.0 - total);
  return out;
}

double hitting_probability(const InterArrivalLaw& law,
                           const std::set<std::int64_t>& target_set, std::int64_t M) {
  if (M < 1 || M > law.horizon())
    throw HorizonExceedsCache("hitting_probability: M " + std::to_string(M) +
                              " not covered by law cache " +
                              std::to_string(law.horizon()));
  std::vector<char> forbidden(static_cast<std::size_t>(M) + 1, 0);
  for (std::int64_t x : target_set) {
    if (x < 1 || x > M)
      throw SetOutOfRange("hitting_probability: target point " + std::to_string(x) +
                          " outside [1," + std::to_string(M) + "]");
    forbidden[static_cast<std::size_t>(x)] = 1;
  }
  const std::vector<double>& k = law.pmf_table();
  // g[x] = P(x is a renewal epoch and no epoch in [1,x] lies in the target set).
  std::vector<double> g(static_cast<std::size_t>(M) + 1, 0.0);
  g[0] = 1.0;
  for (std::int64_t x = 1; x <= M; ++x) {
    if (forbidden[static_cast<std::size_t>(x)]) continue;
    double acc = 0.0;
    for (std::int64_t j = 0; j < x; ++j)
      acc += g[static_cast<std::size_t>(j)] * k[static_cast<std::size_t>(x - j)];
    g[static_cast<std::size_t>(x)] = acc;
  }
  // Avoiding trajectories are classified by their last epoch in [0, M].
  double miss = 0.0;
  for (std::int64_t x = 0; x <= M; ++x)
    miss += g[static_cast<std::size_t>(x)] * law.survival(M - x);
  return 1.0 - miss;
}

}  // namespace pinlab
