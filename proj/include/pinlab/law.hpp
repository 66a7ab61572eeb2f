#pragma once

#include <cstdint>
#include <vector>

#include "pinlab/errors.hpp"
#include "pinlab/rng.hpp"

namespace pinlab {

// Heavy-tailed inter-arrival distribution of a renewal process, cached to a
// working horizon together with its survival function and log tables.
//
// The default construction is the exact power law
//   K(n) = n^{-(1+exponent)} / zeta(1+exponent),  n >= 1,
// whose normalizer and tail are evaluated by partial sums plus an
// Euler-Maclaurin integral tail (absolute accuracy ~1e-14).  A table-backed
// variant exists for laws defined by an explicit pmf prefix; its tail mass
// beyond the horizon is kept in the survival table.
class InterArrivalLaw {
 public:
  // Exact power law.  Requires exponent > 0, exponent != 1, horizon >= 2.
  InterArrivalLaw(double exponent, std::int64_t horizon);

  // Table-backed law: pmf[n-1] = K(n) for n = 1..pmf.size().  `exponent` is
  // the tail exponent the table is believed to follow (used for the
  // finite-mean flag and tail accounting only).
  static InterArrivalLaw from_pmf(double exponent, std::vector<double> pmf);

  double exponent() const { return exponent_; }
  // Leading pmf constant: 1/zeta(1+exponent) for the power law.
  double normalizer() const { return normalizer_; }
  std::int64_t horizon() const { return static_cast<std::int64_t>(pmf_.size()) - 1; }

  // K(n), 1 <= n <= horizon.
  double pmf(std::int64_t n) const {
    check_range(n, 1);
    return pmf_[static_cast<std::size_t>(n)];
  }
  // P(gap > n), 0 <= n <= horizon.
  double survival(std::int64_t n) const {
    check_range(n, 0);
    return surv_[static_cast<std::size_t>(n)];
  }
  double log_pmf(std::int64_t n) const {
    check_range(n, 1);
    return log_pmf_[static_cast<std::size_t>(n)];
  }
  double log_survival(std::int64_t n) const {
    check_range(n, 0);
    return log_surv_[static_cast<std::size_t>(n)];
  }

  bool mean_is_finite() const { return mean_finite_; }
  // E[gap]; +inf when exponent <= 1.
  double mean() const { return mean_; }

  // Raw tables for hot loops; index n directly, entry 0 is K(0)=0 / Kbar(0)=1.
  const std::vector<double>& pmf_table() const { return pmf_; }
  const std::vector<double>& survival_table() const { return surv_; }
  const std::vector<double>& log_pmf_table() const { return log_pmf_; }
  const std::vector<double>& log_survival_table() const { return log_surv_; }

  // One gap by CDF inversion on the cached table: smallest g with
  // Kbar(g) <= 1-u.  Returns horizon+1 when u falls in the uncached tail,
  // meaning "longer than anything the table can resolve".
  std::int64_t sample_gap(SplitMix64& rng) const;

 private:
  InterArrivalLaw() = default;
  void finalize_tables();  // survival backward recursion + log tables
  void check_range(std::int64_t n, std::int64_t lo) const {
    if (n < lo || n >= static_cast<std::int64_t>(pmf_.size()))
      throw HorizonExceedsCache("inter-arrival table index out of range");
  }

  double exponent_ = 0.0;
  double normalizer_ = 0.0;
  double mean_ = 0.0;
  bool mean_finite_ = false;
  // All indexed by n; pmf_[0] = 0 and surv_[0] = 1 (tail mass beyond the
  // horizon stays in the survival table).
  std::vector<double> pmf_, surv_, log_pmf_, log_surv_;
};

// Spec-level constructor name for the exact power law.
InterArrivalLaw make_power_law(double exponent, std::int64_t horizon);

}  // namespace pinlab
