#include "pinlab/law.hpp"

#include <cmath>
#include <limits>

#include "pinlab/special.hpp"

namespace pinlab {

namespace {

// B_{2j} / (2j)! for j = 1..10 (shared with the zeta evaluator's convention).
constexpr double kBernoulliOverFactorial[10] = {
    8.3333333333333333e-02,  -1.3888888888888889e-03, 3.3068783068783069e-05,
    -8.2671957671957672e-07, 2.0876756987868099e-08,  -5.2841901386874932e-10,
    1.3382536530684679e-11,  -3.3896802963225829e-13, 8.5860620562778446e-15,
    -2.1748686985580619e-16,
};

// sum_{n >= a} n^{-s} by Euler-Maclaurin; accurate to ~1e-15 for a >= 64.
double power_tail_from(double s, double a) {
  double acc = std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
  double poch = s;
  double apow = std::pow(a, -s - 1.0);
  for (int j = 0; j < 10; ++j) {
    acc += kBernoulliOverFactorial[j] * poch * apow;
    poch *= (s + 2.0 * j + 1.0) * (s + 2.0 * j + 2.0);
    apow /= a * a;
  }
  return acc;
}

void validate_exponent(double exponent) {
  if (exponent <= 0.0)
    throw NonPositiveExponent("inter-arrival exponent must be positive");
  if (exponent == 1.0)
    throw ExponentOne("inter-arrival exponent 1 is unsupported (marginal case)");
}

}  // namespace

InterArrivalLaw::InterArrivalLaw(double exponent, std::int64_t horizon) {
  validate_exponent(exponent);
  if (horizon < 2) throw Error("inter-arrival horizon must be >= 2");
  const double s = 1.0 + exponent;
  const double z = riemann_zeta(s);
  exponent_ = exponent;
  normalizer_ = 1.0 / z;
  const std::size_t h = static_cast<std::size_t>(horizon);
  pmf_.assign(h + 1, 0.0);
  log_pmf_.assign(h + 1, -std::numeric_limits<double>::infinity());
  const double log_c = -std::log(z);
  for (std::size_t n = 1; n <= h; ++n) {
    const double ln = std::log(static_cast<double>(n));
    pmf_[n] = std::exp(-s * ln + log_c);
    log_pmf_[n] = -s * ln + log_c;
  }
  // Exact tail: explicit terms up to a comfortable swap point, then the
  // integral-tail expansion.
  const double swap = std::max<double>(static_cast<double>(horizon) + 1.0, 64.0);
  double tail = power_tail_from(s, swap) * normalizer_;
  for (double n = swap - 1.0; n > static_cast<double>(horizon); n -= 1.0)
    tail += std::pow(n, -s) * normalizer_;
  surv_.assign(h + 1, 0.0);
  surv_[h] = tail;
  finalize_tables();
  if (exponent > 1.0) {
    mean_finite_ = true;
    mean_ = riemann_zeta(exponent) / z;  // sum n * K(n)
  } else {
    mean_finite_ = false;
    mean_ = std::numeric_limits<double>::infinity();
  }
}

InterArrivalLaw InterArrivalLaw::from_pmf(double exponent, std::vector<double> pmf) {
  validate_exponent(exponent);
  if (pmf.size() < 2) throw Error("inter-arrival pmf table must cover n >= 2");
  InterArrivalLaw law;
  law.exponent_ = exponent;
  const std::size_t h = pmf.size();
  law.pmf_.assign(h + 1, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < h; ++i) {
    if (!(pmf[i] >= 0.0)) throw Error("inter-arrival pmf entries must be >= 0");
    law.pmf_[i + 1] = pmf[i];
    total += pmf[i];
  }
  if (total > 1.0 + 1e-12) throw Error("inter-arrival pmf mass exceeds 1");
  const double tail = std::max(0.0, 1.0 - total);
  law.log_pmf_.assign(h + 1, 0.0);
  for (std::size_t n = 0; n <= h; ++n) law.log_pmf_[n] = std::log(law.pmf_[n]);
  law.surv_.assign(h + 1, 0.0);
  law.surv_[h] = tail;
  // Empirical tail constant; informational for table-backed laws.
  law.normalizer_ = law.pmf_[h] * std::pow(static_cast<double>(h), 1.0 + exponent);
  law.finalize_tables();
  if (exponent > 1.0) {
    double m = 0.0;
    for (std::size_t n = 1; n <= h; ++n) m += static_cast<double>(n) * law.pmf_[n];
    // Tail mean under the assumed power decay beyond the horizon.
    m += tail * static_cast<double>(h) * exponent / (exponent - 1.0);
    law.mean_finite_ = true;
    law.mean_ = m;
  } else {
    law.mean_finite_ = false;
    law.mean_ = std::numeric_limits<double>::infinity();
  }
  return law;
}

void InterArrivalLaw::finalize_tables() {
  const std::size_t h = pmf_.size() - 1;
  for (std::size_t n = h; n >= 1; --n) surv_[n - 1] = surv_[n] + pmf_[n];
  log_surv_.assign(h + 1, 0.0);
  for (std::size_t n = 0; n <= h; ++n) log_surv_[n] = std::log(surv_[n]);
}

std::int64_t InterArrivalLaw::sample_gap(SplitMix64& rng) const {
  const double target = 1.0 - rng.u01();  // in (0, 1]
  const std::int64_t h = horizon();
  if (surv_[static_cast<std::size_t>(h)] > target) return h + 1;  // uncached tail
  // Smallest g >= 1 with survival(g) <= target; survival is non-increasing.
  // Most of the mass sits at tiny gaps, so scan a short prefix before bisecting.
  const std::int64_t scan = std::min<std::int64_t>(8, h);
  for (std::int64_t g = 1; g <= scan; ++g)
    if (surv_[static_cast<std::size_t>(g)] <= target) return g;
  std::int64_t lo = scan + 1, hi = h;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (surv_[static_cast<std::size_t>(mid)] <= target)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

InterArrivalLaw make_power_law(double exponent, std::int64_t horizon) {
  return InterArrivalLaw(exponent, horizon);
}

}  // namespace pinlab
