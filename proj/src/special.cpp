#include "pinlab/special.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <unordered_map>

#include "pinlab/errors.hpp"

namespace pinlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// B_{2j} / (2j)! for j = 1..10.
constexpr double kBernoulliOverFactorial[10] = {
    8.3333333333333333e-02,   // 1/12
    -1.3888888888888889e-03,  // -1/720
    3.3068783068783069e-05,   // 1/30240
    -8.2671957671957672e-07,  // -1/1209600
    2.0876756987868099e-08,   // 1/47900160
    -5.2841901386874932e-10,  // -691/1307674368000
    1.3382536530684679e-11,   // 1/74724249600
    -3.3896802963225829e-13,  // -3617/10670622842880000
    8.5860620562778446e-15,   // 43867/5109094217170944000
    -2.1748686985580619e-16,  // -174611/802857662698291200000
};

// Euler-Maclaurin evaluation, reliable for s >= 0.5, s != 1.
double zeta_em(double s) {
  constexpr int M = 32;
  double partial = 0.0;
  for (int n = 1; n < M; ++n) partial += std::pow(static_cast<double>(n), -s);
  const double m = static_cast<double>(M);
  double acc = partial + std::pow(m, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(m, -s);
  // + sum_j B_{2j}/(2j)! * s(s+1)...(s+2j-2) * M^{-s-2j+1}
  double poch = s;                          // rising factorial s(s+1)...(s+2j-2)
  double mpow = std::pow(m, -s - 1.0);      // M^{-s-2j+1} at j=1
  for (int j = 0; j < 10; ++j) {
    acc += kBernoulliOverFactorial[j] * poch * mpow;
    poch *= (s + 2.0 * j + 1.0) * (s + 2.0 * j + 2.0);
    mpow /= m * m;
  }
  return acc;
}

}  // namespace

double sin_pi(double x) {
  // Reduce modulo the period 2 first; remainder() keeps integer inputs exact.
  const double r = std::remainder(x, 2.0);  // r in [-1, 1]
  if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
  if (r == 0.5) return 1.0;
  if (r == -0.5) return -1.0;
  // |r| <= 1 but sin(pi*r) loses accuracy near the endpoints; fold to |r| <= 1/2.
  if (r > 0.5) return std::sin(kPi * (1.0 - r));
  if (r < -0.5) return -std::sin(kPi * (1.0 + r));
  return std::sin(kPi * r);
}

double riemann_zeta(double s) {
  if (s == 1.0) throw Error("riemann_zeta: pole at s=1");
  if (s == 0.0) return -0.5;  // functional equation is 0 * pole here
  if (s >= 0.5) return zeta_em(s);
  // zeta(s) = 2^s pi^{s-1} sin(pi s/2) Gamma(1-s) zeta(1-s); 1-s > 0.5 here.
  return std::pow(2.0, s) * std::pow(kPi, s - 1.0) * sin_pi(0.5 * s) *
         std::tgamma(1.0 - s) * zeta_em(1.0 - s);
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

double log_sum_exp(const std::vector<double>& xs) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : xs) mx = std::max(mx, x);
  if (mx == -std::numeric_limits<double>::infinity()) return mx;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

namespace {

// Lower regularized gamma by power series, x < a+1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma by Lentz continued fraction, x >= a+1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw Error("regularized_gamma: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw Error("regularized_gamma: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

namespace {

// Per-index constants of polylog_exp: n^{-s} for the direct sum and the
// zeta/gamma coefficients of the small-b series.  They depend on s only, and
// root solvers evaluate the same s at ~1000 tilts, so cache per thread.
struct TiltSeriesTable {
  std::array<double, 256> powers;  // n^{-s}, entry n-1
  std::array<double, 49> series;   // coefficient of (-b)^k/k!; slot k = m-1 unused
  double gamma_term = 0.0;         // Gamma(1-s), or H_{m-1} at integer index
  long long integer_index = 0;     // m >= 2 when s is (near) integer, else 0
};

const TiltSeriesTable& tilt_series_table(double s) {
  thread_local std::unordered_map<double, TiltSeriesTable> cache;
  auto [it, inserted] = cache.try_emplace(s);
  TiltSeriesTable& t = it->second;
  if (inserted) {
    for (int n = 1; n <= 256; ++n)
      t.powers[static_cast<std::size_t>(n - 1)] =
          std::pow(static_cast<double>(n), -s);
    const long long m = std::llround(s);
    if (m >= 2 && std::fabs(s - static_cast<double>(m)) < 1e-8) {
      t.integer_index = m;
      double harmonic = 0.0;
      for (long long j = 1; j < m; ++j) harmonic += 1.0 / static_cast<double>(j);
      t.gamma_term = harmonic;
      for (int k = 0; k <= 48; ++k)
        t.series[static_cast<std::size_t>(k)] =
            (k == m - 1) ? 0.0 : riemann_zeta(static_cast<double>(m - k));
    } else {
      t.integer_index = 0;
      t.gamma_term = std::tgamma(1.0 - s);
      for (int k = 0; k <= 48; ++k)
        t.series[static_cast<std::size_t>(k)] =
            riemann_zeta(s - static_cast<double>(k));
    }
  }
  return t;
}

}  // namespace

double polylog_exp(double s, double b) {
  if (!(s > 1.0)) throw Error("polylog_exp: index must exceed 1");
  if (!std::isfinite(b) || b < 0.0)
    throw Error("polylog_exp: tilt must be finite and nonnegative");
  if (b == 0.0) return riemann_zeta(s);
  const TiltSeriesTable& tab = tilt_series_table(s);
  if (b > 1.0) {
    double sum = 0.0;
    for (int n = 1; n <= 256; ++n) {
      const double term =
          tab.powers[static_cast<std::size_t>(n - 1)] * std::exp(-b * n);
      sum += term;
      if (term <= sum * 1e-18) break;
    }
    return sum;
  }
  // Series around b = 0 (valid for b < 2*pi).  The zeta(s) term carries the
  // bulk; the b^{s-1} term carries the leading deficit, so the small-b signal
  // survives at full relative accuracy.  Truncation error ~ (b/2pi)^49.
  double sum;
  if (tab.integer_index >= 2) {
    // Integer index: the k = m-1 term degenerates into a logarithm.
    const long long m = tab.integer_index;
    sum = 0.0;
    double bk = 1.0;  // (-b)^k / k!
    for (int k = 0; k <= 48; ++k) {
      if (k == m - 1)
        sum += bk * (tab.gamma_term - std::log(b));
      else
        sum += bk * tab.series[static_cast<std::size_t>(k)];
      bk *= -b / static_cast<double>(k + 1);
    }
  } else {
    sum = tab.gamma_term * std::pow(b, s - 1.0);
    double bk = 1.0;
    for (int k = 0; k <= 48; ++k) {
      sum += bk * tab.series[static_cast<std::size_t>(k)];
      bk *= -b / static_cast<double>(k + 1);
    }
  }
  return sum;
}

double kolmogorov_tail(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;  // series converges slowly; tail is 1 to >1e-10 here
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * t * t);
    sum += (j % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

}  // namespace pinlab
