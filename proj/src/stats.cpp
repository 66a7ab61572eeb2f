#include "pinlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pinlab/errors.hpp"
#include "pinlab/special.hpp"

namespace pinlab {

MeanStderr mean_stderr(const std::vector<double>& xs) {
  if (xs.empty()) throw Error("mean_stderr: empty sample");
  MeanStderr out;
  out.count = static_cast<std::int64_t>(xs.size());
  double mean = 0.0;
  for (double v : xs) mean += v;
  mean /= static_cast<double>(xs.size());
  out.mean = mean;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double v : xs) ss += (v - mean) * (v - mean);
    out.stderr_of_mean =
        std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                  static_cast<double>(xs.size()));
  }
  return out;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    const double v = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] == v) ++ia;  // step past the whole tie block
    while (ib < b.size() && b[ib] == v) ++ib;
    d = std::max(d, std::fabs(static_cast<double>(ia) / na -
                              static_cast<double>(ib) / nb));
  }
  KsResult out;
  out.statistic = d;
  const double ne = na * nb / (na + nb);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  out.p_value = kolmogorov_tail(lambda);
  return out;
}

ChiSquareResult chi_square_gof(const std::vector<double>& observed,
                               const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.empty())
    throw Error("chi_square_gof: size mismatch or empty");
  ChiSquareResult out;
  std::int64_t cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) {
      if (observed[i] != 0.0)
        throw Error("chi_square_gof: observation in a zero-expectation cell");
      continue;
    }
    const double diff = observed[i] - expected[i];
    out.statistic += diff * diff / expected[i];
    ++cells;
  }
  if (cells < 2) throw Error("chi_square_gof: fewer than 2 usable cells");
  out.dof = cells - 1;
  out.p_value = regularized_gamma_q(0.5 * static_cast<double>(out.dof),
                                    0.5 * out.statistic);
  return out;
}

LinearFit least_squares(const std::vector<std::vector<double>>& rows,
                        const std::vector<double>& y) {
  if (rows.empty() || rows.size() != y.size())
    throw Error("least_squares: size mismatch or empty");
  const std::size_t p = rows[0].size();
  if (p == 0 || p > 4 || p > rows.size())
    throw Error("least_squares: needs 1..4 regressors and at least as many rows");
  // Normal equations: (X'X) beta = X'y, solved by Gaussian elimination with
  // partial pivoting; p <= 4 keeps this well inside double precision here.
  std::vector<std::vector<double>> m(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != p) throw Error("least_squares: ragged rows");
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) m[i][j] += rows[r][i] * rows[r][j];
      m[i][p] += rows[r][i] * y[r];
    }
  }
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < p; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    if (m[col][col] == 0.0) throw Error("least_squares: singular design matrix");
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= p; ++c) m[r][c] -= f * m[col][c];
    }
  }
  LinearFit fit;
  fit.coeffs.resize(p);
  for (std::size_t i = 0; i < p; ++i) fit.coeffs[i] = m[i][p] / m[i][i];
  double sse = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double pred = 0.0;
    for (std::size_t i = 0; i < p; ++i) pred += fit.coeffs[i] * rows[r][i];
    sse += (y[r] - pred) * (y[r] - pred);
  }
  fit.residual_rms = std::sqrt(sse / static_cast<double>(rows.size()));
  return fit;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error("log_log_slope: need at least two points");
  std::vector<std::vector<double>> rows;
  std::vector<double> ly;
  rows.reserve(x.size());
  ly.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw Error("log_log_slope: points must be positive");
    rows.push_back({std::log(x[i]), 1.0});
    ly.push_back(std::log(y[i]));
  }
  return least_squares(rows, ly).coeffs[0];
}

}  // namespace pinlab
