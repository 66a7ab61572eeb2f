#pragma once

#include <cstdint>
#include <vector>

namespace pinlab {

struct MeanStderr {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  std::int64_t count = 0;
};

// Sample mean and its standard error (unbiased variance, n-1 denominator).
MeanStderr mean_stderr(const std::vector<double>& xs);

struct KsResult {
  double statistic = 0.0;  // sup-distance between the two empirical cdfs
  double p_value = 1.0;    // asymptotic, conservative under ties
};

// Two-sample Kolmogorov-Smirnov test; ties are handled by comparing the cdfs
// only between distinct values.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ChiSquareResult {
  double statistic = 0.0;
  std::int64_t dof = 0;
  double p_value = 1.0;
};

// Goodness of fit of observed counts against expected counts (same total);
// cells with zero expectation must have zero observations.
ChiSquareResult chi_square_gof(const std::vector<double>& observed,
                               const std::vector<double>& expected);

struct LinearFit {
  std::vector<double> coeffs;  // one per regressor column
  double residual_rms = 0.0;   // sqrt(SSE / n)
};

// Ordinary least squares for a small (<= 4) number of regressors.
// rows[i] holds the regressor values for observation i.
LinearFit least_squares(const std::vector<std::vector<double>>& rows,
                        const std::vector<double>& y);

// Slope of log(y) against log(x) by least squares with an intercept.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pinlab
