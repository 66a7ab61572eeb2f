#include "pinlab/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <utility>

#include "pinlab/errors.hpp"
#include "pinlab/parallel.hpp"
#include "pinlab/pinning.hpp"
#include "pinlab/renewal.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/special.hpp"
#include "pinlab/stats.hpp"

namespace pinlab {

namespace {

constexpr std::int64_t kMaxSize = 65536;  // largest supported chain length

// All-zero disorder of the requested length (homogeneous model).
Environment flat_environment(std::int64_t length) {
  Environment env;
  env.omega.assign(static_cast<std::size_t>(length) + 1, 0);
  env.hat_points = {0};
  env.signs = {0};
  env.construction_tag = Construction::kA;
  env.tilde_alpha = 2.0;  // provenance only; no stretch data is consumed
  env.hat_horizon = 1;
  return env;
}

}  // namespace

double tilted_renewal_mass(double alpha, double b) {
  if (!(alpha > 0.0))
    throw NonPositiveExponent("tilted_renewal_mass: exponent must be positive");
  const double s = 1.0 + alpha;
  // polylog_exp carries zeta(s) as one of its summands, computed by the same
  // routine as the denominator, so the bulk cancels at full precision and the
  // deficit 1 - G(b) stays accurate even for b ~ 1e-9.
  return polylog_exp(s, b) / riemann_zeta(s);
}

double homogeneous_free_energy(const InterArrivalLaw& law, double h) {
  if (!std::isfinite(h)) throw Error("homogeneous_free_energy: reward must be finite");
  if (h <= 0.0) return 0.0;
  if (h > 700.0)
    throw Error("homogeneous_free_energy: reward too large for the tilt solver");
  const double alpha = law.exponent();
  const double target = std::exp(-h);
  // G(lo) >= e^{-h}: G(b) >= K(1) e^{-b}, so any lo <= h + log K(1) works;
  // G(h) <= e^{-h} sum K = e^{-h}.  G is strictly decreasing on the bracket.
  double lo = std::max(0.0, h - std::log(riemann_zeta(1.0 + alpha)));
  double hi = h;
  for (int it = 0; it < 1100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo) || !(mid < hi)) break;  // bracket exhausted to adjacency
    if (tilted_renewal_mass(alpha, mid) >= target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

SubadditiveReport subadditive_bound_check(const InterArrivalLaw& law, double h,
                                          const std::vector<std::int64_t>& sizes) {
  if (!(h > 0.0))
    throw Error("subadditive_bound_check: requires a strictly positive reward");
  if (sizes.empty()) throw Error("subadditive_bound_check: no sizes given");
  std::int64_t n_max = 0;
  for (std::int64_t n : sizes) {
    if (n < 1) throw Error("subadditive_bound_check: sizes must be >= 1");
    n_max = std::max(n_max, n);
  }
  SubadditiveReport rep;
  rep.h = h;
  rep.free_energy = homogeneous_free_energy(law, h);
  rep.sizes = sizes;

  // One homogeneous forward pass at the largest size; z(n) is prefix-stable,
  // so each requested size reuses the same table.
  PinningInstance inst{law, flat_environment(n_max), 0.0, h, n_max};
  const PartitionTable table = compute_partition(inst);
  const std::vector<double>& lsurv = law.log_survival_table();

  rep.margins.reserve(sizes.size());
  std::vector<double> terms;
  for (std::int64_t N : sizes) {
    terms.clear();
    terms.reserve(static_cast<std::size_t>(N) + 1);
    for (std::int64_t j = 0; j <= N; ++j)
      terms.push_back(table.log_z_pinned[static_cast<std::size_t>(j)] +
                      lsurv[static_cast<std::size_t>(N - j)]);
    const double log_free = log_sum_exp(terms);
    const double margin = h + log_free - static_cast<double>(N) * rep.free_energy;
    if (!(margin >= 0.0))
      throw Error("subadditive_bound_check: finite-size lower bound violated");
    rep.margins.push_back(margin);
  }
  return rep;
}

FreeEnergyEstimate quenched_free_energy(
    const DisorderParams& params, const InterArrivalLaw& law, double beta,
    double h, std::int64_t N, std::int64_t replicas, std::uint64_t seed,
    int workers, const std::function<void(std::int64_t)>& progress) {
  if (N < 1 || N > kMaxSize)
    throw Error("quenched_free_energy: size must be in [1, 65536]");
  if (replicas < 1) throw Error("quenched_free_energy: need at least one replica");

  std::vector<double> vals(static_cast<std::size_t>(replicas));
  std::atomic<std::int64_t> done{0};
  parallel_for_index(replicas, workers, [&](std::int64_t r) {
    const Environment env =
        sample_env_hat(params, N, derive_seed(seed, static_cast<std::uint64_t>(r)));
    PinningInstance inst{law, env, beta, h, N};
    const PartitionTable table = compute_partition(inst);
    const auto margin = longest_stretch_bound_margin(inst, table);
    if (margin.has_value() && !(*margin >= -1e-9))
      throw Error("quenched_free_energy: replica fell below its long-stretch bound");
    vals[static_cast<std::size_t>(r)] = table.log_Z_pinned / static_cast<double>(N);
    if (progress) progress(done.fetch_add(1) + 1);
  });

  const MeanStderr ms = mean_stderr(vals);
  FreeEnergyEstimate est;
  est.h = h;
  est.beta = beta;
  est.N = N;
  est.replicas = replicas;
  est.mean_log_Z_pinned_over_N = ms.mean;
  est.stderr_of_mean = ms.stderr_of_mean;
  est.per_replica = std::move(vals);
  return est;
}

ExponentFit exponent_fit(const FreeEnergyCurve& curve, double tilde_alpha,
                         double h_min, double h_max) {
  if (!(h_min > 0.0) || !(h_max > h_min))
    throw Error("exponent_fit: window must satisfy 0 < h_min < h_max");
  std::vector<double> lh, llh, y;
  for (const FreeEnergyEstimate& p : curve.points) {
    if (p.h < h_min || p.h > h_max) continue;
    if (p.h == 1.0) continue;  // |log h| = 0: correction regressor singular
    const double mean = p.mean_log_Z_pinned_over_N;
    if (!(mean > 0.0)) continue;
    if (!(mean > 3.0 * p.stderr_of_mean)) continue;
    lh.push_back(std::log(p.h));
    llh.push_back(std::log(std::fabs(std::log(p.h))));
    y.push_back(std::log(mean));
  }
  if (lh.size() < 4)
    throw InsufficientSignal(
        "exponent_fit: fewer than 4 grid points clear their noise in the window");

  const std::size_t n = lh.size();
  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = {lh[i], llh[i], 1.0};
  const LinearFit free_fit = least_squares(rows, y);

  std::vector<double> y_pinned(n);
  for (std::size_t i = 0; i < n; ++i)
    y_pinned[i] = y[i] - (1.0 - tilde_alpha) * llh[i];
  for (std::size_t i = 0; i < n; ++i) rows[i] = {lh[i], 1.0};
  const LinearFit pinned_fit = least_squares(rows, y_pinned);

  ExponentFit fit;
  fit.nu = free_fit.coeffs[0];
  fit.log_correction_coeff = free_fit.coeffs[1];
  fit.residual = free_fit.residual_rms;
  fit.nu_pinned_correction = pinned_fit.coeffs[0];
  fit.residual_pinned_correction = pinned_fit.residual_rms;
  fit.h_min = h_min;
  fit.h_max = h_max;
  fit.points_used = static_cast<std::int64_t>(n);
  return fit;
}

ContactTailFit contact_tail_fit(const DisorderParams& params,
                                const InterArrivalLaw& law, double beta,
                                std::int64_t N, std::int64_t replicas,
                                std::uint64_t seed, std::int64_t a_lo,
                                std::int64_t a_hi, int workers) {
  if (N < 1 || N > kMaxSize)
    throw Error("contact_tail_fit: size must be in [1, 65536]");
  if (replicas < 1) throw Error("contact_tail_fit: need at least one replica");
  if (a_lo < 1 || a_hi <= a_lo)
    throw Error("contact_tail_fit: count window must satisfy 1 <= a_lo < a_hi");
  if (a_hi > N) throw Error("contact_tail_fit: count window exceeds the size");
  if (a_hi - a_lo < 3)
    throw Error("contact_tail_fit: count window has fewer than 4 counts");

  const std::int64_t a_max =
      std::min<std::int64_t>(N, std::max<std::int64_t>(64, 2 * a_hi));
  std::vector<std::vector<double>> per(static_cast<std::size_t>(replicas));
  parallel_for_index(replicas, workers, [&](std::int64_t r) {
    const Environment env =
        sample_env_hat(params, N, derive_seed(seed, static_cast<std::uint64_t>(r)));
    PinningInstance inst{law, env, beta, 0.0, N};
    per[static_cast<std::size_t>(r)] = contact_distribution(inst, a_max).probs;
  });

  ContactTailFit fit;
  fit.a_lo = a_lo;
  fit.a_hi = a_hi;
  fit.a_max_used = a_max;
  fit.mean_probs.assign(static_cast<std::size_t>(a_max) + 1, 0.0);
  const double inv_r = 1.0 / static_cast<double>(replicas);
  for (const std::vector<double>& probs : per)  // fold in replica order
    for (std::size_t a = 0; a < probs.size(); ++a) fit.mean_probs[a] += probs[a];
  for (double& p : fit.mean_probs) p *= inv_r;

  std::vector<double> xs, ys;
  for (std::int64_t a = a_lo; a <= a_hi; ++a) {
    const double p = fit.mean_probs[static_cast<std::size_t>(a)];
    fit.window_mass += p;
    if (p > 0.0) {
      xs.push_back(static_cast<double>(a));
      ys.push_back(p);
    }
  }
  if (xs.size() < 4)
    throw InsufficientSignal(
        "contact_tail_fit: fewer than 4 counts carry mass in the window");
  fit.slope = log_log_slope(xs, ys);

  const double alpha = law.exponent();
  fit.band_lo =
      -(params.tilde_alpha * (alpha + 1.0) - 1.0) / std::min(alpha, 1.0);
  fit.band_hi = -params.tilde_alpha * std::max(alpha, 1.0);
  return fit;
}

ContactScaling mean_contact_scaling(const InterArrivalLaw& law,
                                    const std::vector<std::int64_t>& sizes) {
  if (sizes.size() < 2)
    throw Error("mean_contact_scaling: need at least two sizes");
  std::int64_t n_max = 0;
  for (std::int64_t n : sizes) {
    if (n < 1) throw Error("mean_contact_scaling: sizes must be >= 1");
    n_max = std::max(n_max, n);
  }
  const RenewalMassTable table = renewal_mass_table(law, n_max);
  std::vector<double> cumulative(table.u.size());
  double acc = 0.0;
  for (std::size_t n = 0; n < table.u.size(); ++n) {
    acc += table.u[n];
    cumulative[n] = acc;
  }
  ContactScaling out;
  out.sizes = sizes;
  out.mean_contacts.reserve(sizes.size());
  std::vector<double> xs;
  xs.reserve(sizes.size());
  for (std::int64_t n : sizes) {
    out.mean_contacts.push_back(cumulative[static_cast<std::size_t>(n)]);
    xs.push_back(static_cast<double>(n));
  }
  out.slope = log_log_slope(xs, out.mean_contacts);
  return out;
}

}  // namespace pinlab
