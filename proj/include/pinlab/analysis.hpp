#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pinlab/environment.hpp"
#include "pinlab/law.hpp"

namespace pinlab {

// One Monte Carlo estimate of the per-site pinned free energy at a single
// (h, beta) point: mean over independent disorder replicas of
// (1/N) log Z^pin_N, with the per-replica values retained.
struct FreeEnergyEstimate {
  double h = 0.0;
  double beta = 0.0;
  std::int64_t N = 0;
  std::int64_t replicas = 0;
  double mean_log_Z_pinned_over_N = 0.0;
  double stderr_of_mean = 0.0;
  std::vector<double> per_replica;
};

// A reward sweep at fixed beta and fixed model parameters.
struct FreeEnergyCurve {
  double beta = 0.0;
  double alpha = 0.0;        // inter-arrival tail exponent
  double tilde_alpha = 0.0;  // disorder stretch-law exponent
  std::vector<FreeEnergyEstimate> points;  // sorted by h
};

// Result of regressing log F on {log h, log|log h|, 1} over a reward window.
// The correction exponent is fitted twice: free, and pinned to the value
// 1 - tilde_alpha suggested by the stretch-law tail.
struct ExponentFit {
  double nu = 0.0;                    // coefficient of log h, free fit
  double log_correction_coeff = 0.0;  // coefficient of log|log h|, free fit
  double residual = 0.0;              // RMS residual of the free fit
  double nu_pinned_correction = 0.0;  // log h coefficient with the pinned correction
  double residual_pinned_correction = 0.0;
  double h_min = 0.0;  // fit window actually applied
  double h_max = 0.0;
  std::int64_t points_used = 0;
};

// Per-size margins of the finite-size lower bound
// h + log Z_free(N) - N * F(h) >= 0 implied by subadditivity of the
// homogeneous reward-shifted partition sums.
struct SubadditiveReport {
  double h = 0.0;
  double free_energy = 0.0;  // F(h) from the tilt solver
  std::vector<std::int64_t> sizes;
  std::vector<double> margins;  // same order as sizes; all nonnegative
};

// Log-log slope of the replica-averaged contact-count law over a count
// window, together with the theoretical slope band for the exponent pair.
struct ContactTailFit {
  double slope = 0.0;
  double band_lo = 0.0;  // most negative admissible slope
  double band_hi = 0.0;  // least negative admissible slope
  std::int64_t a_lo = 0;
  std::int64_t a_hi = 0;
  std::int64_t a_max_used = 0;
  double window_mass = 0.0;          // averaged mass inside [a_lo, a_hi]
  std::vector<double> mean_probs;    // replica-averaged law, index = count
};

// Expected contact counts E|tau n [0,N]| (site 0 included) for each size,
// with their log-log slope.
struct ContactScaling {
  std::vector<std::int64_t> sizes;
  std::vector<double> mean_contacts;
  double slope = 0.0;
};

// Mass of the reward-tilted inter-arrival law,
//   G(b) = sum_{n>=1} n^{-(1+alpha)} e^{-bn} / zeta(1+alpha),
// exact for the ideal (infinite-horizon) power family.  Decreasing in b with
// G(0) = 1.  Requires alpha > 0, b >= 0.
double tilted_renewal_mass(double alpha, double b);

// Per-site free energy of the homogeneous model: the unique b >= 0 with
// G(b) = e^{-h} for h > 0, and 0 for h <= 0.  Solved by bisection to double
// exhaustion on the bracket [max(0, h + log K(1)), h]; uses the law's
// exponent, i.e. the ideal power family the cached tables follow.
double homogeneous_free_energy(const InterArrivalLaw& law, double h);

// Checks h + log Z_free(N) >= N * F(h) for every requested size (exact
// inequality, no tolerance; throws Error on violation) and returns the
// margins.  Requires h > 0 and law.horizon() >= max size.
SubadditiveReport subadditive_bound_check(const InterArrivalLaw& law, double h,
                                          const std::vector<std::int64_t>& sizes);

// Mean of (1/N) log Z^pin_N over `replicas` independent stretch-built
// disorder environments (replica r is seeded with derive_seed(seed, r), so
// the estimate is reproducible and independent of scheduling).  Each replica
// is checked against the long-stretch strategy lower bound at runtime.
// `workers` caps the number of concurrent replica computations; the
// aggregation is a fold in replica order, so the result is bit-identical for
// every worker count.  Requires 1 <= N <= 65536.  When set, `progress` is
// invoked once per finished replica with the running completion count (it may
// be called from worker threads and must be thread-safe).
FreeEnergyEstimate quenched_free_energy(
    const DisorderParams& params, const InterArrivalLaw& law, double beta,
    double h, std::int64_t N, std::int64_t replicas, std::uint64_t seed,
    int workers = 1, const std::function<void(std::int64_t)>& progress = {});

// Fits log F = nu * log h + gamma * log|log h| + c over the grid points
// inside [h_min, h_max] whose means clear their own noise (mean > 0 and
// mean > 3 * stderr; h = 1 is skipped because its correction regressor is
// singular).  Throws InsufficientSignal when fewer than 4 points qualify.
ExponentFit exponent_fit(const FreeEnergyCurve& curve, double tilde_alpha,
                         double h_min, double h_max);

// Replica-averaged contact-count law at zero reward, fitted on counts in
// [a_lo, a_hi]; the returned band is the admissible slope range
// [-(tilde_alpha*(alpha+1)-1)/min(alpha,1), -tilde_alpha*max(alpha,1)].
// The law is computed out to a_max_used = min(N, max(64, 2*a_hi)).
ContactTailFit contact_tail_fit(const DisorderParams& params,
                                const InterArrivalLaw& law, double beta,
                                std::int64_t N, std::int64_t replicas,
                                std::uint64_t seed, std::int64_t a_lo,
                                std::int64_t a_hi, int workers = 1);

// Expected number of renewal points in [0, N] (prefix sums of the renewal
// mass, site 0 included) for each size, plus the log-log slope across sizes.
// Requires at least two sizes, all >= 1 and <= law.horizon().
ContactScaling mean_contact_scaling(const InterArrivalLaw& law,
                                    const std::vector<std::int64_t>& sizes);

}  // namespace pinlab
