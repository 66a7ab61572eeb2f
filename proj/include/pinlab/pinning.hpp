#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pinlab/environment.hpp"
#include "pinlab/law.hpp"
#include "pinlab/rng.hpp"

namespace pinlab {

// One quenched polymer problem: an inter-arrival law, a disorder environment,
// an inverse temperature beta >= 0, a pinning reward h, and a system size N.
// The environment must cover at least N sites and the law's cached horizon
// must reach N.
struct PinningInstance {
  InterArrivalLaw law;
  Environment env;
  double beta = 0.0;
  double h = 0.0;
  std::int64_t N = 0;
};

// Log-domain partition data for one instance.
//   log_z_pinned[n] = log z(n), n = 0..N, where z(n) sums trajectory weights
//                     constrained to touch n (z(0) = 1).
//   log_Z_free  = log of the unconstrained weight sum over [0, N].
//   log_Z_pinned = log_z_pinned[N].
// Guarantee: log_Z_pinned <= log_Z_free holds bitwise, because the
// free sum is accumulated so that the pinned term is one of its addends.
struct PartitionTable {
  std::vector<double> log_z_pinned;
  double log_Z_free = 0.0;
  double log_Z_pinned = 0.0;
};

// Distribution of the contact count |tau ∩ [0, N]| under the free measure.
// Site 0 is always a contact, so probs[0] == 0 and counts start at 1.
// probs[a] for a = 0..a_max; overflow_mass = P(count > a_max), tracked as its
// own channel (not inferred by subtraction).
struct ContactDistribution {
  std::vector<double> probs;
  double overflow_mass = 0.0;
};

enum class Boundary : std::uint8_t { kFree = 0, kPinned = 1 };

// One sampled contact set: strictly increasing points in [1, N] (site 0 is
// implicit). Under kPinned the last point is N; under kFree the set may be
// empty.
struct PathSample {
  std::vector<std::int64_t> contact_points;
  Boundary boundary = Boundary::kFree;
};

// Contacts of one path grouped by disorder stretch. per_stretch_contacts has
// one entry per started stretch of the environment; visited_count is the
// number of stretches with at least one contact.
struct StretchVisitStats {
  std::int64_t visited_count = 0;
  std::vector<std::int64_t> per_stretch_contacts;
};

// O(N^2) dynamic program for the partition values. pre: N >= 1, beta >= 0,
// law horizon >= N (else HorizonExceedsCache), env length >= N.
PartitionTable compute_partition(const PinningInstance& inst);

// Exhaustive enumeration over all 2^N contact subsets, log domain.
// Returns (log_Z_free, log_Z_pinned). pre: N <= 20 (else
// TooLargeForBruteForce). N == 0 gives (0, 0).
std::pair<double, double> brute_force_partition(const PinningInstance& inst);

// Joint DP over (position, contact count), run in probability space on top of
// the partition table. pre: 1 <= a_max <= N (CapExceedsSize above N) and
// (N+1)*(a_max+1) must fit comfortably in memory (hard error above 2^31).
// Counts include site 0. Probabilities below ~1e-240 may lose relative
// precision; they are exact zeros or denormals only when truly negligible.
ContactDistribution contact_distribution(const PinningInstance& inst,
                                         std::int64_t a_max);

// Draw contact sets from the quenched measure by backward decomposition from
// the partition table. `table` must belong to `inst` (spot-checked; mismatch
// raises InconsistentTable). Seeds are derived per path, so results do not
// depend on call order or batching.
std::vector<PathSample> sample_paths(const PinningInstance& inst,
                                     const PartitionTable& table,
                                     std::int64_t count, std::uint64_t seed,
                                     Boundary boundary);

// Group a path's contacts by the environment's disorder stretches.
// pre: contacts lie in [1, env.length()].
StretchVisitStats stretch_visit_count(const PathSample& path,
                                      const Environment& env);

// For a fixed contact set, the average over independent resampled stretch
// values of exp(beta * sum of disorder at contacts), and its closed upper
// bound ((1+e^-beta)/2)^V with V = visited stretch count. The bound is
// accumulated factor by factor so exact <= bound holds bitwise.
// pre: env built by the independent-stretch construction (else
// WrongConstruction), beta >= 0.
std::pair<double, double> disorder_average_bound(const PathSample& path,
                                                 const Environment& env,
                                                 double beta);

// Block decomposition bound: lhs = log_Z_free(inst); rhs sums, over
// blocks (prev, end] given by block_ends, the positive part of the best
// restricted partition value started anywhere inside the block. Returns
// (lhs, rhs); lhs <= rhs up to fp roundoff. block_ends must be nonempty,
// strictly increasing, start >= 1 and end exactly at N (else BadPartition).
std::pair<double, double> coarse_grain_upper_bound(
    const PinningInstance& inst, const std::vector<std::int64_t>& block_ends);

// Sanity oracle: a single trajectory family through the largest completed
// zero-valued disorder stretch gives a rigorous lower bound on
// log_Z_pinned; returns log_Z_pinned minus that bound (>= 0 up to fp
// roundoff), or nullopt when no stretch qualifies (needs a completed interior
// stretch with value 0 that is not the first and does not end at N).
std::optional<double> longest_stretch_bound_margin(const PinningInstance& inst,
                                                   const PartitionTable& table);

}  // namespace pinlab
