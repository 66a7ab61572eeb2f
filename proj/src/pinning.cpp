#include "pinlab/pinning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "pinlab/errors.hpp"
#include "pinlab/special.hpp"

namespace pinlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Up-only rescale trigger for the linear-domain recursion. With site weights
// bounded by e^100 a fresh row cannot overflow before the next check.
constexpr double kRescaleAbove = 1e250;

void validate_instance(const PinningInstance& inst) {
  if (inst.N < 1) throw Error("instance size must be >= 1");
  if (!(inst.beta >= 0.0)) throw Error("beta must be >= 0");
  if (!std::isfinite(inst.h)) throw Error("h must be finite");
  // Site weights stay within exp(+-(|h|+beta)); keep that inside the band the
  // scaled recursion can absorb between rescale checks.
  if (std::abs(inst.h) + inst.beta > 100.0)
    throw Error("pinning parameters too extreme for the scaled recursion");
  if (inst.law.horizon() < inst.N)
    throw HorizonExceedsCache("law horizon smaller than instance size");
  if (inst.env.length() < inst.N)
    throw Error("environment shorter than instance size");
}

// log of the weight collected at a contact with site n.
inline double site_log_weight(const PinningInstance& inst, std::int64_t n) {
  return inst.h + inst.beta * static_cast<double>(inst.env.value_at(n));
}

// log z(M) for the disorder-free chain with reward h: z(n) = e^h sum_j z(j) K(n-j).
double homogeneous_pinned_log(const InterArrivalLaw& law, std::int64_t M,
                              double h) {
  if (M < 1) throw Error("homogeneous chain length must be >= 1");
  if (law.horizon() < M)
    throw HorizonExceedsCache("law horizon smaller than chain length");
  const std::vector<double>& K = law.pmf_table();
  const double w = std::exp(h);
  std::vector<double> z(static_cast<std::size_t>(M) + 1, 0.0);
  z[0] = 1.0;
  double shift = 0.0;
  double out = 0.0;
  for (std::int64_t n = 1; n <= M; ++n) {
    double s = 0.0;
    for (std::int64_t j = n - 1; j >= 0; --j)
      s += z[static_cast<std::size_t>(j)] * K[static_cast<std::size_t>(n - j)];
    const double zn = w * s;
    z[static_cast<std::size_t>(n)] = zn;
    if (n == M) out = shift + std::log(zn);
    if (n < M && zn > kRescaleAbove) {
      for (std::int64_t j = 0; j <= n; ++j) z[static_cast<std::size_t>(j)] /= zn;
      shift += std::log(zn);
    }
  }
  return out;
}

}  // namespace

PartitionTable compute_partition(const PinningInstance& inst) {
  validate_instance(inst);
  const std::int64_t N = inst.N;
  const std::vector<double>& K = inst.law.pmf_table();
  const std::vector<double>& Kbar = inst.law.survival_table();

  // Linear-domain recursion with an up-only scale shift: all z entries are
  // stored divided by e^shift. New entries never underflow (each is at least
  // e^-(|h|+beta) * K(N) times the current row maximum), and entries flushed
  // by a rescale would contribute less than e^-500 relative weight anyway.
  std::vector<double> z(static_cast<std::size_t>(N) + 1, 0.0);
  std::vector<double> logz(static_cast<std::size_t>(N) + 1, 0.0);
  z[0] = 1.0;
  double shift = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) {
    double s = 0.0;
    for (std::int64_t j = n - 1; j >= 0; --j)
      s += z[static_cast<std::size_t>(j)] * K[static_cast<std::size_t>(n - j)];
    const double zn = std::exp(site_log_weight(inst, n)) * s;
    z[static_cast<std::size_t>(n)] = zn;
    logz[static_cast<std::size_t>(n)] = shift + std::log(zn);
    // Never rescale after the last row: z[N] must stay the exact value whose
    // log was just recorded, so the free sum below dominates it bitwise.
    if (n < N && zn > kRescaleAbove) {
      double mx = 0.0;
      for (std::int64_t j = 0; j <= n; ++j)
        mx = std::max(mx, z[static_cast<std::size_t>(j)]);
      for (std::int64_t j = 0; j <= n; ++j)
        z[static_cast<std::size_t>(j)] /= mx;
      shift += std::log(mx);
    }
  }

  // Free sum = pinned term + strictly positive rest; log_add_exp(a, b) >= a
  // and monotone addition then give log_Z_pinned <= log_Z_free bitwise.
  double rest = 0.0;
  for (std::int64_t j = 0; j < N; ++j)
    rest += z[static_cast<std::size_t>(j)] * Kbar[static_cast<std::size_t>(N - j)];
  PartitionTable table;
  table.log_Z_pinned = logz[static_cast<std::size_t>(N)];
  table.log_Z_free =
      shift + log_add_exp(std::log(z[static_cast<std::size_t>(N)]), std::log(rest));
  table.log_z_pinned = std::move(logz);
  return table;
}

std::pair<double, double> brute_force_partition(const PinningInstance& inst) {
  if (inst.N > 20)
    throw TooLargeForBruteForce("exhaustive enumeration capped at size 20");
  if (inst.N == 0) return {0.0, 0.0};
  validate_instance(inst);
  const std::int64_t N = inst.N;
  std::vector<double> site_w(static_cast<std::size_t>(N) + 1, 0.0);
  for (std::int64_t s = 1; s <= N; ++s)
    site_w[static_cast<std::size_t>(s)] = site_log_weight(inst, s);

  std::vector<double> terms_free;
  std::vector<double> terms_pinned;
  terms_free.reserve(std::size_t(1) << N);
  terms_pinned.reserve(std::size_t(1) << (N - 1));
  const std::uint32_t top = std::uint32_t(1) << N;
  for (std::uint32_t mask = 0; mask < top; ++mask) {
    double logw = 0.0;
    std::int64_t prev = 0;
    for (std::int64_t s = 1; s <= N; ++s) {
      if (mask & (std::uint32_t(1) << (s - 1))) {
        logw += inst.law.log_pmf(s - prev) + site_w[static_cast<std::size_t>(s)];
        prev = s;
      }
    }
    terms_free.push_back(logw + inst.law.log_survival(N - prev));
    if (prev == N) terms_pinned.push_back(logw);
  }
  return {log_sum_exp(terms_free), log_sum_exp(terms_pinned)};
}

ContactDistribution contact_distribution(const PinningInstance& inst,
                                         std::int64_t a_max) {
  validate_instance(inst);
  if (a_max < 1) throw Error("contact cap must be >= 1");
  if (a_max > inst.N) throw CapExceedsSize("contact cap exceeds system size");
  const std::int64_t N = inst.N;
  const std::int64_t cells = (N + 1) * (a_max + 1);
  if ((N + 1) > (std::int64_t(1) << 31) / (a_max + 1))
    throw Error("joint table index would overflow");

  const PartitionTable table = compute_partition(inst);
  const std::vector<double>& logz = table.log_z_pinned;
  const std::vector<double>& logK = inst.law.log_pmf_table();
  const std::vector<double>& logKbar = inst.law.log_survival_table();

  // Work in probability space: y[n*(a_max+1) + a] = P(count = a | last
  // contact so far is n), over[n] = P(count > a_max | ...). The backward
  // transition q_n(j) = z(j) K(n-j) w_n / z(n) sums to one over j, so every
  // stored quantity lives in [0, 1] and no rescaling is ever needed.
  std::vector<double> y(static_cast<std::size_t>(cells), 0.0);
  std::vector<double> over(static_cast<std::size_t>(N) + 1, 0.0);
  const std::size_t stride = static_cast<std::size_t>(a_max) + 1;
  y[1] = 1.0;  // site 0 alone: count 1 (a_max >= 1)

  std::vector<double> q(static_cast<std::size_t>(N), 0.0);
  for (std::int64_t n = 1; n <= N; ++n) {
    const double wn = site_log_weight(inst, n);
    const double lzn = logz[static_cast<std::size_t>(n)];
    double* row = &y[static_cast<std::size_t>(n) * stride];
    double o = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
      const double qj =
          std::exp(logz[static_cast<std::size_t>(j)] +
                   logK[static_cast<std::size_t>(n - j)] + wn - lzn);
      if (qj == 0.0) continue;
      const double* src = &y[static_cast<std::size_t>(j) * stride];
      for (std::int64_t a = a_max; a >= 1; --a)
        row[a] += qj * src[a - 1];
      o += qj * (over[static_cast<std::size_t>(j)] + src[a_max]);
    }
    over[static_cast<std::size_t>(n)] = o;
  }

  // Mix over the last contact under the free measure.
  ContactDistribution out;
  out.probs.assign(stride, 0.0);
  out.overflow_mass = 0.0;
  for (std::int64_t j = 0; j <= N; ++j) {
    const double rj = std::exp(logz[static_cast<std::size_t>(j)] +
                               logKbar[static_cast<std::size_t>(N - j)] -
                               table.log_Z_free);
    if (rj == 0.0) continue;
    const double* src = &y[static_cast<std::size_t>(j) * stride];
    for (std::int64_t a = 1; a <= a_max; ++a) out.probs[a] += rj * src[a];
    out.overflow_mass += rj * over[static_cast<std::size_t>(j)];
  }
  return out;
}

std::vector<PathSample> sample_paths(const PinningInstance& inst,
                                     const PartitionTable& table,
                                     std::int64_t count, std::uint64_t seed,
                                     Boundary boundary) {
  validate_instance(inst);
  if (count < 0) throw Error("sample count must be >= 0");
  const std::int64_t N = inst.N;
  const std::vector<double>& logz = table.log_z_pinned;
  const std::vector<double>& logK = inst.law.log_pmf_table();
  const std::vector<double>& logKbar = inst.law.log_survival_table();

  // Spot-check that the table matches this instance: endpoints, the first
  // row's closed form, and a full recomputation of the last row.
  if (logz.size() != static_cast<std::size_t>(N) + 1 || logz[0] != 0.0 ||
      table.log_Z_pinned != logz[static_cast<std::size_t>(N)] ||
      !(table.log_Z_pinned <= table.log_Z_free))
    throw InconsistentTable("partition table shape does not match instance");
  if (std::abs(logz[1] - (site_log_weight(inst, 1) + logK[1])) > 1e-9)
    throw InconsistentTable("partition table disagrees with instance at site 1");
  {
    double mx = kNegInf;
    for (std::int64_t j = 0; j < N; ++j)
      mx = std::max(mx, logz[static_cast<std::size_t>(j)] +
                            logK[static_cast<std::size_t>(N - j)]);
    double acc = 0.0;
    for (std::int64_t j = 0; j < N; ++j)
      acc += std::exp(logz[static_cast<std::size_t>(j)] +
                      logK[static_cast<std::size_t>(N - j)] - mx);
    const double lzN = site_log_weight(inst, N) + mx + std::log(acc);
    if (std::abs(lzN - logz[static_cast<std::size_t>(N)]) > 1e-9)
      throw InconsistentTable("partition table disagrees with instance at site N");
  }

  std::vector<PathSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t p = 0; p < count; ++p) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(p)));
    PathSample sample;
    sample.boundary = boundary;

    std::int64_t cur = N;
    if (boundary == Boundary::kFree) {
      // Last contact j with probability z(j) Kbar(N-j) / Z_free. Scan from N
      // downward; if rounding leaves the draw uncovered, fall back to 0.
      const double u = rng.u01();
      double cum = 0.0;
      cur = 0;
      for (std::int64_t j = N; j >= 0; --j) {
        cum += std::exp(logz[static_cast<std::size_t>(j)] +
                        logKbar[static_cast<std::size_t>(N - j)] -
                        table.log_Z_free);
        if (u < cum) {
          cur = j;
          break;
        }
      }
    }

    std::vector<std::int64_t> pts;
    while (cur > 0) {
      pts.push_back(cur);
      const double wn = site_log_weight(inst, cur);
      const double lzn = logz[static_cast<std::size_t>(cur)];
      const double u = rng.u01();
      double cum = 0.0;
      std::int64_t nxt = 0;  // j = 0 always carries positive mass
      for (std::int64_t j = cur - 1; j >= 0; --j) {
        cum += std::exp(logz[static_cast<std::size_t>(j)] +
                        logK[static_cast<std::size_t>(cur - j)] + wn - lzn);
        if (u < cum) {
          nxt = j;
          break;
        }
      }
      cur = nxt;
    }
    std::reverse(pts.begin(), pts.end());
    sample.contact_points = std::move(pts);
    out.push_back(std::move(sample));
  }
  return out;
}

StretchVisitStats stretch_visit_count(const PathSample& path,
                                      const Environment& env) {
  const std::vector<std::int64_t>& hp = env.hat_points;
  StretchVisitStats stats;
  stats.per_stretch_contacts.assign(env.signs.size(), 0);
  for (std::int64_t c : path.contact_points) {
    if (c < 1 || c > env.length())
      throw SetOutOfRange("contact outside the environment");
    // Stretch k covers (hp[k], hp[k+1]] (the last one runs to the end), so a
    // contact at c belongs to the largest k with hp[k] < c.
    const auto it = std::upper_bound(hp.begin(), hp.end(), c - 1);
    const std::size_t k = static_cast<std::size_t>((it - hp.begin()) - 1);
    stats.per_stretch_contacts[k] += 1;
  }
  for (std::int64_t v : stats.per_stretch_contacts)
    if (v > 0) stats.visited_count += 1;
  return stats;
}

std::pair<double, double> disorder_average_bound(const PathSample& path,
                                                 const Environment& env,
                                                 double beta) {
  if (env.construction_tag != Construction::kA)
    throw WrongConstruction(
        "stretch values must be independent for this average");
  if (!(beta >= 0.0)) throw Error("beta must be >= 0");
  const StretchVisitStats stats = stretch_visit_count(path, env);
  // Per visited stretch, averaging over its two equally likely values gives
  // (1 + e^(-beta c)) / 2 with c contacts there; c >= 1 caps each factor at
  // (1 + e^(-beta)) / 2. Accumulating the cap factor by factor keeps
  // exact <= bound bitwise (relies on monotone exp and multiplication).
  const double cap = 0.5 * (1.0 + std::exp(-beta));
  double exact = 1.0;
  double bound = 1.0;
  for (std::int64_t c : stats.per_stretch_contacts) {
    if (c == 0) continue;
    exact *= 0.5 * (1.0 + std::exp(-beta * static_cast<double>(c)));
    bound *= cap;
  }
  return {exact, bound};
}

std::pair<double, double> coarse_grain_upper_bound(
    const PinningInstance& inst, const std::vector<std::int64_t>& block_ends) {
  validate_instance(inst);
  if (block_ends.empty()) throw BadPartition("no blocks given");
  if (block_ends.front() < 1) throw BadPartition("first block end must be >= 1");
  for (std::size_t i = 1; i < block_ends.size(); ++i)
    if (block_ends[i] <= block_ends[i - 1])
      throw BadPartition("block ends must be strictly increasing");
  if (block_ends.back() != inst.N)
    throw BadPartition("blocks must end exactly at the system size");

  const PartitionTable table = compute_partition(inst);
  const double lhs = table.log_Z_free;
  const std::vector<double>& logK = inst.law.log_pmf_table();
  const std::vector<double>& logKbar = inst.law.log_survival_table();

  double rhs = 0.0;
  std::int64_t lo = 0;
  for (std::int64_t hi : block_ends) {
    // Backward within the block: value of the chain restarted at x and
    // confined to (x, hi], decomposed on the next contact.
    const std::int64_t len = hi - lo;
    std::vector<double> logZx(static_cast<std::size_t>(len), kNegInf);
    double best = kNegInf;
    for (std::int64_t x = hi; x > lo; --x) {
      double mx = logKbar[static_cast<std::size_t>(hi - x)];
      for (std::int64_t yy = x + 1; yy <= hi; ++yy)
        mx = std::max(mx, logK[static_cast<std::size_t>(yy - x)] +
                              logZx[static_cast<std::size_t>(yy - lo - 1)]);
      double acc = std::exp(logKbar[static_cast<std::size_t>(hi - x)] - mx);
      for (std::int64_t yy = x + 1; yy <= hi; ++yy)
        acc += std::exp(logK[static_cast<std::size_t>(yy - x)] +
                        logZx[static_cast<std::size_t>(yy - lo - 1)] - mx);
      const double v = site_log_weight(inst, x) + mx + std::log(acc);
      logZx[static_cast<std::size_t>(x - lo - 1)] = v;
      best = std::max(best, v);
    }
    rhs += std::max(0.0, best);
    lo = hi;
  }
  return {lhs, rhs};
}

std::optional<double> longest_stretch_bound_margin(
    const PinningInstance& inst, const PartitionTable& table) {
  validate_instance(inst);
  const std::vector<std::int64_t>& hp = inst.env.hat_points;
  const std::vector<std::int8_t>& signs = inst.env.signs;
  const std::int64_t N = inst.N;

  // Largest completed zero-valued stretch strictly inside (0, N): it must
  // start after 0 (so the entry jump has positive length) and end before N
  // (so the exit jump does too).
  std::int64_t best_gap = 0;
  std::int64_t best_start = 0;
  std::int64_t best_end = 0;
  for (std::size_t i = 1; i < hp.size(); ++i) {
    const std::int64_t start = hp[i - 1];
    const std::int64_t end = hp[i];
    if (start < 1 || end >= N) continue;
    if (signs[i - 1] != 0) continue;
    if (end - start > best_gap) {
      best_gap = end - start;
      best_start = start;
      best_end = end;
    }
  }
  if (best_gap == 0) return std::nullopt;

  // One trajectory family: jump to the stretch start, run the disorder-free
  // chain across it, jump out to N. Boundary site values are unknown to the
  // bound, so both collected weights are lower-bounded by h - beta.
  const double bound = inst.law.log_pmf(best_start) + (inst.h - inst.beta) +
                       homogeneous_pinned_log(inst.law, best_gap, inst.h) +
                       inst.law.log_pmf(N - best_end) + (inst.h - inst.beta);
  return table.log_Z_pinned - bound;
}

}  // namespace pinlab
