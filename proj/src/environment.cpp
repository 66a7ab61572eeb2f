#include "pinlab/environment.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "pinlab/errors.hpp"
#include "pinlab/renewal.hpp"

namespace pinlab {

DisorderParams make_disorder_params(double tilde_alpha, std::int64_t hat_horizon) {
  if (!(tilde_alpha > 1.0))
    throw StretchMeanDiverges(
        "disorder stretch exponent must exceed 1, got " + std::to_string(tilde_alpha));
  DisorderParams params;
  params.tilde_alpha = tilde_alpha;
  params.hat_horizon = hat_horizon;
  params.hat_law =
      std::make_shared<const InterArrivalLaw>(make_power_law(tilde_alpha, hat_horizon));
  params.tilde_pmf_cache = std::make_shared<std::vector<double>>();
  params.tilde_mutex = std::make_shared<std::mutex>();
  return params;
}

std::int8_t Environment::value_at(std::int64_t n) const {
  if (n < 1 || n > length())
    throw Error("environment site " + std::to_string(n) + " outside [1," +
                std::to_string(length()) + "]");
  return omega[static_cast<std::size_t>(n)];
}

namespace {

// Shared stretch-filling loop. `next_sign` supplies the sign of stretch i (0-based)
// and may consume RNG draws; it is called after the stretch's gap draw.
template <typename SignFn>
Environment fill_environment(const InterArrivalLaw& law, std::int64_t length,
                             std::uint64_t seed, SignFn next_sign) {
  Environment env;
  env.omega.assign(static_cast<std::size_t>(length) + 1, 0);
  env.hat_points.push_back(0);
  env.seed = seed;
  SplitMix64 rng(seed);
  std::int64_t last = 0;
  std::int64_t stretch = 0;
  while (last < length) {
    const std::int64_t gap = law.sample_gap(rng);  // cache+1 encodes "beyond cache"
    const std::int8_t sign = next_sign(stretch, rng);
    env.signs.push_back(sign);
    const std::int64_t next = last + gap;
    const std::int64_t fill_to = std::min(next, length);
    for (std::int64_t n = last + 1; n <= fill_to; ++n)
      env.omega[static_cast<std::size_t>(n)] = sign;
    if (next <= length) env.hat_points.push_back(next);
    last = next;
    ++stretch;
  }
  return env;
}

}  // namespace

Environment sample_env_hat(const DisorderParams& params, std::int64_t length,
                           std::uint64_t seed) {
  if (length < 1) throw Error("environment length must be >= 1");
  if (length > params.hat_horizon)
    throw HorizonExceedsCache("environment length " + std::to_string(length) +
                              " exceeds stretch-law cache " +
                              std::to_string(params.hat_horizon));
  Environment env = fill_environment(
      *params.hat_law, length, seed, [](std::int64_t, SplitMix64& rng) {
        return (rng.next() & 1u) ? std::int8_t(-1) : std::int8_t(0);
      });
  env.construction_tag = Construction::kA;
  env.tilde_alpha = params.tilde_alpha;
  env.hat_horizon = params.hat_horizon;
  return env;
}

InterArrivalLaw tilde_interarrival_law(const DisorderParams& params,
                                       std::int64_t horizon) {
  if (horizon < 2) throw Error("tilde_interarrival_law: horizon must be >= 2");
  if (horizon > params.hat_horizon)
    throw HorizonExceedsCache("tilde horizon " + std::to_string(horizon) +
                              " exceeds stretch-law cache " +
                              std::to_string(params.hat_horizon));
  std::lock_guard<std::mutex> lock(*params.tilde_mutex);
  std::vector<double>& kt = *params.tilde_pmf_cache;  // kt[n], n >= 1; kt[0] = 0
  if (kt.empty()) kt.push_back(0.0);
  const std::int64_t have = static_cast<std::int64_t>(kt.size()) - 1;
  if (have < horizon) {
    // Grow geometrically: the recursion is prefix-stable, so this only appends.
    const std::int64_t target =
        std::min(params.hat_horizon, std::max(horizon, 2 * have));
    const std::vector<double>& kh = params.hat_law->pmf_table();
    kt.reserve(static_cast<std::size_t>(target) + 1);
    for (std::int64_t n = have + 1; n <= target; ++n) {
      double acc = 0.5 * kh[static_cast<std::size_t>(n)];
      for (std::int64_t j = 1; j < n; ++j)
        acc += 0.5 * kh[static_cast<std::size_t>(j)] * kt[static_cast<std::size_t>(n - j)];
      kt.push_back(acc);
    }
  }
  const std::vector<double> prefix(kt.begin() + 1, kt.begin() + 1 + horizon);
  return InterArrivalLaw::from_pmf(params.tilde_alpha, prefix);
}

Environment sample_env_tilde(const DisorderParams& params, std::int64_t length,
                             std::uint64_t seed) {
  if (length < 2) throw Error("environment length must be >= 2 for the alternating construction");
  if (length > params.hat_horizon)
    throw HorizonExceedsCache("environment length " + std::to_string(length) +
                              " exceeds stretch-law cache " +
                              std::to_string(params.hat_horizon));
  const InterArrivalLaw law = tilde_interarrival_law(params, length);
  Environment env = fill_environment(
      law, length, seed, [](std::int64_t stretch, SplitMix64&) {
        return (stretch % 2 == 0) ? std::int8_t(0) : std::int8_t(-1);
      });
  env.construction_tag = Construction::kB;
  env.tilde_alpha = params.tilde_alpha;
  env.hat_horizon = params.hat_horizon;
  return env;
}

CovarianceTable exact_covariance(const DisorderParams& params, std::int64_t i,
                                 std::int64_t k_max) {
  if (i < 1 || k_max < 0) throw Error("exact_covariance: need i >= 1 and k_max >= 0");
  if (i + k_max > params.hat_horizon)
    throw HorizonExceedsCache("exact_covariance: i + k_max " +
                              std::to_string(i + k_max) +
                              " exceeds stretch-law cache " +
                              std::to_string(params.hat_horizon));
  // Two sites share a sign iff no stretch boundary lies in [i, i+k-1]; summing
  // over the last boundary l < i gives mass(l) * P(gap from l clears i+k-1).
  const RenewalMassTable mass = renewal_mass_table(*params.hat_law, i - 1);
  CovarianceTable table;
  table.base_index = i;
  table.values.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (std::int64_t k = 0; k <= k_max; ++k) {
    double same_stretch = 0.0;
    for (std::int64_t l = 0; l < i; ++l)
      same_stretch += mass.u[static_cast<std::size_t>(l)] *
                      params.hat_law->survival(i + k - l - 1);
    table.values[static_cast<std::size_t>(k)] = 0.25 * same_stretch;
  }
  // At k = 0 the sum is the certainty that site i lies in some stretch.
  if (std::fabs(table.values[0] - 0.25) > 1e-9)
    throw InconsistentTable("stretch-boundary decomposition does not sum to 1 at k=0");
  table.values[0] = 0.25;
  return table;
}

namespace {

constexpr char kMagic[8] = {'P', 'I', 'N', 'L', 'E', 'N', 'V', '1'};

void put_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void get_bytes(std::ifstream& in, void* p, std::size_t n, const std::string& path) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw Error("environment file truncated: " + path);
}

std::vector<std::uint8_t> pack_omega(const Environment& env) {
  const std::int64_t n = env.length();
  std::vector<std::uint8_t> bits(static_cast<std::size_t>((n + 7) / 8), 0);
  for (std::int64_t s = 1; s <= n; ++s)
    if (env.omega[static_cast<std::size_t>(s)] == -1)
      bits[static_cast<std::size_t>((s - 1) / 8)] |=
          static_cast<std::uint8_t>(1u << ((s - 1) % 8));
  return bits;
}

}  // namespace

void save_environment(const Environment& env, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open environment file for writing: " + path);
  put_bytes(out, kMagic, sizeof(kMagic));
  const std::uint8_t version = 1;
  const std::uint8_t tag = static_cast<std::uint8_t>(env.construction_tag);
  put_bytes(out, &version, 1);
  put_bytes(out, &tag, 1);
  put_bytes(out, &env.tilde_alpha, 8);
  put_bytes(out, &env.seed, 8);
  const std::uint64_t length = static_cast<std::uint64_t>(env.length());
  put_bytes(out, &length, 8);
  put_bytes(out, &env.hat_horizon, 8);
  const std::vector<std::uint8_t> bits = pack_omega(env);
  if (!bits.empty()) put_bytes(out, bits.data(), bits.size());
  out.flush();
  if (!out) throw Error("failed writing environment file: " + path);
}

Environment load_environment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open environment file: " + path);
  char magic[8];
  get_bytes(in, magic, 8, path);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw Error("not an environment file (bad magic): " + path);
  std::uint8_t version = 0, tag = 0;
  get_bytes(in, &version, 1, path);
  if (version != 1) throw Error("unsupported environment file version: " + path);
  get_bytes(in, &tag, 1, path);
  if (tag > 1) throw Error("unknown construction tag in environment file: " + path);
  double tilde_alpha = 0.0;
  std::uint64_t seed = 0, length = 0;
  std::int64_t hat_horizon = 0;
  get_bytes(in, &tilde_alpha, 8, path);
  get_bytes(in, &seed, 8, path);
  get_bytes(in, &length, 8, path);
  get_bytes(in, &hat_horizon, 8, path);
  if (length < 1 || static_cast<std::int64_t>(length) > hat_horizon)
    throw Error("corrupt environment header: " + path);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>((length + 7) / 8), 0);
  if (!bits.empty()) get_bytes(in, bits.data(), bits.size(), path);

  // Fail closed: regenerate from the stored seed and demand bit-exact agreement.
  const DisorderParams params = make_disorder_params(tilde_alpha, hat_horizon);
  const Environment env =
      (static_cast<Construction>(tag) == Construction::kA)
          ? sample_env_hat(params, static_cast<std::int64_t>(length), seed)
          : sample_env_tilde(params, static_cast<std::int64_t>(length), seed);
  if (pack_omega(env) != bits)
    throw Error("environment file does not match its stored seed: " + path);
  return env;
}

}  // namespace pinlab
