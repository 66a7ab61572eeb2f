#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "pinlab/law.hpp"
#include "pinlab/rng.hpp"

namespace pinlab {

// How the stretch signs are assigned:
//   kA — independent fair {0,-1} sign per stretch;
//   kB — deterministic alternation 0,-1,0,... (always starts with a 0-stretch).
enum class Construction : std::uint8_t { kA = 0, kB = 1 };

// Parameters of the stretch-generating renewal process.
struct DisorderParams {
  double tilde_alpha = 0.0;  // stretch-law exponent, must be > 1
  std::int64_t hat_horizon = 0;
  // Power law with exponent tilde_alpha, cached to hat_horizon; shared so that
  // copies of the params reuse the same immutable tables.
  std::shared_ptr<const InterArrivalLaw> hat_law;

  // Lazily grown pmf prefix of the alternating construction's stretch law
  // (its recursion is prefix-stable, so extension never changes old entries).
  std::shared_ptr<std::vector<double>> tilde_pmf_cache;
  std::shared_ptr<std::mutex> tilde_mutex;
};

DisorderParams make_disorder_params(double tilde_alpha, std::int64_t hat_horizon);

// A realized disorder sequence on sites 1..length.
struct Environment {
  std::vector<std::int8_t> omega;        // 1-based; omega[0] == 0 is padding
  std::vector<std::int64_t> hat_points;  // stretch boundaries <= length, starting at 0
  std::vector<std::int8_t> signs;        // one sign per started stretch
  Construction construction_tag = Construction::kA;

  // Provenance, carried so environments can be serialized and regenerated.
  double tilde_alpha = 0.0;
  std::int64_t hat_horizon = 0;
  std::uint64_t seed = 0;

  std::int64_t length() const {
    return static_cast<std::int64_t>(omega.size()) - 1;
  }
  std::int8_t value_at(std::int64_t n) const;  // range-checked omega[n], n in [1,length]
};

// Exact autocovariance of the disorder at a fixed base site.
struct CovarianceTable {
  std::int64_t base_index = 0;  // the site i
  std::vector<double> values;   // values[k] = Cov(omega_i, omega_{i+k}), k = 0..k_max
};

// Independent fair sign per stretch; deterministic in (params, length, seed).
Environment sample_env_hat(const DisorderParams& params, std::int64_t length,
                           std::uint64_t seed);

// Inter-arrival law of every second stretch boundary (geometric mixture of
// convolution powers), computed by the exact recursion.
InterArrivalLaw tilde_interarrival_law(const DisorderParams& params,
                                       std::int64_t horizon);

// Alternating construction: stretch signs 0,-1,0,-1,... over its own renewal.
Environment sample_env_tilde(const DisorderParams& params, std::int64_t length,
                             std::uint64_t seed);

// Exact Cov(omega_i, omega_{i+k}) for k = 0..k_max for the independent-sign
// construction, via the renewal-mass table of the stretch law.
CovarianceTable exact_covariance(const DisorderParams& params, std::int64_t i,
                                 std::int64_t k_max);

// Flat binary round-trip: header (params, seed, tag, length) plus the omega
// bits. Loading regenerates from the stored seed and fails closed on mismatch.
void save_environment(const Environment& env, const std::string& path);
Environment load_environment(const std::string& path);

}  // namespace pinlab
