#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>
#include <vector>

#include "pinlab/environment.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/stats.hpp"

using namespace pinlab;

namespace {

// Lengths of the first two maximal constant runs of omega; a run touching the
// boundary (or absent) is encoded as length+1, identically for both
// constructions, so distributional comparisons stay apples-to-apples.
std::pair<double, double> first_two_runs(const Environment& env) {
  const std::int64_t len = env.length();
  std::int64_t i = 1;
  const std::int8_t s1 = env.value_at(1);
  while (i <= len && env.value_at(i) == s1) ++i;
  const double r1 = (i > len) ? static_cast<double>(len + 1)
                              : static_cast<double>(i - 1);
  double r2 = static_cast<double>(len + 1);
  if (i <= len) {
    const std::int8_t s2 = env.value_at(i);
    std::int64_t j = i;
    while (j <= len && env.value_at(j) == s2) ++j;
    if (j <= len) r2 = static_cast<double>(j - i);
  }
  return {r1, r2};
}

}  // namespace

TEST_SUITE("environment") {

TEST_CASE("disorder params validation") {
  CHECK_THROWS_AS(make_disorder_params(1.0, 64), StretchMeanDiverges);
  CHECK_THROWS_AS(make_disorder_params(0.7, 64), StretchMeanDiverges);
  CHECK_THROWS_AS(make_disorder_params(-1.0, 64), StretchMeanDiverges);
  const DisorderParams p = make_disorder_params(1.5, 64);
  CHECK(p.tilde_alpha == 1.5);
  CHECK(p.hat_law->exponent() == 1.5);
}

TEST_CASE("independent-sign environment structure") {
  const DisorderParams params = make_disorder_params(1.5, 1024);
  const Environment a = sample_env_hat(params, 1024, 7);
  const Environment b = sample_env_hat(params, 1024, 7);
  CHECK(a.omega == b.omega);
  CHECK(a.hat_points == b.hat_points);
  CHECK(a.signs == b.signs);
  CHECK(a.construction_tag == Construction::kA);
  CHECK(a.length() == 1024);
  CHECK(a.omega[0] == 0);
  for (std::int64_t n = 1; n <= a.length(); ++n) {
    const std::int8_t v = a.value_at(n);
    CHECK((v == 0 || v == -1));
  }
  REQUIRE(!a.hat_points.empty());
  CHECK(a.hat_points.front() == 0);
  for (std::size_t i = 1; i < a.hat_points.size(); ++i) {
    CHECK(a.hat_points[i] > a.hat_points[i - 1]);
    CHECK(a.hat_points[i] <= a.length());
  }
  // One sign per started stretch; the last stretch is unfinished unless the
  // final recorded point is exactly the boundary.
  if (a.hat_points.back() == a.length())
    CHECK(a.signs.size() == a.hat_points.size() - 1);
  else
    CHECK(a.signs.size() == a.hat_points.size());
  // Piecewise constant: sites within stretch i all carry signs[i].
  for (std::size_t i = 0; i + 1 < a.hat_points.size(); ++i)
    for (std::int64_t n = a.hat_points[i] + 1; n <= a.hat_points[i + 1]; ++n)
      CHECK(a.value_at(n) == a.signs[i]);
  for (std::int64_t n = a.hat_points.back() + 1; n <= a.length(); ++n)
    CHECK(a.value_at(n) == a.signs.back());
  CHECK_THROWS_AS(sample_env_hat(params, 1025, 7), HorizonExceedsCache);
  CHECK_THROWS_AS(a.value_at(0), Error);
  CHECK_THROWS_AS(a.value_at(1025), Error);
}

TEST_CASE("marginal zero-frequency is one half" * doctest::timeout(300)) {
  const DisorderParams params = make_disorder_params(1.5, 1000000);
  std::vector<double> frac;
  for (int s = 0; s < 50; ++s) {
    const Environment env = sample_env_hat(params, 1000000, derive_seed(31, s));
    std::int64_t zeros = 0;
    for (std::int64_t n = 1; n <= env.length(); ++n)
      if (env.value_at(n) == 0) ++zeros;
    frac.push_back(static_cast<double>(zeros) / static_cast<double>(env.length()));
  }
  const MeanStderr ms = mean_stderr(frac);
  CHECK(std::fabs(ms.mean - 0.5) < 3.0 * ms.stderr_of_mean);
}

TEST_CASE("exact covariance table invariants") {
  const DisorderParams params = make_disorder_params(1.5, 1024);
  const CovarianceTable t = exact_covariance(params, 100, 400);
  CHECK(t.base_index == 100);
  CHECK(t.values[0] == 0.25);
  for (std::size_t k = 1; k < t.values.size(); ++k) {
    CHECK(t.values[k] >= 0.0);
    CHECK(t.values[k] <= t.values[k - 1] + 1e-15);
  }
  CHECK_THROWS_AS(exact_covariance(params, 625, 400), HorizonExceedsCache);
  CHECK_THROWS_AS(exact_covariance(params, 0, 10), Error);
}

TEST_CASE("exact covariance matches Monte Carlo" * doctest::timeout(300)) {
  const DisorderParams params = make_disorder_params(1.5, 1024);
  const std::int64_t i = 500;
  const CovarianceTable exact = exact_covariance(params, i, 100);
  const int replicas = 2000;
  const std::vector<std::int64_t> ks{1, 10, 100};
  std::vector<double> hits(ks.size(), 0.0);
  for (int r = 0; r < replicas; ++r) {
    const Environment env = sample_env_hat(params, 600, derive_seed(555, r));
    for (std::size_t m = 0; m < ks.size(); ++m)
      hits[m] += static_cast<double>(env.value_at(i) * env.value_at(i + ks[m]));
  }
  for (std::size_t m = 0; m < ks.size(); ++m) {
    const double p_exact = exact.values[static_cast<std::size_t>(ks[m])] + 0.25;
    const double p_hat = hits[m] / replicas;
    const double sigma = std::sqrt(p_exact * (1.0 - p_exact) / replicas);
    CHECK(std::fabs(p_hat - p_exact) <= 3.0 * sigma);
  }
}

TEST_CASE("alternating-stretch law: closed forms and tail constant" *
          doctest::timeout(300)) {
  const DisorderParams params = make_disorder_params(1.5, 8192);
  const InterArrivalLaw tilde = tilde_interarrival_law(params, 4096);
  const InterArrivalLaw& hat = *params.hat_law;
  CHECK(tilde.pmf(1) == doctest::Approx(hat.pmf(1) / 2.0).epsilon(1e-15));
  CHECK(tilde.pmf(2) ==
        doctest::Approx(hat.pmf(2) / 2.0 + hat.pmf(1) * hat.pmf(1) / 4.0)
            .epsilon(1e-14));
  // Tail constant doubles: n^{1+a} * pmf(n) near the horizon within 10% of
  // twice the base normalizer.
  const double target = 2.0 * hat.normalizer();
  const double at_horizon =
      std::pow(4096.0, 2.5) * tilde.pmf(4096);
  CHECK(std::fabs(at_horizon / target - 1.0) < 0.10);
  // Mass accounting: the un-cached remainder must match the tail asymptote
  // (2*normalizer/alpha) * H^{-alpha}, confirming the recursion sums to 1.
  double mass = 0.0;
  for (std::int64_t n = 1; n <= 4096; ++n) mass += tilde.pmf(n);
  const double remainder = 1.0 - mass;
  const double tail_estimate = (target / 1.5) * std::pow(4096.0, -1.5);
  CHECK(remainder > 0.0);
  CHECK(std::fabs(remainder / tail_estimate - 1.0) < 0.5);
  CHECK(tilde.survival(4096) == doctest::Approx(remainder).epsilon(1e-9));
}

TEST_CASE("alternating-stretch law cache is prefix-stable") {
  const DisorderParams params = make_disorder_params(1.8, 4096);
  const InterArrivalLaw small = tilde_interarrival_law(params, 100);
  const InterArrivalLaw big = tilde_interarrival_law(params, 2048);
  for (std::int64_t n = 1; n <= 100; ++n)
    CHECK(small.pmf(n) == big.pmf(n));  // bitwise: extension must not touch prefix
  CHECK_THROWS_AS(tilde_interarrival_law(params, 4097), HorizonExceedsCache);
}

TEST_CASE("alternating environment structure") {
  const DisorderParams params = make_disorder_params(1.5, 1024);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Environment env = sample_env_tilde(params, 512, seed);
    CHECK(env.construction_tag == Construction::kB);
    CHECK(env.value_at(1) == 0);  // always starts with a zero stretch
    for (std::size_t i = 0; i < env.signs.size(); ++i)
      CHECK(env.signs[i] == ((i % 2 == 0) ? 0 : -1));
  }
  const Environment a = sample_env_tilde(params, 512, 99);
  const Environment b = sample_env_tilde(params, 512, 99);
  CHECK(a.omega == b.omega);
  CHECK(a.hat_points == b.hat_points);
}

TEST_CASE("alternating construction matches conditioned independent signs" *
          doctest::timeout(600)) {
  const DisorderParams params = make_disorder_params(1.5, 1024);
  const std::int64_t length = 512;
  const int want = 10000;
  std::vector<double> a_first, a_second, b_first, b_second;
  a_first.reserve(want);
  b_first.reserve(want);
  // Independent-sign side, conditioned on the first stretch being a 0-stretch.
  std::uint64_t seq = 0;
  while (static_cast<int>(a_first.size()) < want) {
    const Environment env = sample_env_hat(params, length, derive_seed(808, seq++));
    if (env.value_at(1) != 0) continue;
    const auto [r1, r2] = first_two_runs(env);
    a_first.push_back(r1);
    a_second.push_back(r2);
  }
  for (int s = 0; s < want; ++s) {
    const Environment env = sample_env_tilde(params, length, derive_seed(909, s));
    const auto [r1, r2] = first_two_runs(env);
    b_first.push_back(r1);
    b_second.push_back(r2);
  }
  const KsResult first = ks_two_sample(a_first, b_first);
  const KsResult second = ks_two_sample(a_second, b_second);
  CHECK(first.p_value > 0.01);
  CHECK(second.p_value > 0.01);
}

TEST_CASE("environment file round-trip") {
  const DisorderParams params = make_disorder_params(1.5, 1024);
  for (Construction tag : {Construction::kA, Construction::kB}) {
    const Environment env =
        (tag == Construction::kA) ? sample_env_hat(params, 512, 4242)
                                  : sample_env_tilde(params, 512, 4242);
    const std::string path = "env_roundtrip_test.bin";
    save_environment(env, path);
    const Environment back = load_environment(path);
    CHECK(back.omega == env.omega);
    CHECK(back.hat_points == env.hat_points);
    CHECK(back.signs == env.signs);
    CHECK(back.construction_tag == env.construction_tag);
    CHECK(back.tilde_alpha == env.tilde_alpha);
    CHECK(back.hat_horizon == env.hat_horizon);
    CHECK(back.seed == env.seed);
    std::remove(path.c_str());
  }
}

TEST_CASE("environment file tampering fails closed") {
  const DisorderParams params = make_disorder_params(1.5, 1024);
  const Environment env = sample_env_hat(params, 512, 1234);
  const std::string path = "env_tamper_test.bin";
  save_environment(env, path);

  // Flip one payload bit.
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(0, std::ios::end);
    const std::streamoff size = f.tellg();
    f.seekp(size - 1);
    char c = 0;
    f.seekg(size - 1);
    f.read(&c, 1);
    c = static_cast<char>(c ^ 0x01);
    f.seekp(size - 1);
    f.write(&c, 1);
  }
  CHECK_THROWS_AS(load_environment(path), Error);

  // Truncated file.
  save_environment(env, path);
  {
    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 10));
  }
  CHECK_THROWS_AS(load_environment(path), Error);

  // Wrong magic.
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write("NOTANENV", 8);
  }
  CHECK_THROWS_AS(load_environment(path), Error);
  std::remove(path.c_str());
}

}  // TEST_SUITE
