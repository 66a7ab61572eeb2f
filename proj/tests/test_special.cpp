#include <doctest.h>

#include <cmath>

#include "pinlab/errors.hpp"
#include "pinlab/special.hpp"

#include "oracle_constants.hpp"

using namespace pinlab;

TEST_SUITE("special") {

TEST_CASE("zeta matches frozen high-precision values") {
  CHECK(riemann_zeta(1.5) == doctest::Approx(oracle::kZeta15).epsilon(1e-14));
  CHECK(riemann_zeta(2.5) == doctest::Approx(oracle::kZeta25).epsilon(1e-14));
  CHECK(riemann_zeta(2.0) == doctest::Approx(oracle::kZeta2).epsilon(1e-14));
  CHECK(riemann_zeta(3.0) == doctest::Approx(oracle::kZeta3).epsilon(1e-14));
  CHECK(riemann_zeta(0.5) == doctest::Approx(oracle::kZeta05).epsilon(1e-14));
  CHECK(riemann_zeta(-0.5) == doctest::Approx(oracle::kZetaM05).epsilon(1e-13));
}

TEST_CASE("zeta special points") {
  CHECK(riemann_zeta(0.0) == doctest::Approx(-0.5).epsilon(1e-15));
  // Trivial zeros at negative even integers.
  CHECK(std::fabs(riemann_zeta(-2.0)) < 1e-12);
  CHECK(std::fabs(riemann_zeta(-4.0)) < 1e-12);
  // zeta(-1) = -1/12, zeta(-3) = 1/120 via the functional equation.
  CHECK(riemann_zeta(-1.0) == doctest::Approx(-1.0 / 12.0).epsilon(1e-12));
  CHECK(riemann_zeta(-3.0) == doctest::Approx(1.0 / 120.0).epsilon(1e-12));
  CHECK_THROWS_AS(riemann_zeta(1.0), Error);
}

TEST_CASE("sin_pi hits exact zeros and extrema") {
  CHECK(sin_pi(0.0) == 0.0);
  CHECK(sin_pi(5.0) == 0.0);
  CHECK(sin_pi(-12.0) == 0.0);
  CHECK(sin_pi(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sin_pi(-0.5) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(sin_pi(2.5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("log_add_exp and log_sum_exp") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(log_add_exp(0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(log_add_exp(-inf, 3.0) == 3.0);
  CHECK(log_add_exp(3.0, -inf) == 3.0);
  CHECK(log_add_exp(1000.0, 999.0) ==
        doctest::Approx(1000.0 + std::log1p(std::exp(-1.0))).epsilon(1e-15));
  std::vector<double> xs{std::log(1.0), std::log(2.0), std::log(3.0)};
  CHECK(log_sum_exp(xs) == doctest::Approx(std::log(6.0)).epsilon(1e-15));
  CHECK(log_sum_exp({}) == -inf);
}

TEST_CASE("regularized gamma identities") {
  // P + Q = 1.
  for (double a : {0.5, 1.0, 2.5, 10.0}) {
    for (double x : {0.1, 1.0, 3.0, 20.0}) {
      CHECK(regularized_gamma_p(a, x) + regularized_gamma_q(a, x) ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  // Q(1, x) = e^{-x}: chi-square with 2 dof.
  CHECK(regularized_gamma_q(1.0, 2.3) == doctest::Approx(std::exp(-2.3)).epsilon(1e-12));
  // Q(1/2, x) = erfc(sqrt(x)): chi-square with 1 dof.
  CHECK(regularized_gamma_q(0.5, 1.0) ==
        doctest::Approx(std::erfc(1.0)).epsilon(1e-12));
  CHECK(regularized_gamma_p(3.0, 0.0) == 0.0);
  CHECK(regularized_gamma_q(3.0, 0.0) == 1.0);
}

TEST_CASE("kolmogorov tail reference points") {
  // Q(t) at classical quantiles: Q(1.3581) ~ 0.05, Q(1.6276) ~ 0.01.
  CHECK(kolmogorov_tail(1.3581) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(kolmogorov_tail(1.6276) == doctest::Approx(0.01).epsilon(2e-3));
  CHECK(kolmogorov_tail(0.05) == 1.0);
  CHECK(kolmogorov_tail(5.0) < 1e-20);
  // Monotone non-increasing.
  double prev = 1.0;
  for (double t = 0.3; t < 3.0; t += 0.1) {
    const double q = kolmogorov_tail(t);
    CHECK(q <= prev + 1e-15);
    prev = q;
  }
}

}  // TEST_SUITE
