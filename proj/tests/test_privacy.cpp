#include <cmath>
#include <vector>

#include <doctest.h>

#include "otazo/privacy.hpp"
#include "otazo/rng.hpp"

using namespace otazo;

TEST_CASE("KahanSum tracks a long-double reference") {
  CounterRng rng(1);
  KahanSum k;
  long double ref = 0.0L;
  for (int i = 0; i < 8000; ++i) {
    const double x = 1e-4 * rng.next_unit();
    k.add(x);
    ref += x;
  }
  CHECK(std::abs(k.value() - static_cast<double>(ref)) <=
        1e-12 * static_cast<double>(ref));
}

TEST_CASE("C function values and shape") {
  CHECK(c_function(0.0) == 0.0);
  CHECK(c_function(1.0) ==
        doctest::Approx(4.818029094698722057).epsilon(1e-14));
  CHECK(c_function(2.0) ==
        doctest::Approx(193.5454025571272682).epsilon(1e-14));
  CHECK(c_function(1.5) > c_function(1.0));
  CHECK(c_function(2.5) > c_function(2.0));
  CHECK_THROWS_AS(c_function(-0.5), std::invalid_argument);
  CHECK_THROWS_AS(c_function(27.0), std::domain_error);
}

TEST_CASE("C inverse round trips and hits the frozen probe") {
  for (double x : {0.1, 1.0, 2.0, 5.0, 10.0}) {
    const double back = c_inverse(c_function(x));
    REQUIRE(std::abs(back - x) <= 1e-10 * std::max(1.0, x));
  }
  CHECK(c_inverse(100.0) ==
        doctest::Approx(1.8488488430976211597).epsilon(1e-10));
  CHECK(c_inverse(1e-8) < 1e-4);
  CHECK_THROWS_AS(c_inverse(0.0), std::invalid_argument);
  CHECK_THROWS_AS(c_inverse(-1.0), std::invalid_argument);
}

TEST_CASE("privacy budget radius matches the frozen oracle") {
  CHECK(r_dp(5.0, 0.01) ==
        doctest::Approx(1.1079075016936914957).epsilon(1e-12));
  CHECK(r_dp(1.0, 0.01) ==
        doctest::Approx(0.0640660046981920609).epsilon(1e-12));
  CHECK(r_dp(5.0, 0.01) > r_dp(1.0, 0.01));
  CHECK(r_dp(5.0, 0.1) > r_dp(5.0, 0.01));
  CHECK(r_dp(1e-12, 0.01) < 1e-24);  // quadratic vanishing in epsilon
  CHECK_THROWS_AS(r_dp(0.0, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(r_dp(5.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(r_dp(5.0, 1.0), std::invalid_argument);
}

TEST_CASE("per-iteration cost formula") {
  CHECK(iteration_cost(1.0, 1.0, {std::sqrt(2.0)}) ==
        doctest::Approx(1.0).epsilon(1e-15));
  const double base = iteration_cost(0.7, 3.0, {1.3});
  CHECK(iteration_cost(0.7, 3.0, {2.6}) ==
        doctest::Approx(base / 4.0).epsilon(1e-15));
  CHECK(iteration_cost(1.4, 3.0, {1.3}) ==
        doctest::Approx(base * 4.0).epsilon(1e-15));
  CHECK_THROWS_AS(iteration_cost(1.0, 1.0, {0.0}), std::domain_error);
}

TEST_CASE("budget construction derives the radius") {
  const PrivacyBudget b = PrivacyBudget::make(5.0, 0.01);
  CHECK(b.epsilon == 5.0);
  CHECK(b.delta == 0.01);
  CHECK(b.r_dp == doctest::Approx(1.1079075016936914957).epsilon(1e-12));
}

TEST_CASE("accountant verdicts at and around the boundary") {
  const PrivacyBudget b = PrivacyBudget::make(5.0, 0.01);

  std::vector<PrivacyCostRecord> none;
  const AccountantVerdict empty = accountant_check(none, b);
  CHECK(empty.pass);
  CHECK(empty.total == 0.0);
  CHECK(empty.slack == doctest::Approx(b.r_dp).epsilon(1e-15));

  std::vector<PrivacyCostRecord> exact = {{1, b.r_dp}};
  CHECK(accountant_check(exact, b).pass);

  std::vector<PrivacyCostRecord> hair = {{1, b.r_dp + 0.5e-9}};
  CHECK(accountant_check(hair, b).pass);

  std::vector<PrivacyCostRecord> over = {{1, b.r_dp * 1.01}};
  const AccountantVerdict fail = accountant_check(over, b);
  CHECK_FALSE(fail.pass);
  CHECK(fail.slack < 0.0);
  CHECK(fail.total == doctest::Approx(b.r_dp * 1.01).epsilon(1e-15));
}

TEST_CASE("monte-carlo tail is zero without payloads and small at saturation") {
  const int T = 5;
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(T);
  const Eigen::VectorXd m = Eigen::VectorXd::Ones(T);
  const Eigen::VectorXd gamma = Eigen::VectorXd::Ones(T);
  CHECK(montecarlo_privacy_tail(zeros, m, gamma, 5.0, 5000, 7) == 0.0);

  const double r = r_dp(5.0, 0.01);
  const Eigen::VectorXd c =
      Eigen::VectorXd::Constant(T, std::sqrt(r / (2.0 * T)));
  const long trials = 20000;
  const double tail = montecarlo_privacy_tail(c, m, gamma, 5.0, trials, 7);
  const double se = std::sqrt(0.01 * 0.99 / static_cast<double>(trials));
  CHECK(tail <= 0.01 + 3.0 * se);

  const double tail_half =
      montecarlo_privacy_tail(0.5 * c, m, gamma, 5.0, trials, 7);
  const double band =
      3.0 * std::sqrt(std::max(tail, 1e-3) / static_cast<double>(trials));
  CHECK(tail_half <= tail + band);
}
