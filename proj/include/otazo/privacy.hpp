// Differential-privacy budget machinery: the C function and its bisected
// inverse, the (epsilon, delta) -> R_dp budget map, per-iteration cost
// accounting with compensated summation, and a Monte-Carlo check of the
// privacy-loss tail.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "otazo/channel.hpp"

namespace otazo {

// Compensated (Kahan) accumulator; keeps 8000-term cost sums stable enough
// for 1e-9 budget comparisons.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double c_function(double x);
double c_inverse(double y);
double r_dp(double epsilon, double delta);

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  double r_dp = 0.0;     // derived from (epsilon, delta)
  double consumed = 0.0;

  static PrivacyBudget make(double epsilon, double delta);
};

struct PrivacyCostRecord {
  long iteration = 0;
  double cost = 0.0;  // the summand 2 c^2 gamma^2 / m^2
};

// Digital callers pass gamma = 1 (a sign has unit magnitude bound).
double iteration_cost(double c, double gamma, const EffectiveNoise& m);

struct AccountantVerdict {
  bool pass = false;
  double slack = 0.0;  // r_dp - total consumed
  double total = 0.0;
};

AccountantVerdict accountant_check(std::span<const PrivacyCostRecord> records,
                                   const PrivacyBudget& budget);

// Simulates the worst-case privacy loss L = sum_t (2 r_t v_t + v_t^2)/(2 m_t^2)
// with r_t ~ N(0, m_t^2) and v_t = 2 c_t gamma_t, and returns the fraction of
// trials with |L| > epsilon. c_t = 0 entries contribute nothing (no payload).
double montecarlo_privacy_tail(const Eigen::VectorXd& c,
                               const Eigen::VectorXd& m,
                               const Eigen::VectorXd& gamma, double epsilon,
                               long trials, std::uint64_t seed);

}  // namespace otazo
