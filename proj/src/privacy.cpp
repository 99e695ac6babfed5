#include "otazo/privacy.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "otazo/rng.hpp"

namespace otazo {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

// Non-throwing evaluation used by the bisection; overflow saturates to +inf,
// which still orders correctly against any finite target.
double c_eval(double x) { return kSqrtPi * x * std::exp(x * x); }

}  // namespace

double c_function(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("c_function: x must be >= 0");
  if (x * x > 708.0) {
    char msg[96];
    std::snprintf(msg, sizeof msg,
                  "c_function: exp(x^2) overflows double for x=%.6g (max ~26.6)",
                  x);
    throw std::domain_error(msg);
  }
  return c_eval(x);
}

double c_inverse(double y) {
  if (!(y > 0.0)) throw std::invalid_argument("c_inverse: y must be > 0");
  double lo = 0.0;
  double hi = 1.0;
  while (c_eval(hi) < y) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double val = c_eval(mid);
    if (std::abs(val - y) <= 1e-12 * y) return mid;
    if (val < y)
      lo = mid;
    else
      hi = mid;
  }
  // The interval shrinks below double resolution long before 200 steps; take
  // the closer endpoint if the residual test alone never fired.
  const double mid = 0.5 * (lo + hi);
  if (std::abs(c_eval(mid) - y) <= 1e-9 * y) return mid;
  throw std::runtime_error("c_inverse: bisection failed to converge");
}

double r_dp(double epsilon, double delta) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("r_dp: epsilon must be > 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("r_dp: delta out of (0,1)");
  const double q = c_inverse(1.0 / delta);
  // (sqrt(eps + q^2) - q)^2 rewritten to avoid cancellation for small eps.
  const double root = epsilon / (std::sqrt(epsilon + q * q) + q);
  return root * root;
}

PrivacyBudget PrivacyBudget::make(double epsilon, double delta) {
  PrivacyBudget b;
  b.epsilon = epsilon;
  b.delta = delta;
  b.r_dp = otazo::r_dp(epsilon, delta);
  return b;
}

double iteration_cost(double c, double gamma, const EffectiveNoise& m) {
  if (!(m.m > 0.0))
    throw std::domain_error("iteration_cost: effective noise m must be > 0");
  const double ratio = c * gamma / m.m;
  return 2.0 * ratio * ratio;
}

AccountantVerdict accountant_check(std::span<const PrivacyCostRecord> records,
                                   const PrivacyBudget& budget) {
  KahanSum total;
  for (const PrivacyCostRecord& r : records) {
    if (!(r.cost >= 0.0) || !std::isfinite(r.cost))
      throw std::invalid_argument(
          "accountant_check: cost records must be finite and >= 0");
    total.add(r.cost);
  }
  AccountantVerdict v;
  v.total = total.value();
  v.slack = budget.r_dp - v.total;
  v.pass = v.total <= budget.r_dp + 1e-9;
  return v;
}

double montecarlo_privacy_tail(const Eigen::VectorXd& c,
                               const Eigen::VectorXd& m,
                               const Eigen::VectorXd& gamma, double epsilon,
                               long trials, std::uint64_t seed) {
  const Eigen::Index T = c.size();
  if (m.size() != T || gamma.size() != T)
    throw std::invalid_argument("montecarlo_privacy_tail: length mismatch");
  if (trials < 1)
    throw std::invalid_argument("montecarlo_privacy_tail: trials must be >= 1");

  // L = sum_t g_t * (v_t/m_t) + sum_t v_t^2/(2 m_t^2) with g_t std normal.
  Eigen::VectorXd a(T);
  KahanSum drift;
  for (Eigen::Index t = 0; t < T; ++t) {
    const double v = 2.0 * c[t] * gamma[t];
    if (v == 0.0) {
      a[t] = 0.0;
      continue;
    }
    if (!(m[t] > 0.0))
      throw std::invalid_argument(
          "montecarlo_privacy_tail: m must be > 0 wherever c*gamma > 0");
    a[t] = v / m[t];
    drift.add(0.5 * a[t] * a[t]);
  }
  const double b = drift.value();

  long exceed = 0;
  for (long i = 0; i < trials; ++i) {
    CounterRng rng(derive_key(seed, static_cast<std::uint64_t>(i)));
    double loss = b;
    for (Eigen::Index t = 0; t < T; ++t) {
      if (a[t] != 0.0) loss += a[t] * rng.next_normal();
    }
    if (std::abs(loss) > epsilon) ++exceed;
  }
  return static_cast<double>(exceed) / static_cast<double>(trials);
}

}  // namespace otazo
