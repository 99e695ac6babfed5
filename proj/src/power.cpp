#include "otazo/power.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

namespace otazo {

namespace {

void validate_inputs(const SolverInputs& in, bool digital) {
  if (in.gains.size() > 0 && !(in.gains.array() > 0.0).all())
    throw std::invalid_argument("power: all channel gains must be > 0");
  if (!(in.power_cap > 0.0))
    throw std::invalid_argument("power: power_cap must be > 0");
  if (!(in.noise_power > 0.0))
    throw std::invalid_argument("power: noise_power must be > 0");
  if (!(in.gamma > 0.0))
    throw std::invalid_argument("power: gamma must be > 0");
  if (!(in.contraction > 0.0 && in.contraction < 1.0))
    throw std::invalid_argument("power: contraction must lie in (0,1)");
  if (in.dim < 1) throw std::invalid_argument("power: dim must be >= 1");
  if (digital && !(in.e0 > 0.0 && in.e0 < 0.5))
    throw std::invalid_argument("power: e0 must lie in (0, 1/2)");
}

Eigen::VectorXd worst_gains(const Eigen::MatrixXd& gains) {
  return gains.rowwise().minCoeff();
}

PowerSchedule empty_schedule(Eigen::Index K) {
  PowerSchedule s;
  s.c.resize(0);
  s.sigma.resize(0, K);
  return s;
}

// Generic log-space bisection for a strictly decreasing total-cost function.
// Maintains cost(lo) >= target >= cost(hi) and returns a zeta whose cost is
// within 1e-9 relative of target *and* <= target, so emitted schedules never
// overshoot the budget.
double bisect_zeta(const std::function<double(double)>& cost, double zlo,
                   double zhi, double target, const char* who) {
  const double clo = cost(zlo);
  const double chi = cost(zhi);
  if (clo < target) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "%s: no sign change at lower bracket 1e-30 (cost %.9g < "
                  "budget %.9g)",
                  who, clo, target);
    throw SolverError(msg);
  }
  if (chi > target) {
    char msg[200];
    std::snprintf(msg, sizeof msg,
                  "%s: bracket upper limit binds (cost %.9g at zeta=%.9g "
                  "still exceeds budget %.9g); instance outside the "
                  "closed-form family",
                  who, chi, zhi, target);
    throw SolverError(msg);
  }
  double ulo = std::log(zlo);
  double uhi = std::log(zhi);
  for (int it = 0; it < 500; ++it) {
    const double umid = 0.5 * (ulo + uhi);
    const double zmid = std::exp(umid);
    const double cmid = cost(zmid);
    if (cmid <= target && std::abs(cmid - target) <= 1e-9 * target)
      return zmid;
    if (cmid > target)
      ulo = umid;
    else
      uhi = umid;
  }
  const double zend = std::exp(uhi);
  const double cend = cost(zend);
  if (cend <= target && std::abs(cend - target) <= 1e-6 * target) return zend;
  char msg[160];
  std::snprintf(msg, sizeof msg,
                "%s: bisection hit the 500-iteration cap (residual %.3g)", who,
                std::abs(cend - target) / target);
  throw SolverError(msg);
}

PowerSchedule solve_analog(const SolverInputs& in, double r_dp, int trend,
                           const char* who) {
  validate_inputs(in, false);
  const Eigen::Index T = in.gains.rows();
  const Eigen::Index K = in.gains.cols();
  if (T == 0) return empty_schedule(K);
  if (!(r_dp > 0.0)) throw std::invalid_argument("power: r_dp must be > 0");

  const double P = in.power_cap;
  const double N0 = in.noise_power;
  const double g = in.gamma;
  const Eigen::VectorXd hmin = worst_gains(in.gains);
  const Eigen::VectorXd caps = (std::sqrt(P) / g) * hmin;
  const Eigen::VectorXd capcost = (2.0 * P / N0) * hmin.array().square();

  PowerSchedule s;
  s.sigma = Eigen::MatrixXd::Zero(T, K);

  KahanSum full;
  for (Eigen::Index t = 0; t < T; ++t) full.add(capcost[t]);
  if (full.value() < r_dp) {
    s.c = caps;
    s.full_power_branch = true;
    check_feasible(in, s, r_dp, false);
    return s;
  }

  // Adaptive weight A^(-trend*t/2); its cost term is 2*gamma*w_t/sqrt(2 zeta).
  Eigen::VectorXd w(T);
  const double lnA = std::log(in.contraction);
  for (Eigen::Index t = 0; t < T; ++t)
    w[t] = std::exp(-0.5 * trend * static_cast<double>(t + 1) * lnA);

  auto total_cost = [&](double zeta) {
    const double inv = 1.0 / std::sqrt(2.0 * zeta);
    KahanSum ks;
    for (Eigen::Index t = 0; t < T; ++t)
      ks.add(std::min(2.0 * g * w[t] * inv, capcost[t]));
    return ks.value();
  };

  double zhi = 1.0;
  int grow = 0;
  while (total_cost(zhi) > r_dp) {
    zhi *= 4.0;
    if (++grow > 500) throw SolverError("power: bracket expansion failed");
  }
  const double zeta = bisect_zeta(total_cost, 1e-30, zhi, r_dp, who);

  s.c.resize(T);
  const double adapt = std::sqrt(N0) / (std::pow(2.0 * zeta, 0.25) * std::sqrt(g));
  for (Eigen::Index t = 0; t < T; ++t)
    s.c[t] = std::min(std::sqrt(w[t]) * adapt, caps[t]);
  s.zeta_star = zeta;
  check_feasible(in, s, r_dp, false);
  return s;
}

PowerSchedule solve_digital(const SolverInputs& in, double r_dp, int trend,
                            const char* who) {
  validate_inputs(in, true);
  const Eigen::Index T = in.gains.rows();
  const Eigen::Index K = in.gains.cols();
  if (T == 0) return empty_schedule(K);
  if (!(r_dp > 0.0)) throw std::invalid_argument("power: r_dp must be > 0");

  const double P = in.power_cap;
  const double N0 = in.noise_power;
  const Eigen::VectorXd hmin = worst_gains(in.gains);
  const Eigen::VectorXd caps = std::sqrt(P) * hmin;  // sign payload: gamma = 1
  const Eigen::VectorXd capcost = (2.0 * P / N0) * hmin.array().square();
  // Effective-noise variance floor imposed by the power cap: m^2/c^2 >= N0/c^2.
  const Eigen::VectorXd floor_var = N0 * hmin.array().square().inverse() / P;

  PowerSchedule s;
  s.sigma = Eigen::MatrixXd::Zero(T, K);

  KahanSum full;
  for (Eigen::Index t = 0; t < T; ++t) full.add(capcost[t]);
  if (full.value() < r_dp) {
    s.c = caps;
    s.full_power_branch = true;
    check_feasible(in, s, r_dp, true);
    return s;
  }

  const double kd = static_cast<double>(K);
  const double b2 = 4.0 * kd * in.e0 * (1.0 - in.e0);
  const double b1 = kd * (1.0 - 2.0 * in.e0) * kd * (1.0 - 2.0 * in.e0);
  Eigen::VectorXd base(T);
  const double lnA = std::log(in.contraction);
  for (Eigen::Index t = 0; t < T; ++t)
    base[t] = std::exp(-trend * static_cast<double>(t + 1) * lnA) * b2 * b2;

  auto m_var = [&](double zeta, Eigen::Index t) {
    const double unc = (b1 + b2) *
                       (4.0 * zeta + std::sqrt(8.0 * base[t] * zeta)) /
                       (2.0 * (base[t] - 2.0 * zeta));
    return std::max(floor_var[t], unc);
  };
  auto total_cost = [&](double zeta) {
    KahanSum ks;
    for (Eigen::Index t = 0; t < T; ++t) ks.add(2.0 / m_var(zeta, t));
    return ks.value();
  };

  const double zhi = 0.999 * 0.5 * base.minCoeff();
  const double zeta = bisect_zeta(total_cost, 1e-30, zhi, r_dp, who);

  s.c.resize(T);
  for (Eigen::Index t = 0; t < T; ++t)
    s.c[t] = std::sqrt(N0 / m_var(zeta, t));
  s.zeta_star = zeta;
  check_feasible(in, s, r_dp, true);
  return s;
}

}  // namespace

PowerSchedule solve_p1(const SolverInputs& in, double r_dp) {
  return solve_analog(in, r_dp, +1, "solve_p1");
}

PowerSchedule solve_p2(const SolverInputs& in, double r_dp) {
  return solve_digital(in, r_dp, +1, "solve_p2");
}

PowerSchedule static_schedule(const SolverInputs& in, double r_dp) {
  validate_inputs(in, false);
  const Eigen::Index T = in.gains.rows();
  const Eigen::Index K = in.gains.cols();
  if (T == 0) return empty_schedule(K);
  if (!(r_dp > 0.0)) throw std::invalid_argument("power: r_dp must be > 0");
  const double g = in.gamma;
  const Eigen::VectorXd caps = (std::sqrt(in.power_cap) / g) * worst_gains(in.gains);
  const double c_even = std::sqrt(in.noise_power * r_dp /
                                  (2.0 * static_cast<double>(T) * g * g));
  PowerSchedule s;
  s.sigma = Eigen::MatrixXd::Zero(T, K);
  s.c = caps.array().min(c_even);
  check_feasible(in, s, r_dp, false);
  return s;
}

PowerSchedule reversed_schedule(const SolverInputs& in, double r_dp,
                                bool digital) {
  return digital ? solve_digital(in, r_dp, -1, "reversed_schedule")
                 : solve_analog(in, r_dp, -1, "reversed_schedule");
}

double et_upper_bound(double e0, int K, double m, double c) {
  if (!(e0 >= 0.0 && e0 <= 0.5))
    throw std::invalid_argument("et_upper_bound: e0 must lie in [0, 1/2]");
  if (K < 1) throw std::invalid_argument("et_upper_bound: K must be >= 1");
  if (!(c > 0.0)) throw std::invalid_argument("et_upper_bound: c must be > 0");
  if (m < 0.0) throw std::invalid_argument("et_upper_bound: m must be >= 0");
  const double kd = static_cast<double>(K);
  const double b2 = 4.0 * kd * e0 * (1.0 - e0);
  const double margin = kd * (1.0 - 2.0 * e0);
  const double v = (m / c) * (m / c);
  return (b2 + v) / (b2 + v + margin * margin);
}

double p1_objective(const SolverInputs& in, const PowerSchedule& s) {
  const Eigen::Index T = s.c.size();
  const double invA = 1.0 / in.contraction;
  double weight = 1.0;
  KahanSum obj;
  for (Eigen::Index t = 0; t < T; ++t) {
    weight *= invA;
    obj.add(weight * (s.sigma.row(t).squaredNorm() +
                      in.noise_power / (s.c[t] * s.c[t])));
  }
  return obj.value();
}

double p2_objective(const SolverInputs& in, const PowerSchedule& s) {
  const Eigen::Index T = s.c.size();
  const int K = static_cast<int>(in.gains.cols());
  const double invA = 1.0 / in.contraction;
  double weight = 1.0;
  KahanSum obj;
  for (Eigen::Index t = 0; t < T; ++t) {
    weight *= invA;
    const double m = std::sqrt(s.c[t] * s.c[t] * s.sigma.row(t).squaredNorm() +
                               in.noise_power);
    obj.add(weight * et_upper_bound(in.e0, K, m, s.c[t]));
  }
  return obj.value();
}

std::vector<PrivacyCostRecord> schedule_cost_records(const SolverInputs& in,
                                                     const PowerSchedule& s,
                                                     bool digital) {
  const Eigen::Index T = s.c.size();
  const double g = digital ? 1.0 : in.gamma;
  std::vector<PrivacyCostRecord> records;
  records.reserve(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) {
    const EffectiveNoise m =
        effective_noise_std(s.c[t], s.sigma.row(t).transpose(), in.noise_power);
    records.push_back({static_cast<long>(t + 1), iteration_cost(s.c[t], g, m)});
  }
  return records;
}

void check_feasible(const SolverInputs& in, const PowerSchedule& s,
                    double r_dp, bool digital) {
  const Eigen::Index T = in.gains.rows();
  const Eigen::Index K = in.gains.cols();
  if (s.c.size() != T || s.sigma.rows() != T || s.sigma.cols() != K)
    throw SolverError("check_feasible: schedule shape mismatch");
  const double g = digital ? 1.0 : in.gamma;
  const double d = static_cast<double>(in.dim);
  for (Eigen::Index t = 0; t < T; ++t) {
    if (!(s.c[t] > 0.0) || !std::isfinite(s.c[t])) {
      char msg[120];
      std::snprintf(msg, sizeof msg,
                    "check_feasible: c[%ld] = %.9g is not a positive finite "
                    "number",
                    static_cast<long>(t), s.c[t]);
      throw SolverError(msg);
    }
    for (Eigen::Index k = 0; k < K; ++k) {
      const double alpha = s.c[t] / in.gains(t, k);
      const double used =
          alpha * alpha * (g * g + d * s.sigma(t, k) * s.sigma(t, k));
      if (used > in.power_cap * (1.0 + 1e-9)) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "check_feasible: power constraint violated at (t=%ld, "
                      "k=%ld): %.9g > %.9g",
                      static_cast<long>(t), static_cast<long>(k), used,
                      in.power_cap);
        throw SolverError(msg);
      }
    }
  }
  const std::vector<PrivacyCostRecord> rec =
      schedule_cost_records(in, s, digital);
  PrivacyBudget budget;
  budget.r_dp = r_dp;
  const AccountantVerdict v = accountant_check(rec, budget);
  if (!v.pass) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "check_feasible: privacy budget exceeded: total %.12g > "
                  "r_dp %.12g",
                  v.total, r_dp);
    throw SolverError(msg);
  }
}

namespace {

BruteForceResult brute_force(const SolverInputs& in, double r_dp,
                             int grid_size, int n_sigma, bool digital) {
  validate_inputs(in, digital);
  const Eigen::Index T = in.gains.rows();
  const Eigen::Index K = in.gains.cols();
  if (T > 3 || K > 3)
    throw std::invalid_argument("brute_force: tiny instances only (T<=3, K<=3)");
  if (grid_size < 2)
    throw std::invalid_argument("brute_force: grid_size must be >= 2");
  if (!(r_dp > 0.0)) throw std::invalid_argument("power: r_dp must be > 0");

  const double P = in.power_cap;
  const double N0 = in.noise_power;
  const double g = digital ? 1.0 : in.gamma;
  const Eigen::VectorXd hmin = worst_gains(in.gains);
  const double c_even =
      std::sqrt(N0 * r_dp / (2.0 * static_cast<double>(T) * g * g));

  const double kd = static_cast<double>(K);
  const double b2 = 4.0 * kd * in.e0 * (1.0 - in.e0);
  const double b1 = kd * (1.0 - 2.0 * in.e0) * kd * (1.0 - 2.0 * in.e0);

  // Candidate artificial-noise levels, shared across clients within an
  // iteration; index 0 is always "no noise".
  std::vector<double> sig_grid{0.0};
  for (int j = 0; j < n_sigma; ++j)
    sig_grid.push_back(std::sqrt(N0) *
                       std::pow(10.0, -2.0 + 3.0 * j / std::max(1, n_sigma - 1)));

  struct Combo {
    double c, sigma, cost, obj;
  };
  std::vector<std::vector<Combo>> combos(static_cast<std::size_t>(T));
  double grid_ratio = 1.0;
  double weight = 1.0;
  const double invA = 1.0 / in.contraction;
  for (Eigen::Index t = 0; t < T; ++t) {
    weight *= invA;
    const double cap = std::sqrt(P) * hmin[t] / g;
    double lo = std::min(cap, 0.01 * c_even);
    if (lo >= cap) lo = cap / 1000.0;
    grid_ratio = std::max(grid_ratio,
                          std::pow(cap / lo, 1.0 / (grid_size - 1)));
    for (int i = 0; i < grid_size; ++i) {
      const double c = (i == grid_size - 1)
                           ? cap
                           : lo * std::pow(cap / lo,
                                           static_cast<double>(i) /
                                               (grid_size - 1));
      for (double sv : sig_grid) {
        bool ok = true;
        for (Eigen::Index k = 0; k < K; ++k) {
          const double alpha = c / in.gains(t, k);
          if (alpha * alpha *
                  (g * g + static_cast<double>(in.dim) * sv * sv) >
              P * (1.0 + 1e-9)) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        const double svar = kd * sv * sv;  // sum over clients
        const double m2 = c * c * svar + N0;
        Combo cb;
        cb.c = c;
        cb.sigma = sv;
        cb.cost = 2.0 * c * c * g * g / m2;
        cb.obj = digital
                     ? weight * (b2 + m2 / (c * c)) / (b2 + m2 / (c * c) + b1)
                     : weight * (svar + N0 / (c * c));
        combos[static_cast<std::size_t>(t)].push_back(cb);
      }
    }
  }

  BruteForceResult out;
  out.grid_ratio = grid_ratio;
  out.schedule.sigma = Eigen::MatrixXd::Zero(T, K);
  out.schedule.c = Eigen::VectorXd::Zero(T);

  std::vector<double> min_cost_suffix(static_cast<std::size_t>(T) + 1, 0.0);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const auto& cs = combos[static_cast<std::size_t>(t)];
    if (cs.empty()) return out;  // some iteration has no feasible grid point
    double mc = cs.front().cost;
    for (const Combo& cb : cs) mc = std::min(mc, cb.cost);
    min_cost_suffix[static_cast<std::size_t>(t)] =
        mc + min_cost_suffix[static_cast<std::size_t>(t) + 1];
  }

  const double budget = r_dp * (1.0 + 1e-9) + 1e-12;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(T), -1);
  std::vector<int> cur(static_cast<std::size_t>(T), -1);
  std::function<void(Eigen::Index, double, double)> visit =
      [&](Eigen::Index t, double cost_acc, double obj_acc) {
        if (obj_acc >= best) return;
        if (t == T) {
          best = obj_acc;
          pick = cur;
          return;
        }
        if (cost_acc + min_cost_suffix[static_cast<std::size_t>(t)] > budget)
          return;
        const auto& cs = combos[static_cast<std::size_t>(t)];
        for (int i = 0; i < static_cast<int>(cs.size()); ++i) {
          const Combo& cb = cs[static_cast<std::size_t>(i)];
          const double nc = cost_acc + cb.cost;
          if (nc + min_cost_suffix[static_cast<std::size_t>(t) + 1] > budget)
            continue;
          cur[static_cast<std::size_t>(t)] = i;
          visit(t + 1, nc, obj_acc + cb.obj);
        }
      };
  visit(0, 0.0, 0.0);

  if (pick[0] < 0) return out;
  for (Eigen::Index t = 0; t < T; ++t) {
    const Combo& cb =
        combos[static_cast<std::size_t>(t)][static_cast<std::size_t>(pick[static_cast<std::size_t>(t)])];
    out.schedule.c[t] = cb.c;
    out.schedule.sigma.row(t).setConstant(cb.sigma);
  }
  out.feasible = true;
  out.objective = digital ? p2_objective(in, out.schedule)
                          : p1_objective(in, out.schedule);
  return out;
}

}  // namespace

BruteForceResult brute_force_p1(const SolverInputs& in, double r_dp,
                                int grid_size, int n_sigma) {
  return brute_force(in, r_dp, grid_size, n_sigma, false);
}

BruteForceResult brute_force_p2(const SolverInputs& in, double r_dp,
                                int grid_size, int n_sigma) {
  return brute_force(in, r_dp, grid_size, n_sigma, true);
}

double bound_rhs_analog(double g0, double A, double eta, double lumped,
                        const Eigen::VectorXd& c, const Eigen::VectorXd& m,
                        int K) {
  if (!(A > 0.0 && A < 1.0))
    throw std::invalid_argument("bound_rhs_analog: A must lie in (0,1)");
  if (c.size() != m.size())
    throw std::invalid_argument("bound_rhs_analog: length mismatch");
  const Eigen::Index T = c.size();
  KahanSum sum;
  sum.add(std::pow(A, static_cast<double>(T)) * g0);
  for (Eigen::Index t = 0; t < T; ++t) {
    if (m[t] == 0.0) continue;
    const double kc = static_cast<double>(K) * c[t];
    sum.add(std::pow(A, static_cast<double>(T - t - 1)) * eta * eta * lumped *
            m[t] * m[t] / (kc * kc));
  }
  return sum.value();
}

double bound_rhs_digital(double g0, double A, const Eigen::VectorXd& e2_bounds,
                         double theta, double r) {
  if (!(A > 0.0 && A < 1.0))
    throw std::invalid_argument("bound_rhs_digital: A must lie in (0,1)");
  const Eigen::Index T = e2_bounds.size();
  KahanSum sum;
  sum.add(std::pow(A, static_cast<double>(T)) * g0);
  for (Eigen::Index t = 0; t < T; ++t)
    sum.add(std::pow(A, static_cast<double>(T - t - 1)) *
            (theta * e2_bounds[t] + r));
  return sum.value();
}

}  // namespace otazo
