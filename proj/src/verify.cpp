#include "otazo/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "otazo/channel.hpp"
#include "otazo/config.hpp"
#include "otazo/fedsim.hpp"
#include "otazo/io.hpp"
#include "otazo/power.hpp"
#include "otazo/privacy.hpp"
#include "otazo/rng.hpp"
#include "otazo/task.hpp"
#include "otazo/zo.hpp"

namespace otazo {

namespace {

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// 1. Central differences recover z'grad(F) exactly on quadratics.

bool crit_spsa_exactness(std::string& detail) {
  const double mus[] = {1e-4, 1e-3, 1e-2};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    CounterRng rng(derive_key(0xACC001, static_cast<std::uint64_t>(i)));
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.next_below(99));
    const int K = (i % 2 == 0) ? 1 : 3;
    const double kappa = 1.5 + 6.5 * rng.next_unit();
    const auto task = quadratic_task(
        d, K, kappa, derive_key(0xACC001, static_cast<std::uint64_t>(i), 1));
    Eigen::VectorXd u = rng.normal_vector(d);
    const ModelVector w = task->minimizer() + u / u.norm();
    const ModelVector z = rng.normal_vector(d);
    const double ref = z.dot(task->global_gradient(w));
    for (const double mu : mus) {
      double p = 0.0;
      for (int k = 0; k < K; ++k)
        p += spsa_projection(
            [&](const ModelVector& v) { return task->client_full_loss(k, v); },
            w, z, mu);
      p /= K;
      worst = std::max(worst, std::abs(p - ref) / (1.0 + std::abs(ref)));
    }
  }
  detail = fmt("max residual %.3g over 50 quadratics x 3 mu (gate 1e-10)", worst);
  return worst <= 1e-10;
}

// ---------------------------------------------------------------------------
// 2. Budget map against an independent long-double interval-halving oracle.

long double oracle_c(long double x) {
  constexpr long double pi = 3.14159265358979323846264338327950288L;
  return sqrtl(pi) * x * expl(x * x);
}

long double oracle_c_inverse(long double y) {
  long double lo = 0.0L, hi = 16.0L;
  for (int i = 0; i < 400; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (oracle_c(mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5L * (lo + hi);
}

bool crit_budget_function(std::string& detail) {
  const long double q = oracle_c_inverse(100.0L);  // 1/delta at delta = 0.01
  const long double root = sqrtl(5.0L + q * q) - q;
  const double r_oracle = static_cast<double>(root * root);
  const double r_lib = r_dp(5.0, 0.01);
  const double rel = std::abs(r_lib - r_oracle) / r_oracle;

  double worst_rt = 0.0;
  for (const double x : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double err = std::abs(c_inverse(c_function(x)) - x);
    worst_rt = std::max(worst_rt, err / std::max(1.0, x));
  }
  detail = fmt("r_dp(5,0.01)=%.12g, oracle rel err %.3g (gate 1e-9); "
               "worst round-trip %.3g (gate 1e-10)",
               r_lib, rel, worst_rt);
  return rel <= 1e-9 && worst_rt <= 1e-10;
}

// ---------------------------------------------------------------------------
// 3. Monte-Carlo privacy-loss tail under budget-saturating schedules.

bool crit_dp_tail(std::string& detail) {
  const double r = r_dp(5.0, 0.01);
  const long trials = 100000;
  const double gate =
      0.01 + 3.0 * std::sqrt(0.01 * 0.99 / static_cast<double>(trials));
  std::string tails;
  bool ok = true;
  for (const long T : {10L, 100L, 1000L}) {
    SolverInputs in;
    in.gains.resize(T, 5);
    for (long t = 0; t < T; ++t)
      in.gains.row(t) =
          sample_channel(5, static_cast<std::uint64_t>(t + 1), 777, 1.0)
              .gains.transpose();
    in.power_cap = 100.0 * 20.0;  // SNR_max 20 dB at d = 20, N0 = 1
    in.noise_power = 1.0;
    in.gamma = 100.0;
    in.contraction = 0.998;
    in.dim = 20;
    const PowerSchedule s = solve_p1(in, r);
    if (s.full_power_branch) {
      detail = fmt("T=%ld unexpectedly hit the full-power branch", T);
      return false;
    }
    KahanSum total;
    for (const auto& rec : schedule_cost_records(in, s, false))
      total.add(rec.cost);
    if (!(total.value() <= r * (1.0 + 1e-9) &&
          total.value() >= r * (1.0 - 2e-9))) {
      detail = fmt("T=%ld does not saturate the budget: total %.12g vs %.12g",
                   T, total.value(), r);
      return false;
    }
    Eigen::VectorXd m(T);
    for (long t = 0; t < T; ++t)
      m[t] = effective_noise_std(s.c[t], s.sigma.row(t).transpose(), 1.0).m;
    const double tail = montecarlo_privacy_tail(
        s.c, m, Eigen::VectorXd::Constant(T, 100.0), 5.0, trials,
        derive_key(0xACC003, static_cast<std::uint64_t>(T)));
    tails += fmt(" %.4f", tail);
    ok = ok && tail <= gate;
  }
  detail = fmt("tails T=10/100/1000:%s (gate %.6f)", tails.c_str(), gate);
  return ok;
}

// ---------------------------------------------------------------------------
// 4. Closed forms against the exhaustive grid on tiny instances.

bool crit_solver_optimality(std::string& detail) {
  double worst_excess = -1e300;
  double worst_grid_gap = -1e300;
  int branch_matches = 0;
  for (int i = 0; i < 20; ++i) {
    CounterRng rng(derive_key(0xACC004, static_cast<std::uint64_t>(i)));
    const bool digital = i >= 10;
    SolverInputs in;
    const Eigen::Index T = 1 + static_cast<Eigen::Index>(rng.next_below(3));
    const Eigen::Index K = 1 + static_cast<Eigen::Index>(rng.next_below(3));
    in.gains.resize(T, K);
    for (Eigen::Index t = 0; t < T; ++t)
      for (Eigen::Index k = 0; k < K; ++k) {
        const double g1 = rng.next_normal();
        const double g2 = rng.next_normal();
        in.gains(t, k) = std::sqrt(0.5 * (g1 * g1 + g2 * g2));
      }
    in.noise_power = std::exp(std::log(0.5) + rng.next_unit() * std::log(4.0));
    in.dim = 1 + static_cast<Eigen::Index>(rng.next_below(8));
    double eps, del;
    if (digital) {
      in.gamma = 1.0;
      in.e0 = 0.25 + 0.2 * rng.next_unit();
      in.contraction = 0.95 + 0.04 * rng.next_unit();
      eps = 3.0 + 5.0 * rng.next_unit();
      del = 0.05 + 0.15 * rng.next_unit();
    } else {
      in.gamma = std::exp(rng.next_unit() * std::log(30.0));
      in.contraction = 0.9 + 0.09 * rng.next_unit();
      eps = 0.5 + 7.5 * rng.next_unit();
      del = 0.01 + 0.19 * rng.next_unit();
    }
    const double r = r_dp(eps, del);
    double sum_hmin2 = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      const double hm = in.gains.row(t).minCoeff();
      sum_hmin2 += hm * hm;
    }
    // Steer instances into both branches: S = 2 P sum_t min_k h^2 / N0 vs r.
    const double s_target =
        (i % 3 == 0) ? (0.2 + 0.5 * rng.next_unit()) : (2.0 + 8.0 * rng.next_unit());
    in.power_cap = s_target * r * in.noise_power / (2.0 * sum_hmin2);
    const double s_indep = 2.0 * in.power_cap * sum_hmin2 / in.noise_power;

    const PowerSchedule sched =
        digital ? solve_p2(in, r) : solve_p1(in, r);
    if (sched.full_power_branch == (s_indep < r)) ++branch_matches;
    if (!sched.full_power_branch && !(sched.zeta_star > 0.0)) {
      detail = fmt("instance %d: bisection branch without a positive dual", i);
      return false;
    }
    const BruteForceResult grid =
        digital ? brute_force_p2(in, r, 400) : brute_force_p1(in, r, 400);
    if (!grid.feasible) {
      detail = fmt("instance %d: grid found no feasible point", i);
      return false;
    }
    const double c_obj =
        digital ? p2_objective(in, sched) : p1_objective(in, sched);
    const double rho2 = grid.grid_ratio * grid.grid_ratio;
    const double slack = c_obj * (rho2 - 1.0) + 1e-12;
    worst_excess = std::max(worst_excess, c_obj - grid.objective - slack);
    worst_grid_gap = std::max(
        worst_grid_gap, grid.objective - c_obj * rho2 * (1.0 + 1e-9) - 1e-12);
  }
  detail = fmt("branch match %d/20; max closed-vs-grid excess %.3g; "
               "max grid-vs-closed*rho^2 excess %.3g (both gates 0)",
               branch_matches, worst_excess, worst_grid_gap);
  return branch_matches == 20 && worst_excess <= 0.0 && worst_grid_gap <= 0.0;
}

// ---------------------------------------------------------------------------
// 5. All four schedule families stay feasible across random configurations.

bool crit_feasibility(std::string& detail) {
  double max_power_ratio = 0.0;
  double min_slack = 1e300;
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    CounterRng rng(derive_key(0xACC005, static_cast<std::uint64_t>(i)));
    const Eigen::Index T = 1 + static_cast<Eigen::Index>(rng.next_below(25));
    const Eigen::Index K = 3 + static_cast<Eigen::Index>(rng.next_below(4));
    SolverInputs in;
    in.gains.resize(T, K);
    for (Eigen::Index t = 0; t < T; ++t)
      for (Eigen::Index k = 0; k < K; ++k) {
        const double g1 = rng.next_normal();
        const double g2 = rng.next_normal();
        in.gains(t, k) = std::sqrt(0.5 * (g1 * g1 + g2 * g2));
      }
    in.noise_power = std::exp(std::log(0.25) + rng.next_unit() * std::log(16.0));
    in.dim = 4 + static_cast<Eigen::Index>(rng.next_below(61));
    in.contraction = 0.996 + 0.0035 * rng.next_unit();
    in.e0 = 0.4 + 0.09 * rng.next_unit();
    const double snr_db = -10.0 + 30.0 * rng.next_unit();
    in.power_cap = std::pow(10.0, snr_db / 10.0) *
                   static_cast<double>(in.dim) * in.noise_power;
    const double gamma = std::exp(rng.next_unit() * std::log(100.0));
    const double eps = 3.0 + 5.0 * rng.next_unit();
    const double del = 0.01 + 0.09 * rng.next_unit();
    const double r = r_dp(eps, del);
    const PrivacyBudget budget = PrivacyBudget::make(eps, del);

    SolverInputs analog = in;
    analog.gamma = gamma;
    SolverInputs dig = in;
    dig.gamma = 1.0;

    struct Case {
      PowerSchedule s;
      double g;
    };
    std::vector<Case> cases;
    try {
      cases.push_back({solve_p1(analog, r), gamma});
      cases.push_back({static_schedule(analog, r), gamma});
      cases.push_back({reversed_schedule(analog, r, false), gamma});
      cases.push_back({solve_p2(dig, r), 1.0});
      cases.push_back({static_schedule(dig, r), 1.0});
      cases.push_back({reversed_schedule(dig, r, true), 1.0});
    } catch (const SolverError& e) {
      detail = fmt("config %d: solver threw: %s", i, e.what());
      return false;
    }
    for (const Case& cs : cases) {
      ++checked;
      std::vector<PrivacyCostRecord> recs;
      for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index k = 0; k < K; ++k) {
          const double alpha = cs.s.c[t] / in.gains(t, k);
          const double used =
              alpha * alpha *
              (cs.g * cs.g + static_cast<double>(in.dim) *
                                 cs.s.sigma(t, k) * cs.s.sigma(t, k));
          max_power_ratio = std::max(max_power_ratio, used / in.power_cap);
          if (used > in.power_cap * (1.0 + 1e-9)) {
            detail = fmt("config %d: power violated at t=%ld k=%ld (%.12g > %.12g)",
                         i, static_cast<long>(t), static_cast<long>(k), used,
                         in.power_cap);
            return false;
          }
        }
        const double m =
            effective_noise_std(cs.s.c[t], cs.s.sigma.row(t).transpose(),
                                in.noise_power)
                .m;
        recs.push_back({static_cast<long>(t + 1),
                        iteration_cost(cs.s.c[t], cs.g, EffectiveNoise{m})});
      }
      const AccountantVerdict v = accountant_check(recs, budget);
      min_slack = std::min(min_slack, v.slack);
      if (!v.pass) {
        detail = fmt("config %d: accountant failed (total %.12g > r_dp %.12g)",
                     i, v.total, budget.r_dp);
        return false;
      }
    }
  }
  detail = fmt("%d schedules feasible; max power ratio %.9f; "
               "min accountant slack %.3g",
               checked, max_power_ratio, min_slack);
  return true;
}

// ---------------------------------------------------------------------------
// 6. Measured sign-reversal rate vs the Cantelli-style bound, digital mode.

bool crit_sign_reversal_bound(std::string& detail) {
  ExperimentConfig cfg;
  cfg.task = "logistic";
  cfg.dim = 50;
  cfg.clients = 5;
  cfg.samples = 500;
  cfg.iterations = 60;  // the adaptive digital family runs out near T ~ 70
  cfg.eta = 1e-3;
  cfg.mu = 1e-3;
  cfg.gamma = 100.0;
  cfg.batch_size = 64;
  cfg.mode = Mode::kDigital;
  cfg.policy = Policy::kSolution;
  cfg.use_snr = true;
  cfg.snr_max_db = 10.0;
  cfg.epsilon = 5.0;
  cfg.delta = 0.01;
  cfg.e0 = 0.4960;
  cfg.contraction = 0.998;
  cfg.checkpoint_every = 6;
  cfg.seeds = {21, 22, 23, 24};

  const RunResult res = run(cfg);
  if (!res.accountant.pass) {
    detail = "digital run failed the accountant";
    return false;
  }
  const auto task = build_task(cfg);
  const Eigen::MatrixXd gains = presample_gains(cfg);
  const int K = cfg.clients;
  const int R = 400;
  double worst_margin = -1e300;
  std::vector<Eigen::Index> batch(64);
  for (std::size_t ci = 0; ci < res.checkpoints.size(); ++ci) {
    const long t = res.checkpoint_iters[ci];
    const ModelVector& w = res.checkpoints[ci];
    const IterationRecord& row = res.rows[static_cast<std::size_t>(t - 1)];
    const ModelVector z = run_perturbation(cfg, t);
    const double p_full = spsa_projection(
        [&](const ModelVector& v) { return task->global_loss(v); }, w, z,
        cfg.mu);
    const double s_true = sign_plus(p_full);
    const ChannelRealization chan{gains.row(t - 1).transpose(),
                                  cfg.noise_power};
    int server_flips = 0;
    Eigen::VectorXi client_flips = Eigen::VectorXi::Zero(K);
    std::vector<OtaPayload> pay(static_cast<std::size_t>(K));
    for (int rep = 0; rep < R; ++rep) {
      for (int k = 0; k < K; ++k) {
        CounterRng brng(derive_key(0xACC601, ci,
                                   static_cast<std::uint64_t>(rep),
                                   static_cast<std::uint64_t>(k)));
        const std::uint64_t n =
            static_cast<std::uint64_t>(task->client_samples(k));
        for (auto& idx : batch)
          idx = static_cast<Eigen::Index>(brng.next_below(n));
        const double p = spsa_projection(
            [&](const ModelVector& v) { return task->client_loss(k, v, batch); },
            w, z, cfg.mu);
        if (sign_plus(p) != s_true) ++client_flips[k];
        GradientProjection gp = clip_projection(p, cfg.gamma);
        gp.client_id = k;
        pay[static_cast<std::size_t>(k)] = make_digital_payload(
            gp, chan.gains[k], row.c, 0.0, cfg.dim,
            derive_key(0xACC602, ci, static_cast<std::uint64_t>(rep),
                       static_cast<std::uint64_t>(k)));
      }
      const double y = superpose(
          pay, chan,
          derive_key(0xACC603, ci, static_cast<std::uint64_t>(rep)));
      if (sign_plus(channel_invert(y, K, row.c)) != s_true) ++server_flips;
    }
    const double e_hat = static_cast<double>(server_flips) / R;
    const double e0_hat =
        static_cast<double>(client_flips.maxCoeff()) / R;
    const double se0 =
        std::sqrt(std::max(e0_hat * (1.0 - e0_hat), 1.0 / R) / R);
    const double e0_use = std::min(e0_hat + 3.0 * se0, 0.499999);
    const double bound = et_upper_bound(e0_use, K, row.m, row.c);
    const double se2 =
        2.0 * e_hat * std::sqrt(std::max(e_hat * (1.0 - e_hat), 1.0 / R) / R) +
        1.0 / R;
    const double margin = e_hat * e_hat - (bound + 3.0 * se2);
    worst_margin = std::max(worst_margin, margin);
  }
  detail = fmt("%zu checkpoints; worst ehat^2 - (bound + 3se) = %.4g (gate 0)",
               res.checkpoints.size(), worst_margin);
  return worst_margin <= 0.0;
}

// ---------------------------------------------------------------------------
// 7. Final-gap ordering across power policies on the quadratic task.

double mean_final_gap(const ExperimentConfig& base, Mode mode, Policy policy,
                      double snr_db) {
  double sum = 0.0;
  for (int s = 0; s < 8; ++s) {
    ExperimentConfig cfg = base;
    cfg.mode = mode;
    cfg.policy = policy;
    cfg.snr_max_db = snr_db;
    cfg.seeds.model = 100 + s;
    cfg.seeds.channel = 200 + s;
    cfg.seeds.noise = 300 + s;
    sum += run(cfg).final_gap;
  }
  return sum / 8.0;
}

bool crit_convergence_ordering(std::string& detail) {
  ExperimentConfig base;
  base.task = "quadratic";
  base.dim = 20;
  base.clients = 5;
  base.condition_number = 5.0;
  base.iterations = 4000;
  // 1 - 2*eta (slowest-mode curvature 1) must land near the contraction the
  // schedules are optimized for, and gamma must sit well above the channel
  // noise scale or every arm degrades at the same clip-limited rate.
  base.eta = 1e-3;
  base.mu = 1e-3;
  base.gamma = 20.0;
  base.epsilon = 50.0;
  base.delta = 0.01;
  base.noise_power = 1.0;
  base.contraction = 0.998;
  base.use_snr = true;
  base.seeds.data = 4;

  const double perfect =
      mean_final_gap(base, Mode::kPerfectAnalog, Policy::kSolution, 10.0);
  const double sol0 =
      mean_final_gap(base, Mode::kAnalog, Policy::kSolution, 0.0);
  const double sta0 = mean_final_gap(base, Mode::kAnalog, Policy::kStatic, 0.0);
  const double rev0 =
      mean_final_gap(base, Mode::kAnalog, Policy::kReversed, 0.0);
  const double sol10 =
      mean_final_gap(base, Mode::kAnalog, Policy::kSolution, 10.0);
  const double sta10 =
      mean_final_gap(base, Mode::kAnalog, Policy::kStatic, 10.0);
  const double rev10 =
      mean_final_gap(base, Mode::kAnalog, Policy::kReversed, 10.0);

  const bool order0 = perfect <= sol0 && sol0 <= sta0 && sol0 <= rev0;
  const bool order10 = perfect <= sol10 && sol10 <= sta10 && sol10 <= rev10;
  const bool margin10 = sol10 <= 0.9 * sta10 && sol10 <= 0.9 * rev10;
  detail = fmt("mean gaps: perfect %.3g | 0dB sol %.3g sta %.3g rev %.3g | "
               "10dB sol %.3g sta %.3g rev %.3g",
               perfect, sol0, sta0, rev0, sol10, sta10, rev10);
  return order0 && order10 && margin10;
}

// ---------------------------------------------------------------------------
// 8. Noiseless analog pipeline equals the perfect-aggregation path.

bool crit_noiseless_equivalence(std::string& detail) {
  ExperimentConfig cfg;
  cfg.task = "quadratic";
  cfg.dim = 10;
  cfg.clients = 5;
  cfg.condition_number = 5.0;
  cfg.iterations = 500;
  cfg.eta = 0.01;
  cfg.mu = 1e-3;
  cfg.gamma = 100.0;
  cfg.noise_power = 1e-30;
  cfg.use_snr = false;
  cfg.power_cap = 1.0;
  cfg.mode = Mode::kAnalog;

  PowerSchedule manual;
  manual.c = Eigen::VectorXd::Ones(cfg.iterations);
  manual.sigma = Eigen::MatrixXd::Zero(cfg.iterations, cfg.clients);
  const RunResult noisy = run_with_schedule(cfg, manual);

  ExperimentConfig pc = cfg;
  pc.mode = Mode::kPerfectAnalog;
  const RunResult ideal = run(pc);

  double worst = 0.0;
  for (std::size_t t = 0; t < noisy.rows.size(); ++t) {
    const auto& a = noisy.rows[t];
    const auto& b = ideal.rows[t];
    worst = std::max(worst,
                     std::abs(a.loss - b.loss) / (1.0 + std::abs(b.loss)));
    worst = std::max(
        worst, std::abs(a.p_hat - b.p_hat) / (1.0 + std::abs(b.p_hat)));
  }
  detail = fmt("max per-iteration relative difference %.3g over T=500 "
               "(gate 1e-9)",
               worst);
  return worst <= 1e-9;
}

// ---------------------------------------------------------------------------
// 9. Byte-identical CSV output across reruns, analog and digital.

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("verify: cannot reopen " + p.string());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

bool crit_determinism(std::string& detail) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "otazo-verify-c9";
  fs::create_directories(dir);
  for (const Mode mode : {Mode::kAnalog, Mode::kDigital}) {
    ExperimentConfig cfg;
    cfg.task = "quadratic";
    cfg.dim = 10;
    cfg.clients = 5;
    cfg.condition_number = 5.0;
    cfg.iterations = mode == Mode::kAnalog ? 200 : 50;
    cfg.eta = 1e-3;
    cfg.gamma = 100.0;
    cfg.epsilon = 5.0;
    cfg.delta = 0.01;
    cfg.e0 = 0.4960;
    cfg.use_snr = true;
    cfg.snr_max_db = 10.0;
    cfg.mode = mode;
    cfg.policy = Policy::kSolution;
    const fs::path f1 = dir / (to_string(mode) + "-1.csv");
    const fs::path f2 = dir / (to_string(mode) + "-2.csv");
    write_run_csv(f1.string(), run(cfg));
    write_run_csv(f2.string(), run(cfg));
    if (slurp(f1) != slurp(f2)) {
      detail = fmt("%s CSVs differ between identical runs",
                   to_string(mode).c_str());
      return false;
    }
  }
  detail = "analog and digital trajectory CSVs byte-identical across reruns";
  return true;
}

// ---------------------------------------------------------------------------
// 10. Sign-reversal measurement protocol on both tasks.

bool crit_e0_protocol(std::string& detail) {
  const auto quad = quadratic_task(20, 5, 5.0, 4242);
  std::vector<ModelVector> qpts;
  qpts.push_back(quad->initial_point(1));
  qpts.push_back(quad->initial_point(2));
  qpts.push_back(quad->minimizer() +
                 ModelVector::Constant(20, 0.05));
  const Eigen::VectorXd qe =
      estimate_e0(*quad, qpts, 10, 50, 0, 1e-3, 0xACC00A);
  if (!(qe.array() == 0.0).all()) {
    detail = fmt("quadratic full-batch max reading %.3g (expected exactly 0)",
                 qe.maxCoeff());
    return false;
  }

  // Well-separated clusters keep full-shard projections away from zero, so
  // batch-majority flips stay strictly below one half for every direction.
  ExperimentConfig cfg;
  cfg.task = "logistic";
  cfg.dim = 6;
  cfg.clients = 3;
  cfg.samples = 240;
  cfg.separation = 2.5;
  cfg.iterations = 40;
  cfg.eta = 0.01;
  cfg.mu = 1e-3;
  cfg.mode = Mode::kPerfectAnalog;
  cfg.checkpoint_every = 30;
  cfg.seeds = {31, 32, 33, 34};
  const RunResult res = run(cfg);
  const auto task = build_task(cfg);
  const Eigen::VectorXd le =
      estimate_e0(*task, res.checkpoints, 4, 800, 64, 1e-3, 0xACC007);
  const double lo = le.minCoeff();
  const double hi = le.maxCoeff();
  detail = fmt("quadratic readings all 0; logistic batch-64 readings in "
               "[%.4f, %.4f] (need (0, 0.5))",
               lo, hi);
  return lo > 0.0 && hi < 0.5;
}

// ---------------------------------------------------------------------------

struct Criterion {
  const char* name;
  const char* suite;
  bool (*fn)(std::string&);
};

const Criterion kCriteria[] = {
    {"spsa-exactness", "convergence", crit_spsa_exactness},
    {"dp-budget-function", "privacy", crit_budget_function},
    {"dp-tail-soundness", "privacy", crit_dp_tail},
    {"solver-optimality", "solver", crit_solver_optimality},
    {"schedule-feasibility", "solver", crit_feasibility},
    {"sign-reversal-bound", "convergence", crit_sign_reversal_bound},
    {"convergence-ordering", "convergence", crit_convergence_ordering},
    {"noiseless-equivalence", "convergence", crit_noiseless_equivalence},
    {"csv-determinism", "convergence", crit_determinism},
    {"e0-protocol", "convergence", crit_e0_protocol},
};

}  // namespace

std::vector<CriterionResult> run_suite(const std::string& suite) {
  if (suite != "privacy" && suite != "solver" && suite != "convergence" &&
      suite != "all")
    throw std::invalid_argument(
        "verify: suite must be one of privacy, solver, convergence, all");
  std::vector<CriterionResult> out;
  for (const Criterion& c : kCriteria) {
    if (suite != "all" && suite != c.suite) continue;
    CriterionResult r;
    r.name = c.name;
    const auto start = std::chrono::steady_clock::now();
    try {
      r.pass = c.fn(r.detail);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = fmt("threw %s", e.what());
    }
    r.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    out.push_back(std::move(r));
  }
  return out;
}

int report(const std::vector<CriterionResult>& results) {
  int failures = 0;
  for (const CriterionResult& r : results) {
    if (!r.pass) ++failures;
    std::printf("[%s] %-22s (%6.2fs) %s\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.seconds, r.detail.c_str());
  }
  std::fflush(stdout);
  return failures;
}

}  // namespace otazo
