#include "otazo/fedsim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "otazo/rng.hpp"

namespace otazo {

namespace {

enum : std::uint64_t {
  kTagPerturb = 0x5EED01,
  kTagBatch = 0x5EED02,
  kTagE0Dir = 0x5EED03,
  kTagE0Batch = 0x5EED04,
};

// Batch of local sample indices drawn with replacement; empty means the full
// shard (also used whenever the requested size covers the shard).
std::vector<Eigen::Index> draw_batch(const Task& task, int k, long batch_size,
                                     std::uint64_t key) {
  std::vector<Eigen::Index> batch;
  const Eigen::Index n = task.client_samples(k);
  if (batch_size <= 0 || batch_size >= n) return batch;
  batch.reserve(static_cast<std::size_t>(batch_size));
  CounterRng rng(key);
  for (long i = 0; i < batch_size; ++i)
    batch.push_back(
        static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(n))));
  return batch;
}

RunResult run_core(const ExperimentConfig& cfg, const Task& task,
                   const Eigen::MatrixXd& gains, const PowerSchedule& sched) {
  const auto start = std::chrono::steady_clock::now();
  const int K = cfg.clients;
  const long T = cfg.iterations;
  const Eigen::Index d = cfg.dim;
  const bool digital = is_digital(cfg.mode);
  const bool perfect = is_perfect(cfg.mode);
  const std::uint64_t perturb_seed = derive_key(cfg.seeds.model, kTagPerturb);

  RunResult res;
  res.config = cfg;
  res.rows.reserve(static_cast<std::size_t>(T));
  res.raw_projections.resize(T, K);

  ModelVector w = task.initial_point(cfg.seeds.model);
  const double f_star = task.optimum();
  res.initial_gap = task.global_loss(w) - f_star;
  res.final_gap = res.initial_gap;

  KahanSum dp_cum;
  std::vector<PrivacyCostRecord> cost_records;
  cost_records.reserve(static_cast<std::size_t>(T));
  Eigen::VectorXd clipped(K);
  std::vector<OtaPayload> payloads(static_cast<std::size_t>(K));

  for (long t = 1; t <= T; ++t) {
    if (cfg.checkpoint_every > 0 && (t - 1) % cfg.checkpoint_every == 0) {
      res.checkpoints.push_back(w);
      res.checkpoint_iters.push_back(t);
    }
    const std::uint64_t tu = static_cast<std::uint64_t>(t);
    const ModelVector z =
        generate_perturbation({perturb_seed, tu, cfg.mu}, d);

    int n_clipped = 0;
    std::vector<GradientProjection> projections(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      const std::vector<Eigen::Index> batch =
          draw_batch(task, k, cfg.batch_size,
                     derive_key(cfg.seeds.data, kTagBatch, tu,
                                static_cast<std::uint64_t>(k)));
      double p;
      try {
        p = spsa_projection(
            [&](const ModelVector& v) { return task.client_loss(k, v, batch); },
            w, z, cfg.mu);
      } catch (const std::domain_error& e) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "run: %s (iteration %ld, client %d)",
                      e.what(), t, k);
        throw std::runtime_error(msg);
      }
      res.raw_projections(t - 1, k) = p;
      GradientProjection gp = clip_projection(p, cfg.gamma);
      gp.client_id = k;
      n_clipped += gp.was_clipped ? 1 : 0;
      clipped[k] = gp.value;
      projections[static_cast<std::size_t>(k)] = gp;
    }

    IterationRecord row;
    row.t = t;
    row.clipped = n_clipped;

    double p_hat;
    if (perfect) {
      p_hat = perfect_aggregate(clipped, digital);
    } else {
      const double c_t = sched.c[t - 1];
      const Eigen::VectorXd sigma_row = sched.sigma.row(t - 1).transpose();
      ChannelRealization chan{gains.row(t - 1).transpose(), cfg.noise_power};
      for (int k = 0; k < K; ++k) {
        const std::uint64_t nk =
            derive_key(cfg.seeds.noise, tu, static_cast<std::uint64_t>(k));
        payloads[static_cast<std::size_t>(k)] =
            digital ? make_digital_payload(projections[static_cast<std::size_t>(k)],
                                           chan.gains[k], c_t, sigma_row[k], d, nk)
                    : make_analog_payload(projections[static_cast<std::size_t>(k)],
                                          chan.gains[k], c_t, sigma_row[k],
                                          cfg.gamma, d, nk);
      }
      const double y = superpose(
          payloads, chan,
          derive_key(cfg.seeds.noise, tu, static_cast<std::uint64_t>(K)));
      const double estimate = channel_invert(y, K, c_t);
      p_hat = digital ? sign_plus(estimate) : estimate;
      row.c = c_t;
      row.m = effective_noise_std(c_t, sigma_row, cfg.noise_power).m;
      row.dp_cost =
          iteration_cost(c_t, digital ? 1.0 : cfg.gamma, EffectiveNoise{row.m});
      cost_records.push_back({t, row.dp_cost});
    }

    w = apply_update(w, cfg.eta, p_hat, z);
    const double loss = task.global_loss(w);
    if (!std::isfinite(loss)) {
      char msg[96];
      std::snprintf(msg, sizeof msg, "run: non-finite loss at iteration %ld", t);
      throw std::runtime_error(msg);
    }
    dp_cum.add(row.dp_cost);
    row.p_hat = p_hat;
    row.loss = loss;
    row.gap = loss - f_star;
    row.dp_cum = dp_cum.value();
    res.rows.push_back(row);
    res.final_gap = row.gap;
  }

  res.accountant = accountant_check(
      cost_records, PrivacyBudget::make(cfg.epsilon, cfg.delta));
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return res;
}

}  // namespace

std::unique_ptr<Task> build_task(const ExperimentConfig& cfg) {
  if (cfg.task == "quadratic")
    return quadratic_task(cfg.dim, cfg.clients, cfg.condition_number,
                          cfg.seeds.data);
  if (cfg.task == "logistic")
    return logistic_task(cfg.dim, cfg.clients, cfg.samples, cfg.seeds.data,
                         cfg.separation);
  throw std::invalid_argument("build_task: unknown task \"" + cfg.task + "\"");
}

Eigen::MatrixXd presample_gains(const ExperimentConfig& cfg) {
  Eigen::MatrixXd gains(cfg.iterations, cfg.clients);
  for (long t = 1; t <= cfg.iterations; ++t)
    gains.row(t - 1) = sample_channel(cfg.clients, static_cast<std::uint64_t>(t),
                                      cfg.seeds.channel, cfg.noise_power)
                           .gains.transpose();
  return gains;
}

PowerSchedule solve_policy(const ExperimentConfig& cfg,
                           const Eigen::MatrixXd& gains) {
  const bool digital = is_digital(cfg.mode);
  SolverInputs in;
  in.gains = gains;
  in.power_cap = cfg.power();
  in.noise_power = cfg.noise_power;
  in.gamma = digital ? 1.0 : cfg.gamma;
  in.contraction = cfg.contraction;
  in.e0 = cfg.e0;
  in.dim = cfg.dim;
  const double r = r_dp(cfg.epsilon, cfg.delta);
  switch (cfg.policy) {
    case Policy::kSolution:
      return digital ? solve_p2(in, r) : solve_p1(in, r);
    case Policy::kStatic:
      return static_schedule(in, r);
    case Policy::kReversed:
      return reversed_schedule(in, r, digital);
  }
  throw std::logic_error("solve_policy: bad policy");
}

RunResult run(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const std::unique_ptr<Task> task = build_task(cfg);
  if (is_perfect(cfg.mode)) {
    PowerSchedule none;
    none.sigma.resize(0, cfg.clients);
    return run_core(cfg, *task, Eigen::MatrixXd(), none);
  }
  const Eigen::MatrixXd gains = presample_gains(cfg);
  return run_core(cfg, *task, gains, solve_policy(cfg, gains));
}

ModelVector run_perturbation(const ExperimentConfig& cfg, long t) {
  return generate_perturbation({derive_key(cfg.seeds.model, kTagPerturb),
                                static_cast<std::uint64_t>(t), cfg.mu},
                               cfg.dim);
}

RunResult run_with_schedule(const ExperimentConfig& cfg,
                            const PowerSchedule& schedule) {
  validate_config(cfg);
  const std::unique_ptr<Task> task = build_task(cfg);
  if (is_perfect(cfg.mode)) {
    PowerSchedule none;
    none.sigma.resize(0, cfg.clients);
    return run_core(cfg, *task, Eigen::MatrixXd(), none);
  }
  if (schedule.c.size() != cfg.iterations ||
      schedule.sigma.rows() != cfg.iterations ||
      schedule.sigma.cols() != cfg.clients)
    throw std::invalid_argument(
        "run_with_schedule: schedule shape does not match config");
  return run_core(cfg, *task, presample_gains(cfg), schedule);
}

double perfect_aggregate(const Eigen::VectorXd& projections, bool digital) {
  const Eigen::Index K = projections.size();
  if (K < 1)
    throw std::invalid_argument("perfect_aggregate: need at least one value");
  double sum = 0.0;
  if (digital) {
    for (Eigen::Index k = 0; k < K; ++k) sum += sign_plus(projections[k]);
    return sign_plus(sum);
  }
  // Sequential sum, matching the superposition loop term for term so the
  // noiseless analog pipeline reproduces this value exactly.
  for (Eigen::Index k = 0; k < K; ++k) sum += projections[k];
  return sum / static_cast<double>(K);
}

Eigen::VectorXd estimate_e0(const Task& task,
                            std::span<const ModelVector> checkpoints,
                            int n_directions, int n_batches, long batch_size,
                            double mu, std::uint64_t seed) {
  if (n_directions < 1)
    throw std::invalid_argument("estimate_e0: n_directions must be >= 1");
  if (n_batches < 1)
    throw std::invalid_argument("estimate_e0: n_batches must be >= 1");
  const Eigen::Index d = task.dim();
  const int K = task.num_clients();
  Eigen::VectorXd out(static_cast<Eigen::Index>(checkpoints.size()));
  for (std::size_t ci = 0; ci < checkpoints.size(); ++ci) {
    const ModelVector& w = checkpoints[ci];
    double worst = 0.0;
    for (int j = 0; j < n_directions; ++j) {
      const ModelVector z =
          CounterRng(derive_key(seed, kTagE0Dir, ci, static_cast<std::uint64_t>(j)))
              .normal_vector(d);
      for (int k = 0; k < K; ++k) {
        const double full = spsa_projection(
            [&](const ModelVector& v) { return task.client_full_loss(k, v); },
            w, z, mu);
        const double ref = sign_plus(full);
        int flips = 0;
        for (int b = 0; b < n_batches; ++b) {
          const std::vector<Eigen::Index> batch = draw_batch(
              task, k, batch_size,
              derive_key(derive_key(seed, kTagE0Batch, ci,
                                    static_cast<std::uint64_t>(j)),
                         static_cast<std::uint64_t>(k),
                         static_cast<std::uint64_t>(b)));
          const double p = spsa_projection(
              [&](const ModelVector& v) { return task.client_loss(k, v, batch); },
              w, z, mu);
          if (sign_plus(p) != ref) ++flips;
        }
        worst = std::max(worst,
                         static_cast<double>(flips) / static_cast<double>(n_batches));
      }
    }
    out[static_cast<Eigen::Index>(ci)] = worst;
  }
  return out;
}

double estimate_contraction(const Eigen::VectorXd& gaps) {
  if (gaps.size() < 2)
    throw std::invalid_argument("estimate_contraction: need G_0 and G_1");
  if (!(gaps.array() > 0.0).all())
    throw std::invalid_argument("estimate_contraction: gaps must be > 0");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 1; t < gaps.size(); ++t)
    best = std::min(best, std::pow(gaps[t] / gaps[0],
                                   1.0 / static_cast<double>(t)));
  return best;
}

Histogram projection_histogram(const RunResult& result,
                               const Eigen::VectorXd& edges) {
  if (edges.size() < 2)
    throw std::invalid_argument("projection_histogram: need >= 2 edges");
  for (Eigen::Index i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1]))
      throw std::invalid_argument("projection_histogram: edges must increase");
  Histogram h;
  h.edges = edges;
  h.counts = Eigen::VectorXi::Zero(edges.size() - 1);
  const double gamma = result.config.gamma;
  long total = 0;
  long inside = 0;
  const Eigen::MatrixXd& p = result.raw_projections;
  for (Eigen::Index t = 0; t < p.rows(); ++t) {
    for (Eigen::Index k = 0; k < p.cols(); ++k) {
      const double v = p(t, k);
      ++total;
      if (std::abs(v) <= gamma) ++inside;
      if (v < edges[0] || v > edges[edges.size() - 1]) continue;
      Eigen::Index bin = 0;
      while (bin + 2 < edges.size() && v > edges[bin + 1]) ++bin;
      ++h.counts[bin];
    }
  }
  h.coverage = total == 0 ? 0.0
                          : static_cast<double>(inside) / static_cast<double>(total);
  return h;
}

}  // namespace otazo
