// Orchestrator: one federated zeroth-order training run over a noisy
// multiple-access channel, plus the measurement procedures built on top of it
// (sign-reversal rate, contraction estimate, projection histogram).
#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "otazo/channel.hpp"
#include "otazo/config.hpp"
#include "otazo/power.hpp"
#include "otazo/privacy.hpp"
#include "otazo/task.hpp"
#include "otazo/zo.hpp"

namespace otazo {

struct IterationRecord {
  long t = 0;          // 1-based iteration index
  double loss = 0.0;   // global full-data loss after the update
  double gap = 0.0;    // loss - F*
  double p_hat = 0.0;  // broadcast scalar (sign in digital modes)
  double c = 0.0;      // effective gain (0 in perfect modes)
  double m = 0.0;      // effective noise std (0 in perfect modes)
  double dp_cost = 0.0;
  double dp_cum = 0.0;
  int clipped = 0;     // clients clipped this iteration
};

struct RunResult {
  ExperimentConfig config;
  std::vector<IterationRecord> rows;
  Eigen::MatrixXd raw_projections;  // T x K, before clipping
  double initial_gap = 0.0;
  double final_gap = 0.0;
  AccountantVerdict accountant;
  double wall_seconds = 0.0;
  // Snapshots of w taken before iterations 1, 1+E, 1+2E, ... when
  // config.checkpoint_every = E > 0.
  std::vector<ModelVector> checkpoints;
  std::vector<long> checkpoint_iters;
};

std::unique_ptr<Task> build_task(const ExperimentConfig& cfg);

// T x K gains, row t drawn for iteration t+1 (block fading).
Eigen::MatrixXd presample_gains(const ExperimentConfig& cfg);

// Schedule for the configured policy over the given gains.
PowerSchedule solve_policy(const ExperimentConfig& cfg,
                           const Eigen::MatrixXd& gains);

RunResult run(const ExperimentConfig& cfg);

// The perturbation direction run() uses at iteration t (1-based).
ModelVector run_perturbation(const ExperimentConfig& cfg, long t);

// Same loop with a caller-supplied schedule instead of a solved one (perfect
// modes ignore the schedule). The schedule must cover all iterations.
RunResult run_with_schedule(const ExperimentConfig& cfg,
                            const PowerSchedule& schedule);

// Noiseless reference aggregation: mean (analog) or majority-vote sign with
// ties broken to +1 (digital).
double perfect_aggregate(const Eigen::VectorXd& projections, bool digital);

// Per-checkpoint max over directions and clients of the fraction of batches
// whose projection sign disagrees with the client's own full-shard
// projection sign. batch_size = 0 means full shard (zero by construction).
Eigen::VectorXd estimate_e0(const Task& task,
                            std::span<const ModelVector> checkpoints,
                            int n_directions, int n_batches, long batch_size,
                            double mu, std::uint64_t seed);

// min over t >= 1 of (G_t / G_0)^(1/t); gaps[0] is G_0.
double estimate_contraction(const Eigen::VectorXd& gaps);

struct Histogram {
  Eigen::VectorXd edges;
  Eigen::VectorXi counts;
  double coverage = 0.0;  // fraction of raw projections inside [-gamma, gamma]
};

Histogram projection_histogram(const RunResult& result,
                               const Eigen::VectorXd& edges);

}  // namespace otazo
