#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "otazo/fedsim.hpp"
#include "otazo/verify.hpp"

using namespace otazo;

namespace {

ExperimentConfig quad_config(long T, Mode mode) {
  ExperimentConfig cfg;
  cfg.task = "quadratic";
  cfg.dim = 20;
  cfg.clients = 5;
  cfg.iterations = T;
  cfg.eta = 0.005;
  cfg.mode = mode;
  return cfg;
}

bool rows_equal(const std::vector<IterationRecord>& a,
                const std::vector<IterationRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].t != b[i].t || a[i].loss != b[i].loss || a[i].gap != b[i].gap ||
        a[i].p_hat != b[i].p_hat || a[i].c != b[i].c || a[i].m != b[i].m ||
        a[i].clipped != b[i].clipped)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("build_task dispatches on the task id") {
  ExperimentConfig cfg = quad_config(10, Mode::kPerfectAnalog);
  CHECK(build_task(cfg)->dim() == 20);
  cfg.task = "logistic";
  cfg.samples = 60;
  CHECK(build_task(cfg)->client_samples(0) == 12);
  cfg.task = "bogus";
  CHECK_THROWS_AS(build_task(cfg), std::invalid_argument);
}

TEST_CASE("presampled gains are deterministic, positive, and T x K") {
  const ExperimentConfig cfg = quad_config(30, Mode::kAnalog);
  const Eigen::MatrixXd a = presample_gains(cfg);
  CHECK(a.rows() == 30);
  CHECK(a.cols() == 5);
  CHECK((a.array() > 0.0).all());
  CHECK(a == presample_gains(cfg));
}

TEST_CASE("perfect aggregation examples") {
  Eigen::VectorXd two(2);
  two << 1.0, 3.0;
  CHECK(perfect_aggregate(two, false) == 2.0);

  Eigen::VectorXd three(3);
  three << 2.0, -1.0, -1.0;
  CHECK(perfect_aggregate(three, true) == -1.0);

  Eigen::VectorXd tie(2);
  tie << 1.0, -1.0;
  CHECK(perfect_aggregate(tie, true) == 1.0);

  CHECK_THROWS_AS(perfect_aggregate(Eigen::VectorXd(), false),
                  std::invalid_argument);
}

TEST_CASE("runs are deterministic given equal seeds") {
  const ExperimentConfig cfg = quad_config(50, Mode::kAnalog);
  const RunResult a = run(cfg);
  const RunResult b = run(cfg);
  CHECK(rows_equal(a.rows, b.rows));
  CHECK(a.raw_projections == b.raw_projections);

  ExperimentConfig other = cfg;
  other.seeds.noise = 99;
  CHECK_FALSE(rows_equal(a.rows, run(other).rows));
}

TEST_CASE("run shape: T rows, gap bookkeeping, accountant attached") {
  const ExperimentConfig cfg = quad_config(40, Mode::kAnalog);
  const RunResult res = run(cfg);
  REQUIRE(res.rows.size() == 40);
  CHECK(res.initial_gap > 0.0);
  CHECK(res.final_gap == res.rows.back().gap);
  for (const IterationRecord& row : res.rows) {
    REQUIRE(row.gap == row.loss);  // quadratic F* = 0
    REQUIRE(row.c > 0.0);
    REQUIRE(row.m > 0.0);
    REQUIRE(row.dp_cost > 0.0);
  }
  CHECK(res.accountant.pass);
  CHECK(res.rows.back().dp_cum ==
        doctest::Approx(res.accountant.total).epsilon(1e-12));
}

TEST_CASE("accountant passes for every policy on live channels") {
  for (Policy p : {Policy::kSolution, Policy::kStatic, Policy::kReversed}) {
    ExperimentConfig cfg = quad_config(100, Mode::kAnalog);
    cfg.policy = p;
    const RunResult res = run(cfg);
    REQUIRE(res.accountant.pass);
    REQUIRE(res.accountant.slack >= 0.0);
  }
}

TEST_CASE("perfect-analog training contracts the quadratic gap") {
  ExperimentConfig cfg = quad_config(5000, Mode::kPerfectAnalog);
  const RunResult res = run(cfg);
  CHECK(res.final_gap < 0.01 * res.initial_gap);
  for (const IterationRecord& row : res.rows) {
    REQUIRE(row.c == 0.0);
    REQUIRE(row.m == 0.0);
    REQUIRE(row.dp_cost == 0.0);
  }
  CHECK(res.accountant.pass);
}

TEST_CASE("perfect-mode quadratic descent is monotone for eta <= 1/L") {
  ExperimentConfig cfg = quad_config(300, Mode::kPerfectAnalog);
  cfg.eta = 0.002;
  const RunResult res = run(cfg);
  double prev = res.initial_gap;
  int ups = 0;
  for (const IterationRecord& row : res.rows) {
    if (row.gap > prev) ++ups;
    prev = row.gap;
  }
  // Random z directions cannot increase the loss in exact arithmetic when the
  // step stays inside 1/L; allow nothing beyond rounding.
  CHECK(ups == 0);
}

TEST_CASE("noiseless analog channel reproduces perfect-analog bit for bit") {
  ExperimentConfig chan_cfg = quad_config(50, Mode::kAnalog);
  chan_cfg.noise_power = 1e-300;
  chan_cfg.use_snr = false;
  chan_cfg.power_cap = 1.0;

  PowerSchedule manual;
  manual.c = Eigen::VectorXd::Ones(50);
  manual.sigma = Eigen::MatrixXd::Zero(50, 5);
  const RunResult noiseless = run_with_schedule(chan_cfg, manual);

  ExperimentConfig perfect_cfg = chan_cfg;
  perfect_cfg.mode = Mode::kPerfectAnalog;
  const RunResult perfect = run(perfect_cfg);

  REQUIRE(noiseless.rows.size() == perfect.rows.size());
  for (std::size_t i = 0; i < perfect.rows.size(); ++i) {
    REQUIRE(noiseless.rows[i].p_hat == perfect.rows[i].p_hat);
    REQUIRE(noiseless.rows[i].loss == perfect.rows[i].loss);
  }
}

TEST_CASE("manual schedules must cover the horizon") {
  ExperimentConfig cfg = quad_config(10, Mode::kAnalog);
  PowerSchedule bad;
  bad.c = Eigen::VectorXd::Ones(9);
  bad.sigma = Eigen::MatrixXd::Zero(9, 5);
  CHECK_THROWS_WITH_AS(run_with_schedule(cfg, bad),
                       "run_with_schedule: schedule shape does not match config",
                       std::invalid_argument);
}

TEST_CASE("diverging losses abort with the iteration index") {
  ExperimentConfig cfg = quad_config(50, Mode::kPerfectAnalog);
  cfg.eta = 1e200;
  CHECK_THROWS_WITH_AS(run(cfg), doctest::Contains("non-finite loss"),
                       std::runtime_error);
}

TEST_CASE("logistic perfect run drops below 0.9 ln 2 on separable data") {
  ExperimentConfig cfg;
  cfg.task = "logistic";
  cfg.dim = 20;
  cfg.clients = 5;
  cfg.samples = 300;
  cfg.separation = 2.0;
  cfg.iterations = 2000;
  cfg.eta = 1e-3;
  cfg.mode = Mode::kPerfectAnalog;
  const RunResult res = run(cfg);
  const double ln2 = std::numbers::ln2;
  CHECK(res.rows.front().loss <= ln2 * 1.05);
  CHECK(res.rows.back().loss < 0.9 * ln2);
}

TEST_CASE("batched runs stay deterministic") {
  ExperimentConfig cfg;
  cfg.task = "logistic";
  cfg.dim = 8;
  cfg.clients = 3;
  cfg.samples = 90;
  cfg.iterations = 30;
  cfg.batch_size = 16;
  cfg.mode = Mode::kAnalog;
  const RunResult a = run(cfg);
  const RunResult b = run(cfg);
  CHECK(rows_equal(a.rows, b.rows));

  ExperimentConfig other = cfg;
  other.seeds.data = 17;
  CHECK_FALSE(rows_equal(a.rows, run(other).rows));
}

TEST_CASE("digital broadcast is always a sign") {
  ExperimentConfig cfg = quad_config(60, Mode::kDigital);
  cfg.gamma = 100.0;
  cfg.e0 = 0.4960;
  const RunResult res = run(cfg);
  for (const IterationRecord& row : res.rows)
    REQUIRE(std::abs(row.p_hat) == 1.0);
  CHECK(res.accountant.pass);
}

TEST_CASE("checkpoints snapshot w before iterations 1, 1+E, ...") {
  ExperimentConfig cfg = quad_config(25, Mode::kPerfectAnalog);
  cfg.checkpoint_every = 10;
  const RunResult res = run(cfg);
  REQUIRE(res.checkpoint_iters == std::vector<long>{1, 11, 21});
  REQUIRE(res.checkpoints.size() == 3);
  const auto task = build_task(cfg);
  CHECK(res.checkpoints[0] == task->initial_point(cfg.seeds.model));
  CHECK(res.checkpoints[1] != res.checkpoints[0]);
}

TEST_CASE("run_perturbation reproduces the direction stream") {
  const ExperimentConfig cfg = quad_config(5, Mode::kPerfectAnalog);
  const ModelVector z1 = run_perturbation(cfg, 1);
  CHECK(z1.size() == 20);
  CHECK(z1 == run_perturbation(cfg, 1));
  CHECK(z1 != run_perturbation(cfg, 2));
}

TEST_CASE("estimate_e0 is zero with full batches and validates inputs") {
  const auto task = quadratic_task(6, 3, 4.0, 2);
  std::vector<ModelVector> pts = {task->initial_point(1),
                                  task->initial_point(2)};
  const Eigen::VectorXd e = estimate_e0(*task, pts, 4, 20, 0, 1e-3, 77);
  REQUIRE(e.size() == 2);
  CHECK(e[0] == 0.0);
  CHECK(e[1] == 0.0);
  CHECK_THROWS_AS(estimate_e0(*task, pts, 0, 10, 0, 1e-3, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_e0(*task, pts, 2, 0, 0, 1e-3, 1),
                  std::invalid_argument);
}

TEST_CASE("estimate_e0 sees batch noise on the logistic task") {
  const auto task = logistic_task(10, 3, 300, 11, 1.0);
  std::vector<ModelVector> pts = {task->initial_point(5)};
  const Eigen::VectorXd e32 = estimate_e0(*task, pts, 6, 600, 32, 1e-3, 9999);
  const Eigen::VectorXd e64 = estimate_e0(*task, pts, 6, 600, 64, 1e-3, 9999);
  CHECK(e32[0] > 0.0);
  CHECK(e32[0] < 0.5);
  CHECK(e64[0] < 0.5);
  // Doubling the batch cannot raise the rate beyond Monte-Carlo noise.
  CHECK(e64[0] <= e32[0] + 3.0 * std::sqrt(0.25 / 600.0) + 0.02);
}

TEST_CASE("contraction estimator on synthetic gap curves") {
  Eigen::VectorXd geom(21);
  for (int t = 0; t <= 20; ++t) geom[t] = 2.0 * std::pow(0.9, t);
  CHECK(estimate_contraction(geom) == doctest::Approx(0.9).epsilon(1e-12));

  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(10, 3.5);
  CHECK(estimate_contraction(flat) == 1.0);

  Eigen::VectorXd bad(3);
  bad << 1.0, 0.5, 0.0;
  CHECK_THROWS_AS(estimate_contraction(bad), std::invalid_argument);
  CHECK_THROWS_AS(estimate_contraction(Eigen::VectorXd::Constant(1, 2.0)),
                  std::invalid_argument);
}

TEST_CASE("projection histogram bins and coverage") {
  RunResult res;
  res.config = quad_config(3, Mode::kPerfectAnalog);
  res.config.gamma = 0.25;
  res.raw_projections.resize(3, 2);
  res.raw_projections << 0.2, -0.2, 0.0, 0.3, 3.0, -0.05;

  Eigen::VectorXd edges(4);
  edges << -1.0, -0.1, 0.1, 1.0;
  const Histogram h = projection_histogram(res, edges);
  REQUIRE(h.counts.size() == 3);
  CHECK(h.counts[0] == 1);  // -0.2
  CHECK(h.counts[1] == 2);  // 0.0, -0.05
  CHECK(h.counts[2] == 2);  // 0.2, 0.3 (3.0 falls outside the edges)
  CHECK(h.coverage == doctest::Approx(4.0 / 6.0).epsilon(1e-15));

  RunResult zeros;
  zeros.config = res.config;
  zeros.config.gamma = 100.0;
  zeros.raw_projections = Eigen::MatrixXd::Zero(3, 2);
  const Histogram hz = projection_histogram(zeros, edges);
  CHECK(hz.counts[0] == 0);
  CHECK(hz.counts[1] == 6);
  CHECK(hz.counts[2] == 0);
  CHECK(hz.coverage == 1.0);

  Eigen::VectorXd decreasing(2);
  decreasing << 1.0, -1.0;
  CHECK_THROWS_AS(projection_histogram(res, decreasing),
                  std::invalid_argument);
}

TEST_CASE("suite names are validated") {
  CHECK_THROWS_AS(run_suite("everything"), std::invalid_argument);
}
