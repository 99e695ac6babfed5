// Command-line front end: single runs, sweeps over one config axis, and the
// acceptance suites.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "otazo/config.hpp"
#include "otazo/fedsim.hpp"
#include "otazo/io.hpp"
#include "otazo/power.hpp"
#include "otazo/rng.hpp"
#include "otazo/verify.hpp"

namespace {

namespace fs = std::filesystem;
using namespace otazo;

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    write_error_json((out / "error.json").string(), "config-error", e.what());
    std::fprintf(stderr, "otazo run: %s\n", e.what());
    return 3;
  }
  try {
    const RunResult res = run(cfg);
    write_run_csv((out / "trajectory.csv").string(), res);
    write_summary_json((out / "summary.json").string(), res);
    if (!is_perfect(cfg.mode)) {
      const Eigen::MatrixXd gains = presample_gains(cfg);
      const PowerSchedule sched = solve_policy(cfg, gains);
      SolverInputs in;
      in.gains = gains;
      in.power_cap = cfg.power();
      in.noise_power = cfg.noise_power;
      in.gamma = is_digital(cfg.mode) ? 1.0 : cfg.gamma;
      in.contraction = cfg.contraction;
      in.e0 = cfg.e0;
      in.dim = cfg.dim;
      write_schedule_csv((out / "schedule.csv").string(), sched,
                         schedule_cost_records(in, sched, is_digital(cfg.mode)));
    }
    if (!res.accountant.pass) {
      std::fprintf(stderr,
                   "otazo run: accountant failed (total %.12g, slack %.3g)\n",
                   res.accountant.total, res.accountant.slack);
      return 1;
    }
    std::printf("wrote %s (final gap %.6g, accountant slack %.3g)\n",
                out_dir.c_str(), res.final_gap, res.accountant.slack);
    return 0;
  } catch (const SolverError& e) {
    write_error_json((out / "error.json").string(), "solver-error", e.what());
    std::fprintf(stderr, "otazo run: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    write_error_json((out / "error.json").string(), "run-error", e.what());
    std::fprintf(stderr, "otazo run: %s\n", e.what());
    return 4;
  }
}

ExperimentConfig apply_axis(ExperimentConfig cfg, const std::string& axis,
                            const std::string& value) {
  if (axis == "snr_max") {
    cfg.use_snr = true;
    cfg.snr_max_db = std::stod(value);
  } else if (axis == "eta") {
    cfg.eta = std::stod(value);
  } else if (axis == "policy") {
    cfg.policy = policy_from_string(value);
  } else if (axis == "mode") {
    cfg.mode = mode_from_string(value);
  } else {
    throw std::invalid_argument(
        "sweep: axis must be one of snr_max, policy, mode, eta");
  }
  return cfg;
}

Seeds repeat_seeds(Seeds s, int repeat) {
  const std::uint64_t shift = kGolden * static_cast<std::uint64_t>(repeat);
  s.model += shift;
  s.channel += shift;
  s.noise += shift;
  s.data += shift;
  return s;
}

int worker_count() {
  const char* env = std::getenv("OTAZO_WORKERS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<std::string>& values, int repeats,
              const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  ExperimentConfig base;
  try {
    base = load_config(config_path);
    if (values.empty())
      throw std::invalid_argument("sweep: values must be non-empty");
    if (repeats < 1)
      throw std::invalid_argument("sweep: repeats must be >= 1");
    for (const auto& v : values) apply_axis(base, axis, v);  // validate early
  } catch (const std::exception& e) {
    write_error_json((out / "error.json").string(), "config-error", e.what());
    std::fprintf(stderr, "otazo sweep: %s\n", e.what());
    return 3;
  }

  std::vector<SweepRow> rows(values.size());
  const int workers =
      std::min<int>(worker_count(), static_cast<int>(values.size()));
  auto run_point = [&](std::size_t vi) {
    const ExperimentConfig pt = apply_axis(base, axis, values[vi]);
    SweepRow row;
    row.axis = axis;
    row.value = values[vi];
    row.mode = to_string(pt.mode);
    row.policy = to_string(pt.policy);
    row.repeats = repeats;
    row.status = "ok";
    std::vector<double> gaps;
    double slack_sum = 0.0;
    for (int r = 0; r < repeats; ++r) {
      ExperimentConfig cfg = pt;
      cfg.seeds = repeat_seeds(pt.seeds, r);
      try {
        const RunResult res = run(cfg);
        gaps.push_back(res.final_gap);
        slack_sum += res.accountant.slack;
      } catch (const std::exception& e) {
        row.status = "failed";
        std::fprintf(stderr, "otazo sweep: point %s=%s repeat %d: %s\n",
                     axis.c_str(), values[vi].c_str(), r, e.what());
        break;
      }
    }
    if (row.status == "ok") {
      double mean = 0.0;
      for (const double g : gaps) mean += g;
      mean /= static_cast<double>(gaps.size());
      double var = 0.0;
      for (const double g : gaps) var += (g - mean) * (g - mean);
      row.mean_final_gap = mean;
      row.std_final_gap =
          gaps.size() > 1
              ? std::sqrt(var / static_cast<double>(gaps.size() - 1))
              : 0.0;
      row.mean_dp_slack = slack_sum / static_cast<double>(gaps.size());
    }
    rows[vi] = row;
  };

  if (workers <= 1) {
    for (std::size_t vi = 0; vi < values.size(); ++vi) run_point(vi);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t vi = next.fetch_add(1); vi < values.size();
             vi = next.fetch_add(1))
          run_point(vi);
      });
    for (auto& th : pool) th.join();
  }

  const fs::path csv = out / "sweep.csv";
  write_sweep_csv(csv.string(), rows);
  int failed = 0;
  for (const auto& r : rows)
    if (r.status != "ok") ++failed;
  std::printf("wrote %s (%zu points, %d failed)\n", csv.string().c_str(),
              rows.size(), failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private federated zeroth-order training over noisy channels"};
  app.require_subcommand(1);

  std::string config_path, out_dir, axis, suite = "all";
  std::vector<std::string> values;
  int repeats = 1;

  CLI::App* runc = app.add_subcommand("run", "Execute one training run");
  runc->add_option("--config", config_path, "JSON config path")->required();
  runc->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* sweep =
      app.add_subcommand("sweep", "Run one config axis over several values");
  sweep->add_option("--config", config_path, "JSON config path")->required();
  sweep->add_option("--axis", axis, "One of snr_max, policy, mode, eta")
      ->required();
  sweep->add_option("--values", values, "Comma-separated axis values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--repeats", repeats, "Repeats per point (default 1)");
  sweep->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* verify =
      app.add_subcommand("verify", "Run acceptance suites");
  verify->add_option("--suite", suite,
                     "One of privacy, solver, convergence, all");

  CLI11_PARSE(app, argc, argv);

  if (runc->parsed()) return cmd_run(config_path, out_dir);
  if (sweep->parsed()) return cmd_sweep(config_path, axis, values, repeats, out_dir);
  try {
    return report(run_suite(suite)) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "otazo verify: %s\n", e.what());
    return 3;
  }
}
