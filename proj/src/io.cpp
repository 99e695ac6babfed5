#include "otazo/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace otazo {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("io: cannot write \"" + path + "\"");
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_run_csv(const std::string& path, const RunResult& result) {
  std::ofstream out = open_out(path);
  out << "# schema: otazo.run.v1\n";
  out << "t,loss,gap,p_hat,c_t,m_t,dp_cost,dp_cum,clipped_count\n";
  for (const IterationRecord& r : result.rows) {
    out << r.t << ',' << format_double(r.loss) << ',' << format_double(r.gap)
        << ',' << format_double(r.p_hat) << ',' << format_double(r.c) << ','
        << format_double(r.m) << ',' << format_double(r.dp_cost) << ','
        << format_double(r.dp_cum) << ',' << r.clipped << '\n';
  }
  if (!out) throw std::runtime_error("io: write failed for \"" + path + "\"");
}

void write_summary_json(const std::string& path, const RunResult& result) {
  nlohmann::json j;
  j["schema"] = "otazo.summary.v1";
  j["initial_gap"] = result.initial_gap;
  j["final_gap"] = result.final_gap;
  j["accountant"] = {{"pass", result.accountant.pass},
                     {"slack", result.accountant.slack},
                     {"total", result.accountant.total}};
  j["wall_seconds"] = result.wall_seconds;
  j["config"] = config_to_json(result.config);
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("io: write failed for \"" + path + "\"");
}

void write_schedule_csv(const std::string& path, const PowerSchedule& schedule,
                        const std::vector<PrivacyCostRecord>& costs) {
  if (static_cast<Eigen::Index>(costs.size()) != schedule.c.size())
    throw std::invalid_argument("write_schedule_csv: cost/schedule mismatch");
  std::ofstream out = open_out(path);
  out << "# schema: otazo.schedule.v1\n";
  out << "t,c_t";
  for (Eigen::Index k = 0; k < schedule.sigma.cols(); ++k)
    out << ",sigma_" << k;
  out << ",cost_t,cumulative_cost\n";
  KahanSum cum;
  for (Eigen::Index t = 0; t < schedule.c.size(); ++t) {
    cum.add(costs[static_cast<std::size_t>(t)].cost);
    out << (t + 1) << ',' << format_double(schedule.c[t]);
    for (Eigen::Index k = 0; k < schedule.sigma.cols(); ++k)
      out << ',' << format_double(schedule.sigma(t, k));
    out << ',' << format_double(costs[static_cast<std::size_t>(t)].cost) << ','
        << format_double(cum.value()) << '\n';
  }
  if (!out) throw std::runtime_error("io: write failed for \"" + path + "\"");
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows) {
  std::ofstream out = open_out(path);
  out << "# schema: otazo.sweep.v1\n";
  out << "axis,value,mode,policy,mean_final_gap,std_final_gap,mean_dp_slack,"
         "repeats,status\n";
  for (const SweepRow& r : rows) {
    out << r.axis << ',' << r.value << ',' << r.mode << ',' << r.policy << ','
        << format_double(r.mean_final_gap) << ','
        << format_double(r.std_final_gap) << ','
        << format_double(r.mean_dp_slack) << ',' << r.repeats << ','
        << r.status << '\n';
  }
  if (!out) throw std::runtime_error("io: write failed for \"" + path + "\"");
}

void write_error_json(const std::string& path, const std::string& type,
                      const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace otazo
