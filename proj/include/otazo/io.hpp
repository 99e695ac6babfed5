// Deterministic CSV/JSON emission. Every file starts with a schema id line;
// doubles are printed with %.17g so values round-trip exactly and reruns are
// byte-identical.
#pragma once

#include <string>
#include <vector>

#include "otazo/fedsim.hpp"
#include "otazo/power.hpp"

namespace otazo {

std::string format_double(double v);

void write_run_csv(const std::string& path, const RunResult& result);
void write_summary_json(const std::string& path, const RunResult& result);

void write_schedule_csv(const std::string& path, const PowerSchedule& schedule,
                        const std::vector<PrivacyCostRecord>& costs);

struct SweepRow {
  std::string axis;
  std::string value;
  std::string mode;
  std::string policy;
  double mean_final_gap = 0.0;
  double std_final_gap = 0.0;
  double mean_dp_slack = 0.0;
  int repeats = 0;
  std::string status;  // "ok" or "failed"
};

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows);

void write_error_json(const std::string& path, const std::string& type,
                      const std::string& message);

}  // namespace otazo
