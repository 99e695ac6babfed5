#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "otazo/config.hpp"
#include "otazo/fedsim.hpp"
#include "otazo/io.hpp"

using namespace otazo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "otazo-io-test") {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("format_double round trips doubles exactly") {
  for (double v : {3.141592653589793, 0.1, -2.5e-300, 1e17, -0.0, 123456.75}) {
    const std::string s = format_double(v);
    REQUIRE(std::stod(s) == v);
  }
}

TEST_CASE("run CSV has the documented schema and is byte-stable") {
  TempDir tmp;
  ExperimentConfig cfg;
  cfg.iterations = 20;
  cfg.mode = Mode::kAnalog;
  const RunResult res = run(cfg);

  const fs::path a = tmp.path / "a.csv";
  const fs::path b = tmp.path / "b.csv";
  write_run_csv(a.string(), res);
  write_run_csv(b.string(), res);
  const std::string text = slurp(a);
  CHECK(text == slurp(b));

  const std::vector<std::string> lines = lines_of(text);
  REQUIRE(lines.size() == 22);
  CHECK(lines[0] == "# schema: otazo.run.v1");
  CHECK(lines[1] == "t,loss,gap,p_hat,c_t,m_t,dp_cost,dp_cum,clipped_count");
  CHECK(lines[2].substr(0, 2) == "1,");

  // The loss column round trips through the text exactly.
  const std::string& first = lines[2];
  const std::size_t c1 = first.find(',');
  const std::size_t c2 = first.find(',', c1 + 1);
  CHECK(std::stod(first.substr(c1 + 1, c2 - c1 - 1)) == res.rows[0].loss);
}

TEST_CASE("schedule CSV carries per-iteration costs and a cumulative sum") {
  TempDir tmp;
  PowerSchedule s;
  s.c.resize(3);
  s.c << 0.1, 0.2, 0.3;
  s.sigma = Eigen::MatrixXd::Zero(3, 2);
  std::vector<PrivacyCostRecord> costs = {{1, 0.5}, {2, 0.25}, {3, 0.125}};

  const fs::path p = tmp.path / "sched.csv";
  write_schedule_csv(p.string(), s, costs);
  const std::vector<std::string> lines = lines_of(slurp(p));
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "# schema: otazo.schedule.v1");
  CHECK(lines[1] == "t,c_t,sigma_0,sigma_1,cost_t,cumulative_cost");
  CHECK(lines[2] == "1,0.10000000000000001,0,0,0.5,0.5");
  CHECK(lines[4].substr(lines[4].rfind(',') + 1) == "0.875");

  costs.pop_back();
  CHECK_THROWS_AS(write_schedule_csv(p.string(), s, costs),
                  std::invalid_argument);
}

TEST_CASE("sweep CSV lists one row per point") {
  TempDir tmp;
  std::vector<SweepRow> rows(2);
  rows[0] = {"snr_max", "0", "analog", "solution", 1.5, 0.25, 0.1, 4, "ok"};
  rows[1] = {"snr_max", "10", "analog", "solution", 0.5, 0.125, 0.2, 4, "ok"};
  const fs::path p = tmp.path / "sweep.csv";
  write_sweep_csv(p.string(), rows);
  const std::vector<std::string> lines = lines_of(slurp(p));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "# schema: otazo.sweep.v1");
  CHECK(lines[1] ==
        "axis,value,mode,policy,mean_final_gap,std_final_gap,mean_dp_slack,"
        "repeats,status");
  CHECK(lines[2] == "snr_max,0,analog,solution,1.5,0.25,0.10000000000000001,4,ok");
}

TEST_CASE("summary JSON embeds a lossless config echo") {
  TempDir tmp;
  ExperimentConfig cfg;
  cfg.iterations = 5;
  cfg.mode = Mode::kPerfectAnalog;
  cfg.checkpoint_every = 2;
  const RunResult res = run(cfg);
  const fs::path p = tmp.path / "summary.json";
  write_summary_json(p.string(), res);

  const nlohmann::json j = nlohmann::json::parse(slurp(p));
  CHECK(j["schema"] == "otazo.summary.v1");
  CHECK(j["final_gap"].get<double>() == res.final_gap);
  CHECK(j["accountant"]["pass"].get<bool>());
  CHECK(parse_config(j["config"]) == cfg);
}

TEST_CASE("error JSON shape") {
  TempDir tmp;
  const fs::path p = tmp.path / "error.json";
  write_error_json(p.string(), "solver-error", "bracket upper limit binds");
  const nlohmann::json j = nlohmann::json::parse(slurp(p));
  CHECK(j["error"]["type"] == "solver-error");
  CHECK(j["error"]["message"] == "bracket upper limit binds");
}

TEST_CASE("writers report unwritable paths") {
  RunResult res;
  CHECK_THROWS_AS(write_run_csv("/nonexistent-dir/out.csv", res),
                  std::runtime_error);
}
