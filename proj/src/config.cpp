#include "otazo/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace otazo {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kAnalog: return "analog";
    case Mode::kDigital: return "digital";
    case Mode::kPerfectAnalog: return "perfect-analog";
    case Mode::kPerfectDigital: return "perfect-digital";
  }
  throw std::logic_error("to_string: bad mode");
}

std::string to_string(Policy policy) {
  switch (policy) {
    case Policy::kSolution: return "solution";
    case Policy::kStatic: return "static";
    case Policy::kReversed: return "reversed";
  }
  throw std::logic_error("to_string: bad policy");
}

Mode mode_from_string(const std::string& s) {
  if (s == "analog") return Mode::kAnalog;
  if (s == "digital") return Mode::kDigital;
  if (s == "perfect-analog") return Mode::kPerfectAnalog;
  if (s == "perfect-digital") return Mode::kPerfectDigital;
  throw std::invalid_argument(
      "config: mode must be one of analog, digital, perfect-analog, "
      "perfect-digital (got \"" + s + "\")");
}

Policy policy_from_string(const std::string& s) {
  if (s == "solution") return Policy::kSolution;
  if (s == "static") return Policy::kStatic;
  if (s == "reversed") return Policy::kReversed;
  throw std::invalid_argument(
      "config: policy must be one of solution, static, reversed (got \"" + s +
      "\")");
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.task != "quadratic" && cfg.task != "logistic")
    throw std::invalid_argument("config: unknown task \"" + cfg.task + "\"");
  if (cfg.dim < 1) throw std::invalid_argument("config: dim must be >= 1");
  if (cfg.clients < 1)
    throw std::invalid_argument("config: clients must be >= 1");
  if (cfg.iterations < 0)
    throw std::invalid_argument("config: iterations must be >= 0");
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("config: eta must be > 0");
  if (!(cfg.mu > 0.0)) throw std::invalid_argument("config: mu must be > 0");
  if (!(cfg.gamma > 0.0))
    throw std::invalid_argument("config: gamma must be > 0");
  if (!(cfg.epsilon > 0.0))
    throw std::invalid_argument("config: epsilon must be > 0");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
    throw std::invalid_argument("config: delta out of (0,1)");
  if (!(cfg.noise_power > 0.0))
    throw std::invalid_argument("config: noise_power must be > 0");
  if (!cfg.use_snr && !(cfg.power_cap > 0.0))
    throw std::invalid_argument("config: power must be > 0");
  if (!(cfg.e0 > 0.0 && cfg.e0 < 0.5))
    throw std::invalid_argument("config: e0 out of (0, 0.5)");
  if (!(cfg.contraction > 0.0 && cfg.contraction < 1.0))
    throw std::invalid_argument("config: contraction out of (0,1)");
  if (cfg.batch_size < 0)
    throw std::invalid_argument("config: batch_size must be >= 0");
  if (!(cfg.condition_number >= 1.0))
    throw std::invalid_argument("config: condition_number must be >= 1");
  if (cfg.samples < cfg.clients)
    throw std::invalid_argument("config: samples must be >= clients");
  if (!(cfg.separation >= 0.0))
    throw std::invalid_argument("config: separation must be >= 0");
  if (!(cfg.theta >= 0.0))
    throw std::invalid_argument("config: theta must be >= 0");
  if (!(cfg.effective_rank >= 0.0))
    throw std::invalid_argument("config: effective_rank must be >= 0");
  if (cfg.checkpoint_every < 0)
    throw std::invalid_argument("config: checkpoint_every must be >= 0");
}

namespace {

const std::set<std::string> kKnownKeys = {
    "task",      "dim",        "clients",     "iterations",
    "eta",       "mu",         "gamma",       "epsilon",
    "delta",     "noise_power", "snr_max_db", "power",
    "mode",      "policy",     "seeds",       "e0",
    "contraction", "batch_size", "condition_number", "samples",
    "separation", "theta",     "effective_rank", "checkpoint_every"};

const std::set<std::string> kSeedKeys = {"model", "channel", "noise", "data"};

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument(std::string("config: field \"") + key +
                                  "\" has the wrong type");
    }
  }
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object())
    throw std::invalid_argument("config: top level must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKnownKeys.count(key))
      throw std::invalid_argument("config: unknown key \"" + key + "\"");
  }

  ExperimentConfig cfg;
  read_field(j, "task", cfg.task);
  long dim = static_cast<long>(cfg.dim);
  read_field(j, "dim", dim);
  cfg.dim = dim;
  read_field(j, "clients", cfg.clients);
  read_field(j, "iterations", cfg.iterations);
  read_field(j, "eta", cfg.eta);
  read_field(j, "mu", cfg.mu);
  read_field(j, "gamma", cfg.gamma);
  read_field(j, "epsilon", cfg.epsilon);
  read_field(j, "delta", cfg.delta);
  read_field(j, "noise_power", cfg.noise_power);

  const bool has_snr = j.contains("snr_max_db");
  const bool has_power = j.contains("power");
  if (has_snr && has_power)
    throw std::invalid_argument(
        "config: give either snr_max_db or power, not both");
  if (has_power) {
    cfg.use_snr = false;
    read_field(j, "power", cfg.power_cap);
  } else if (has_snr) {
    cfg.use_snr = true;
    read_field(j, "snr_max_db", cfg.snr_max_db);
  }

  if (j.contains("mode")) cfg.mode = mode_from_string(j.at("mode").get<std::string>());
  if (j.contains("policy"))
    cfg.policy = policy_from_string(j.at("policy").get<std::string>());

  if (j.contains("seeds")) {
    const nlohmann::json& s = j.at("seeds");
    if (!s.is_object())
      throw std::invalid_argument("config: seeds must be an object");
    for (const auto& [key, value] : s.items()) {
      if (!kSeedKeys.count(key))
        throw std::invalid_argument("config: unknown seeds key \"" + key + "\"");
    }
    read_field(s, "model", cfg.seeds.model);
    read_field(s, "channel", cfg.seeds.channel);
    read_field(s, "noise", cfg.seeds.noise);
    read_field(s, "data", cfg.seeds.data);
  }

  read_field(j, "e0", cfg.e0);
  read_field(j, "contraction", cfg.contraction);
  read_field(j, "batch_size", cfg.batch_size);
  read_field(j, "condition_number", cfg.condition_number);
  read_field(j, "samples", cfg.samples);
  read_field(j, "separation", cfg.separation);
  read_field(j, "theta", cfg.theta);
  read_field(j, "effective_rank", cfg.effective_rank);
  read_field(j, "checkpoint_every", cfg.checkpoint_every);

  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open \"" + path + "\"");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: malformed JSON in \"" + path +
                                "\": " + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["task"] = cfg.task;
  j["dim"] = static_cast<long>(cfg.dim);
  j["clients"] = cfg.clients;
  j["iterations"] = cfg.iterations;
  j["eta"] = cfg.eta;
  j["mu"] = cfg.mu;
  j["gamma"] = cfg.gamma;
  j["epsilon"] = cfg.epsilon;
  j["delta"] = cfg.delta;
  j["noise_power"] = cfg.noise_power;
  if (cfg.use_snr)
    j["snr_max_db"] = cfg.snr_max_db;
  else
    j["power"] = cfg.power_cap;
  j["mode"] = to_string(cfg.mode);
  j["policy"] = to_string(cfg.policy);
  j["seeds"] = {{"model", cfg.seeds.model},
                {"channel", cfg.seeds.channel},
                {"noise", cfg.seeds.noise},
                {"data", cfg.seeds.data}};
  j["e0"] = cfg.e0;
  j["contraction"] = cfg.contraction;
  j["batch_size"] = cfg.batch_size;
  j["condition_number"] = cfg.condition_number;
  j["samples"] = cfg.samples;
  j["separation"] = cfg.separation;
  j["theta"] = cfg.theta;
  j["effective_rank"] = cfg.effective_rank;
  j["checkpoint_every"] = cfg.checkpoint_every;
  return j;
}

}  // namespace otazo
