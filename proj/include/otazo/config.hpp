// Experiment configuration: JSON loading with strict key checking, defaults,
// and a lossless serialize/parse round trip.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <json.hpp>

#include <Eigen/Core>

namespace otazo {

enum class Mode { kAnalog, kDigital, kPerfectAnalog, kPerfectDigital };
enum class Policy { kSolution, kStatic, kReversed };

std::string to_string(Mode mode);
std::string to_string(Policy policy);
Mode mode_from_string(const std::string& s);
Policy policy_from_string(const std::string& s);

inline bool is_digital(Mode m) {
  return m == Mode::kDigital || m == Mode::kPerfectDigital;
}
inline bool is_perfect(Mode m) {
  return m == Mode::kPerfectAnalog || m == Mode::kPerfectDigital;
}

struct Seeds {
  std::uint64_t model = 1;
  std::uint64_t channel = 2;
  std::uint64_t noise = 3;
  std::uint64_t data = 4;
  bool operator==(const Seeds&) const = default;
};

struct ExperimentConfig {
  std::string task = "quadratic";
  Eigen::Index dim = 20;
  int clients = 5;
  long iterations = 1000;
  double eta = 1e-3;
  double mu = 1e-3;          // smoothing scale
  double gamma = 100.0;      // projection clip bound
  double epsilon = 5.0;
  double delta = 0.01;
  double noise_power = 1.0;  // N0
  bool use_snr = true;       // power given as max SNR (dB) vs raw cap
  double snr_max_db = 10.0;
  double power_cap = 0.0;    // active when use_snr is false
  Mode mode = Mode::kAnalog;
  Policy policy = Policy::kSolution;
  Seeds seeds;
  double e0 = 0.4960;          // per-client sign-reversal bound (digital)
  double contraction = 0.998;  // A
  long batch_size = 0;         // 0 = full shard
  double condition_number = 5.0;  // quadratic task
  long samples = 500;             // logistic task
  double separation = 1.0;        // logistic task cluster separation
  double theta = 1.0;             // digital gap-bound monitor input
  double effective_rank = 0.0;    // digital gap-bound monitor input
  long checkpoint_every = 0;      // snapshot w before iterations 1, 1+E, ... (0 = off)

  bool operator==(const ExperimentConfig&) const = default;

  // Per-client transmit power limit; SNR converts as P = 10^(dB/10) * d * N0.
  double power() const {
    return use_snr ? std::pow(10.0, snr_max_db / 10.0) *
                         static_cast<double>(dim) * noise_power
                   : power_cap;
  }
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
void validate_config(const ExperimentConfig& cfg);

}  // namespace otazo
