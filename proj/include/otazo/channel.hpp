// Block-fading channel model: Rayleigh gain sampling, uplink payload
// construction with channel inversion, noisy superposition at the server,
// and the effective-noise statistic of the aggregate.
#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Core>

#include "otazo/zo.hpp"

namespace otazo {

struct ChannelRealization {
  Eigen::VectorXd gains;     // per-client amplitude gain, all > 0
  double noise_power = 1.0;  // receiver noise variance N0 > 0
};

// One client's uplink transmission. `signal` is the physical transmit value
// alpha*(payload + noise) with alpha = c/h. `received` is the post-channel
// contribution h*signal evaluated through the inversion identity h*alpha = c,
// i.e. c*(payload + noise) exactly; channel inversion presumes known CSI, so
// the cancellation is exact by construction rather than re-rounded.
struct OtaPayload {
  double signal = 0.0;
  double received = 0.0;
  double power_used = 0.0;  // worst-case expected transmit power of `signal`
};

struct EffectiveNoise {
  double m = 0.0;  // standard deviation of the aggregated noise
};

inline double sign_plus(double x) { return x < 0.0 ? -1.0 : 1.0; }

ChannelRealization sample_channel(int K, std::uint64_t t,
                                  std::uint64_t channel_seed,
                                  double noise_power);

OtaPayload make_analog_payload(const GradientProjection& p, double h_k,
                               double c, double sigma_k, double gamma_k,
                               Eigen::Index dim, std::uint64_t noise_seed);

OtaPayload make_digital_payload(const GradientProjection& p, double h_k,
                                double c, double sigma_k, Eigen::Index dim,
                                std::uint64_t noise_seed);

double superpose(std::span<const OtaPayload> payloads,
                 const ChannelRealization& chan,
                 std::uint64_t server_noise_seed);

double channel_invert(double y, int K, double c);

EffectiveNoise effective_noise_std(double c, const Eigen::VectorXd& sigma,
                                   double N0);

}  // namespace otazo
