#include "otazo/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "otazo/rng.hpp"

namespace otazo {

ChannelRealization sample_channel(int K, std::uint64_t t,
                                  std::uint64_t channel_seed,
                                  double noise_power) {
  if (K < 1) throw std::invalid_argument("sample_channel: K must be >= 1");
  if (!(noise_power > 0.0))
    throw std::invalid_argument("sample_channel: noise_power must be > 0");
  ChannelRealization chan;
  chan.gains.resize(K);
  chan.noise_power = noise_power;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < K; ++k) {
    CounterRng rng(derive_key(channel_seed, t, static_cast<std::uint64_t>(k)));
    const double u1 = rng.next_normal();
    const double u2 = rng.next_normal();
    // Unit-scale Rayleigh: E[h^2] = 1.
    chan.gains[k] = std::sqrt(u1 * u1 + u2 * u2) * inv_sqrt2;
  }
  return chan;
}

namespace {

double draw_artificial_noise(double sigma_k, std::uint64_t noise_seed) {
  if (sigma_k == 0.0) return 0.0;
  CounterRng rng(noise_seed);
  return sigma_k * rng.next_normal();
}

}  // namespace

OtaPayload make_analog_payload(const GradientProjection& p, double h_k,
                               double c, double sigma_k, double gamma_k,
                               Eigen::Index dim, std::uint64_t noise_seed) {
  if (!(h_k > 0.0))
    throw std::invalid_argument("make_analog_payload: channel gain must be > 0");
  if (!(c > 0.0))
    throw std::invalid_argument("make_analog_payload: c must be > 0");
  if (sigma_k < 0.0)
    throw std::invalid_argument("make_analog_payload: sigma must be >= 0");
  const double alpha = c / h_k;
  const double n_k = draw_artificial_noise(sigma_k, noise_seed);
  OtaPayload out;
  out.signal = alpha * (p.value + n_k);
  out.received = c * (p.value + n_k);
  out.power_used = alpha * alpha *
                   (gamma_k * gamma_k +
                    static_cast<double>(dim) * sigma_k * sigma_k);
  return out;
}

OtaPayload make_digital_payload(const GradientProjection& p, double h_k,
                                double c, double sigma_k, Eigen::Index dim,
                                std::uint64_t noise_seed) {
  if (!(h_k > 0.0))
    throw std::invalid_argument("make_digital_payload: channel gain must be > 0");
  if (!(c > 0.0))
    throw std::invalid_argument("make_digital_payload: c must be > 0");
  if (sigma_k < 0.0)
    throw std::invalid_argument("make_digital_payload: sigma must be >= 0");
  const double alpha = c / h_k;
  const double n_k = draw_artificial_noise(sigma_k, noise_seed);
  const double s = sign_plus(p.value);
  OtaPayload out;
  out.signal = alpha * (s + n_k);
  out.received = c * (s + n_k);
  out.power_used =
      alpha * alpha * (1.0 + static_cast<double>(dim) * sigma_k * sigma_k);
  return out;
}

double superpose(std::span<const OtaPayload> payloads,
                 const ChannelRealization& chan,
                 std::uint64_t server_noise_seed) {
  if (static_cast<Eigen::Index>(payloads.size()) != chan.gains.size())
    throw std::invalid_argument("superpose: payload/gain count mismatch");
  for (Eigen::Index k = 0; k < chan.gains.size(); ++k)
    if (!(chan.gains[k] > 0.0))
      throw std::invalid_argument("superpose: channel gain must be > 0");
  double y = 0.0;
  for (const OtaPayload& p : payloads) y += p.received;
  CounterRng rng(server_noise_seed);
  y += std::sqrt(chan.noise_power) * rng.next_normal();
  return y;
}

double channel_invert(double y, int K, double c) {
  if (K < 1) throw std::invalid_argument("channel_invert: K must be >= 1");
  if (!(c > 0.0)) throw std::invalid_argument("channel_invert: c must be > 0");
  return y / (static_cast<double>(K) * c);
}

EffectiveNoise effective_noise_std(double c, const Eigen::VectorXd& sigma,
                                   double N0) {
  if (!(c > 0.0))
    throw std::invalid_argument("effective_noise_std: c must be > 0");
  if (!(N0 > 0.0))
    throw std::invalid_argument("effective_noise_std: N0 must be > 0");
  if ((sigma.array() < 0.0).any())
    throw std::invalid_argument("effective_noise_std: sigma must be >= 0");
  return EffectiveNoise{std::sqrt(c * c * sigma.squaredNorm() + N0)};
}

}  // namespace otazo
