// Zeroth-order gradient projections: shared perturbation directions, the
// two-point SPSA estimate, clipping, and the rank-one model update.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include <Eigen/Core>

#include "otazo/rng.hpp"

namespace otazo {

using ModelVector = Eigen::VectorXd;

// Identifies one shared perturbation draw. Every client derives the same z
// from (global_seed, iteration), which is what lets a scalar projection carry
// the whole gradient step.
struct PerturbationSpec {
  std::uint64_t global_seed = 0;
  std::uint64_t iteration = 0;
  double mu = 1e-3;
};

struct GradientProjection {
  double value = 0.0;
  bool was_clipped = false;
  int client_id = -1;
};

ModelVector generate_perturbation(const PerturbationSpec& spec,
                                  Eigen::Index dim);

// Central difference of a scalar loss along z. The callable must evaluate the
// same batch on both sides; callers bind the batch before calling so the two
// evaluations cannot drift apart.
template <class Loss>
double spsa_projection(Loss&& loss, const ModelVector& w, const ModelVector& z,
                       double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("spsa_projection: mu must be > 0");
  const double up = loss(ModelVector(w + mu * z));
  if (!std::isfinite(up))
    throw std::domain_error("spsa_projection: loss diverged at w + mu*z");
  const double down = loss(ModelVector(w - mu * z));
  if (!std::isfinite(down))
    throw std::domain_error("spsa_projection: loss diverged at w - mu*z");
  return (up - down) / (2.0 * mu);
}

GradientProjection clip_projection(double p, double gamma);

inline ModelVector apply_update(const ModelVector& w, double eta, double p_hat,
                                const ModelVector& z) {
  return w - (eta * p_hat) * z;
}

}  // namespace otazo
