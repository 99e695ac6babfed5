#include "otazo/zo.hpp"

namespace otazo {

ModelVector generate_perturbation(const PerturbationSpec& spec,
                                  Eigen::Index dim) {
  if (dim < 1)
    throw std::invalid_argument("generate_perturbation: dim must be >= 1");
  CounterRng rng(derive_key(spec.global_seed, spec.iteration));
  return rng.normal_vector(dim);
}

GradientProjection clip_projection(double p, double gamma) {
  if (!(gamma > 0.0))
    throw std::invalid_argument("clip_projection: gamma must be > 0");
  if (!std::isfinite(p))
    throw std::domain_error("clip_projection: projection is not finite");
  GradientProjection out;
  if (p > gamma) {
    out.value = gamma;
    out.was_clipped = true;
  } else if (p < -gamma) {
    out.value = -gamma;
    out.was_clipped = true;
  } else {
    out.value = p;
  }
  return out;
}

}  // namespace otazo
