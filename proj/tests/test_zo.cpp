#include <cmath>
#include <limits>

#include <doctest.h>
#include <Eigen/Dense>

#include "otazo/zo.hpp"

using namespace otazo;

namespace {

Eigen::MatrixXd random_orthogonal(Eigen::Index d, std::uint64_t seed) {
  CounterRng rng(seed);
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.next_normal();
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

}  // namespace

TEST_CASE("perturbations are deterministic in (seed, iteration)") {
  const ModelVector a = generate_perturbation({7, 0}, 4);
  const ModelVector b = generate_perturbation({7, 0}, 4);
  CHECK(a == b);
  CHECK(a != generate_perturbation({7, 1}, 4));
  CHECK(a != generate_perturbation({8, 0}, 4));
}

TEST_CASE("perturbation entries look standard normal") {
  const ModelVector z = generate_perturbation({7, 0}, 100000);
  const double mean = z.mean();
  const double var = (z.array() - mean).square().sum() / (z.size() - 1);
  CHECK(mean > -0.02);
  CHECK(mean < 0.02);
  CHECK(var > 0.98);
  CHECK(var < 1.02);
}

TEST_CASE("perturbation rejects empty dimension") {
  CHECK_THROWS_AS(generate_perturbation({7, 0}, 0), std::invalid_argument);
}

TEST_CASE("spsa is exact on the textbook quadratic") {
  auto loss = [](const ModelVector& v) { return 0.5 * v.squaredNorm(); };
  ModelVector w(2), z(2);
  w << 1, 2;
  z << 1, -1;
  CHECK(spsa_projection(loss, w, z, 0.5) == -1.0);
  CHECK(spsa_projection(loss, w, z, 1e-3) ==
        doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("zero direction gives zero projection") {
  auto loss = [](const ModelVector& v) { return v.squaredNorm() + 3.0; };
  ModelVector w(3), z = ModelVector::Zero(3);
  w << 1, -2, 5;
  CHECK(spsa_projection(loss, w, z, 1e-3) == 0.0);
}

TEST_CASE("quartic curvature error stays within the third-derivative bound") {
  auto loss = [](const ModelVector& v) { return v.array().pow(4).sum(); };
  ModelVector w(1), z(1);
  w << 1;
  z << 1;
  const double mu = 0.1;
  const double p = spsa_projection(loss, w, z, mu);
  CHECK(p == doctest::Approx(4.04).epsilon(1e-12));
  const double third_max = 24.0 * 1.1;  // max |F'''| on [0.9, 1.1]
  CHECK(std::abs(p - 4.0) <= third_max * mu * mu / 6.0 + 1e-12);
}

TEST_CASE("spsa is exact to rounding on random quadratics across mu") {
  const Eigen::Index d = 8;
  for (int inst = 0; inst < 10; ++inst) {
    const Eigen::MatrixXd r = random_orthogonal(d, 100 + inst);
    Eigen::VectorXd eigs =
        Eigen::VectorXd::LinSpaced(d, 0.5, 2.0);
    const Eigen::MatrixXd q = r * eigs.asDiagonal() * r.transpose();
    CounterRng rng(200 + inst);
    ModelVector e = rng.normal_vector(d);
    e *= 0.1 / e.norm();
    const ModelVector z = rng.normal_vector(d);
    auto loss = [&](const ModelVector& v) { return 0.5 * v.dot(q * v); };
    const ModelVector w = e;  // minimizer at the origin
    const double p_true = z.dot(q * e);
    for (double mu : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
      const double p = spsa_projection(loss, w, z, mu);
      REQUIRE(std::abs(p - p_true) <= 1e-10 * (1.0 + std::abs(p_true)));
    }
  }
}

TEST_CASE("spsa unbiasedness: mean of p*z recovers the gradient") {
  const Eigen::Index d = 5;
  const Eigen::MatrixXd r = random_orthogonal(d, 5);
  Eigen::VectorXd eigs = Eigen::VectorXd::LinSpaced(d, 1.0, 4.0);
  const Eigen::MatrixXd q = r * eigs.asDiagonal() * r.transpose();
  CounterRng rng(17);
  const ModelVector w = rng.normal_vector(d);
  const ModelVector g = q * w;
  auto loss = [&](const ModelVector& v) { return 0.5 * v.dot(q * v); };

  const int n = 50000;
  ModelVector sum = ModelVector::Zero(d);
  ModelVector sumsq = ModelVector::Zero(d);
  for (int i = 0; i < n; ++i) {
    const ModelVector z =
        generate_perturbation({99, static_cast<std::uint64_t>(i)}, d);
    const double p = spsa_projection(loss, w, z, 1e-3);
    const ModelVector est = p * z;
    sum += est;
    sumsq += est.cwiseProduct(est);
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    const double mean = sum[i] / n;
    const double var = sumsq[i] / n - mean * mean;
    const double se = std::sqrt(var / n);
    REQUIRE(std::abs(mean - g[i]) <= 5.0 * se + 1e-3);
  }
}

TEST_CASE("spsa validates mu and reports the diverging side") {
  auto loss = [](const ModelVector& v) { return v.squaredNorm(); };
  ModelVector w(1), z(1);
  w << 0;
  z << 1;
  CHECK_THROWS_AS(spsa_projection(loss, w, z, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(spsa_projection(loss, w, z, -1e-3), std::invalid_argument);

  auto blow_up = [](const ModelVector& v) {
    return v[0] > 1.0 ? std::numeric_limits<double>::infinity()
                      : v.squaredNorm();
  };
  ModelVector near(1);
  near << 0.9;
  CHECK_THROWS_WITH_AS(spsa_projection(blow_up, near, z, 0.2),
                       doctest::Contains("w + mu*z"), std::domain_error);
  auto blow_down = [](const ModelVector& v) {
    return v[0] < -1.0 ? std::numeric_limits<double>::quiet_NaN()
                       : v.squaredNorm();
  };
  ModelVector near_neg(1);
  near_neg << -0.9;
  CHECK_THROWS_WITH_AS(spsa_projection(blow_down, near_neg, z, 0.2),
                       doctest::Contains("w - mu*z"), std::domain_error);
}

TEST_CASE("clipping matches the saturation examples") {
  GradientProjection a = clip_projection(150.0, 100.0);
  CHECK(a.value == 100.0);
  CHECK(a.was_clipped);
  GradientProjection b = clip_projection(-3.0, 100.0);
  CHECK(b.value == -3.0);
  CHECK_FALSE(b.was_clipped);
  GradientProjection c = clip_projection(-100.0, 100.0);
  CHECK(c.value == -100.0);
  CHECK_FALSE(c.was_clipped);
}

TEST_CASE("clipping validates inputs") {
  CHECK_THROWS_AS(clip_projection(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(clip_projection(1.0, -5.0), std::invalid_argument);
  CHECK_THROWS_AS(
      clip_projection(std::numeric_limits<double>::infinity(), 1.0),
      std::domain_error);
  CHECK_THROWS_AS(
      clip_projection(std::numeric_limits<double>::quiet_NaN(), 1.0),
      std::domain_error);
}

TEST_CASE("clipping is idempotent") {
  CounterRng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const double p = 300.0 * (rng.next_unit() - 0.5);
    const double gamma = 1e-3 + 50.0 * rng.next_unit();
    const double once = clip_projection(p, gamma).value;
    const double twice = clip_projection(once, gamma).value;
    REQUIRE(once == twice);
    REQUIRE(std::abs(once) <= gamma);
  }
}

TEST_CASE("the rank-one update matches hand examples") {
  ModelVector w(2), z(2);
  w << 1, 2;
  z << 1, -1;
  const ModelVector next = apply_update(w, 0.1, 2.0, z);
  CHECK(next[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(next[1] == doctest::Approx(2.2).epsilon(1e-15));

  CHECK(apply_update(w, 0.1, 0.0, z) == w);

  ModelVector w0(1), z0(1);
  w0 << 0;
  z0 << 1;
  CHECK(apply_update(w0, 1.0, 1.0, z0)[0] == -1.0);
}
