#include "otazo/task.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "otazo/rng.hpp"

namespace otazo {

namespace {

// Context tags for key derivation so the distinct random objects inside a
// task never share a stream.
enum : std::uint64_t {
  kTagMinimizer = 101,
  kTagBasis = 102,
  kTagClientCurv = 103,
  kTagOffsets = 104,
  kTagInit = 105,
  kTagData = 106,
  kTagLabels = 107,
  kTagShuffle = 108,
  kTagRefRun = 109,
};

Eigen::MatrixXd random_gaussian(Eigen::Index rows, Eigen::Index cols,
                                std::uint64_t key) {
  CounterRng rng(key);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.next_normal();
  return m;
}

}  // namespace

double Task::global_loss(const ModelVector& w) const {
  const int K = num_clients();
  double sum = 0.0;
  for (int k = 0; k < K; ++k) sum += client_full_loss(k, w);
  return sum / static_cast<double>(K);
}

QuadraticTask::QuadraticTask(Eigen::Index dim, int clients,
                             double condition_number, std::uint64_t seed)
    : dim_(dim), clients_(clients), condition_number_(condition_number) {
  if (dim < 1) throw std::invalid_argument("quadratic_task: dim must be >= 1");
  if (clients < 1)
    throw std::invalid_argument("quadratic_task: clients must be >= 1");
  if (!(condition_number >= 1.0))
    throw std::invalid_argument("quadratic_task: condition number must be >= 1");

  w_star_ = CounterRng(derive_key(seed, kTagMinimizer)).normal_vector(dim);

  // Mean curvature with spectrum linearly spaced on [1, kappa] in a random
  // orthogonal basis.
  Eigen::VectorXd eigs(dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    eigs[i] = dim == 1 ? 1.0
                       : 1.0 + (condition_number - 1.0) * static_cast<double>(i) /
                                   static_cast<double>(dim - 1);
  const Eigen::MatrixXd basis =
      Eigen::HouseholderQR<Eigen::MatrixXd>(
          random_gaussian(dim, dim, derive_key(seed, kTagBasis)))
          .householderQ();
  q_mean_ = basis * eigs.asDiagonal() * basis.transpose();
  q_mean_ = 0.5 * (q_mean_ + q_mean_.transpose().eval());  // exact symmetry

  // Client curvatures Q_k = Q + D_k with sum_k D_k = 0 and spectral norm of
  // each D_k at most 0.3, keeping every Q_k positive definite and the mean
  // exactly Q.
  std::vector<Eigen::MatrixXd> devs;
  devs.reserve(static_cast<std::size_t>(clients));
  Eigen::MatrixXd mean_dev = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 0; k < clients; ++k) {
    Eigen::MatrixXd r = random_gaussian(
        dim, dim, derive_key(seed, kTagClientCurv, static_cast<std::uint64_t>(k)));
    Eigen::MatrixXd s = 0.5 * (r + r.transpose().eval());
    devs.push_back(s);
    mean_dev += s / static_cast<double>(clients);
  }
  double max_norm = 0.0;
  for (auto& s : devs) {
    s -= mean_dev;
    if (clients > 1) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
      max_norm = std::max(max_norm, es.eigenvalues().cwiseAbs().maxCoeff());
    }
  }
  const double scale = (clients > 1 && max_norm > 0.0) ? 0.3 / max_norm : 0.0;
  q_client_.reserve(static_cast<std::size_t>(clients));
  for (auto& s : devs) q_client_.push_back(q_mean_ + scale * s);

  offsets_ = CounterRng(derive_key(seed, kTagOffsets)).normal_vector(clients);
  offsets_.array() -= offsets_.mean();
  offsets_ *= 0.5;
}

double QuadraticTask::client_loss(int k, const ModelVector& w,
                                  std::span<const Eigen::Index>) const {
  if (k < 0 || k >= clients_)
    throw std::invalid_argument("quadratic_task: client out of range");
  const ModelVector e = w - w_star_;
  return 0.5 * e.dot(q_client_[static_cast<std::size_t>(k)] * e) + offsets_[k];
}

double QuadraticTask::global_loss(const ModelVector& w) const {
  const ModelVector e = w - w_star_;
  return 0.5 * e.dot(q_mean_ * e);
}

ModelVector QuadraticTask::global_gradient(const ModelVector& w) const {
  return q_mean_ * (w - w_star_);
}

ModelVector QuadraticTask::initial_point(std::uint64_t seed) const {
  ModelVector g = CounterRng(derive_key(seed, kTagInit)).normal_vector(dim_);
  return w_star_ + 3.0 * g / g.norm();
}

LogisticTask::LogisticTask(Eigen::Index dim, int clients, Eigen::Index samples,
                           std::uint64_t seed, double separation)
    : dim_(dim), clients_(clients) {
  if (dim < 1) throw std::invalid_argument("logistic_task: dim must be >= 1");
  if (clients < 1)
    throw std::invalid_argument("logistic_task: clients must be >= 1");
  if (samples < clients)
    throw std::invalid_argument("logistic_task: need at least one sample per client");
  if (!(separation >= 0.0))
    throw std::invalid_argument("logistic_task: separation must be >= 0");

  ModelVector axis = CounterRng(derive_key(seed, kTagBasis)).normal_vector(dim);
  axis /= axis.norm();

  CounterRng label_rng(derive_key(seed, kTagLabels));
  y_.resize(samples);
  for (Eigen::Index i = 0; i < samples; ++i)
    y_[i] = label_rng.next_u64() & 1 ? 1.0 : -1.0;

  x_ = random_gaussian(samples, dim, derive_key(seed, kTagData));
  for (Eigen::Index i = 0; i < samples; ++i)
    x_.row(i) += (y_[i] * separation) * axis.transpose();

  smoothness_ = x_.rowwise().squaredNorm().maxCoeff() / 4.0;

  // i.i.d. partition: shuffle, then contiguous near-equal shards.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(samples));
  for (Eigen::Index i = 0; i < samples; ++i)
    order[static_cast<std::size_t>(i)] = i;
  CounterRng shuffle_rng(derive_key(seed, kTagShuffle));
  for (Eigen::Index i = samples - 1; i > 0; --i)
    std::swap(order[static_cast<std::size_t>(i)],
              order[shuffle_rng.next_below(static_cast<std::uint64_t>(i + 1))]);
  shards_.resize(static_cast<std::size_t>(clients));
  for (Eigen::Index i = 0; i < samples; ++i)
    shards_[static_cast<std::size_t>(
                (i * clients) / samples)].push_back(order[static_cast<std::size_t>(i)]);

  // Reference run for F*: noiseless mean aggregation of full-shard SPSA
  // projections, step size safe for curvature along d-dimensional Gaussian
  // directions.
  const double eta = 0.8 / (smoothness_ * static_cast<double>(dim));
  const double mu = 1e-4;
  ModelVector w =
      0.05 * CounterRng(derive_key(seed, kTagRefRun, 0)).normal_vector(dim);
  f_star_ = global_loss(w);
  for (int t = 1; t <= 2500; ++t) {
    const ModelVector z = generate_perturbation(
        {derive_key(seed, kTagRefRun, 1), static_cast<std::uint64_t>(t)}, dim);
    double mean_p = 0.0;
    for (int k = 0; k < clients; ++k)
      mean_p += spsa_projection(
          [&](const ModelVector& v) { return client_full_loss(k, v); }, w, z,
          mu);
    mean_p /= static_cast<double>(clients);
    w = apply_update(w, eta, mean_p, z);
    f_star_ = std::min(f_star_, global_loss(w));
  }
}

Eigen::Index LogisticTask::client_samples(int k) const {
  if (k < 0 || k >= clients_)
    throw std::invalid_argument("logistic_task: client out of range");
  return static_cast<Eigen::Index>(shards_[static_cast<std::size_t>(k)].size());
}

double LogisticTask::sample_loss(Eigen::Index i, const ModelVector& w) const {
  const double z = -y_[i] * x_.row(i).dot(w);
  if (z > 30.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double LogisticTask::client_loss(int k, const ModelVector& w,
                                 std::span<const Eigen::Index> batch) const {
  if (k < 0 || k >= clients_)
    throw std::invalid_argument("logistic_task: client out of range");
  const auto& shard = shards_[static_cast<std::size_t>(k)];
  double sum = 0.0;
  if (batch.empty()) {
    for (Eigen::Index i : shard) sum += sample_loss(i, w);
    return sum / static_cast<double>(shard.size());
  }
  for (Eigen::Index b : batch) {
    if (b < 0 || b >= static_cast<Eigen::Index>(shard.size()))
      throw std::invalid_argument("logistic_task: batch index out of range");
    sum += sample_loss(shard[static_cast<std::size_t>(b)], w);
  }
  return sum / static_cast<double>(batch.size());
}

ModelVector LogisticTask::initial_point(std::uint64_t seed) const {
  return 0.05 * CounterRng(derive_key(seed, kTagInit)).normal_vector(dim_);
}

std::unique_ptr<QuadraticTask> quadratic_task(Eigen::Index dim, int clients,
                                              double condition_number,
                                              std::uint64_t seed) {
  return std::make_unique<QuadraticTask>(dim, clients, condition_number, seed);
}

std::unique_ptr<LogisticTask> logistic_task(Eigen::Index dim, int clients,
                                            Eigen::Index samples,
                                            std::uint64_t seed,
                                            double separation) {
  return std::make_unique<LogisticTask>(dim, clients, samples, seed,
                                        separation);
}

}  // namespace otazo
