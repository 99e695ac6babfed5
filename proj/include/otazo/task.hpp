// Desk-scale federated tasks with known or pre-computed optima. Each client
// owns a data shard; losses are evaluated on caller-supplied batches of
// local sample indices (empty batch = the full shard).
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "otazo/zo.hpp"

namespace otazo {

class Task {
 public:
  virtual ~Task() = default;

  virtual Eigen::Index dim() const = 0;
  virtual int num_clients() const = 0;
  virtual Eigen::Index client_samples(int k) const = 0;

  // Mean loss of client k at w over the given local sample indices; an empty
  // span means the client's full shard.
  virtual double client_loss(int k, const ModelVector& w,
                             std::span<const Eigen::Index> batch) const = 0;

  double client_full_loss(int k, const ModelVector& w) const {
    return client_loss(k, w, {});
  }

  // F(w) = (1/K) sum_k F_k(w) on full data.
  virtual double global_loss(const ModelVector& w) const;

  virtual double optimum() const = 0;       // F*
  virtual double smoothness() const = 0;    // L; 0 when unknown
  virtual double pl_constant() const = 0;   // M; 0 when unknown
  virtual ModelVector initial_point(std::uint64_t seed) const = 0;
};

// F_k(w) = 1/2 (w-w*)' Q_k (w-w*) + c_k with sum_k c_k = 0 and
// (1/K) sum_k Q_k = Q having eigenvalues in [1, condition_number]. Satisfies
// smoothness and the PL property exactly (L = condition_number, M = 1,
// F* = 0 at w*).
class QuadraticTask : public Task {
 public:
  QuadraticTask(Eigen::Index dim, int clients, double condition_number,
                std::uint64_t seed);

  Eigen::Index dim() const override { return dim_; }
  int num_clients() const override { return clients_; }
  Eigen::Index client_samples(int) const override { return 1; }
  double client_loss(int k, const ModelVector& w,
                     std::span<const Eigen::Index> batch) const override;
  double global_loss(const ModelVector& w) const override;
  double optimum() const override { return 0.0; }
  double smoothness() const override { return condition_number_; }
  double pl_constant() const override { return 1.0; }
  ModelVector initial_point(std::uint64_t seed) const override;

  ModelVector global_gradient(const ModelVector& w) const;
  const ModelVector& minimizer() const { return w_star_; }
  const Eigen::MatrixXd& mean_curvature() const { return q_mean_; }

 private:
  Eigen::Index dim_;
  int clients_;
  double condition_number_;
  ModelVector w_star_;
  Eigen::MatrixXd q_mean_;
  std::vector<Eigen::MatrixXd> q_client_;
  Eigen::VectorXd offsets_;
};

// Binary logistic regression on synthetic two-cluster Gaussian data,
// partitioned i.i.d. into equal shards. F* is the best global loss seen by a
// long noiseless reference run, computed once at construction; smoothness is
// the data-norm bound max_i |x_i|^2 / 4.
class LogisticTask : public Task {
 public:
  LogisticTask(Eigen::Index dim, int clients, Eigen::Index samples,
               std::uint64_t seed, double separation = 1.0);

  Eigen::Index dim() const override { return dim_; }
  int num_clients() const override { return clients_; }
  Eigen::Index client_samples(int k) const override;
  double client_loss(int k, const ModelVector& w,
                     std::span<const Eigen::Index> batch) const override;
  double optimum() const override { return f_star_; }
  double smoothness() const override { return smoothness_; }
  double pl_constant() const override { return 0.0; }
  ModelVector initial_point(std::uint64_t seed) const override;

 private:
  double sample_loss(Eigen::Index i, const ModelVector& w) const;

  Eigen::Index dim_;
  int clients_;
  Eigen::MatrixXd x_;       // samples x dim
  Eigen::VectorXd y_;       // labels in {-1, +1}
  std::vector<std::vector<Eigen::Index>> shards_;
  double smoothness_ = 0.0;
  double f_star_ = 0.0;
};

std::unique_ptr<QuadraticTask> quadratic_task(Eigen::Index dim, int clients,
                                              double condition_number,
                                              std::uint64_t seed);
std::unique_ptr<LogisticTask> logistic_task(Eigen::Index dim, int clients,
                                            Eigen::Index samples,
                                            std::uint64_t seed,
                                            double separation = 1.0);

}  // namespace otazo
