#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace sgmcmc {

enum class CovarianceMode { none, diagonal, full };

// Empirical covariance of a set of per-sample gradients with the n-1
// denominator. Requires n >= 2.
Eigen::MatrixXd empirical_covariance(const std::vector<Eigen::VectorXd>& grads);
Eigen::VectorXd empirical_covariance_diag(const std::vector<Eigen::VectorXd>& grads);

// Running moving-average estimate of the per-sample gradient covariance.
// With the default schedule kappa_t = 1/t the estimate after t updates is the
// arithmetic mean of the observed per-step covariances.
class GradientCovarianceEstimator {
 public:
  // kappa(t) must be defined for t >= 1; empty means 1/t.
  using KappaSchedule = std::function<double(long)>;

  GradientCovarianceEstimator(CovarianceMode mode, Eigen::Index dim,
                              KappaSchedule kappa = {});

  CovarianceMode mode() const { return mode_; }
  Eigen::Index dim() const { return dim_; }
  long step_count() const { return steps_; }

  // Computes the empirical covariance of the given per-sample gradients and
  // folds it into the running estimate.
  void observe(const std::vector<Eigen::VectorXd>& per_sample_grads);

  void update(const Eigen::MatrixXd& cov);        // full mode
  void update_diag(const Eigen::VectorXd& var);   // diagonal mode

  const Eigen::MatrixXd& estimate() const;
  const Eigen::VectorXd& estimate_diag() const;

  // Noisy-force covariance (N^2/n) * I_hat. Requires at least one update.
  Eigen::MatrixXd sigma_hat(long dataset_size, long batch_size) const;
  Eigen::VectorXd sigma_hat_diag(long dataset_size, long batch_size) const;

  // Diagonal entries pushed below zero by roundoff are clamped; the count is
  // surfaced in diagnostics.
  long negative_clamp_count() const { return clamped_; }

 private:
  void require_estimate() const;

  CovarianceMode mode_;
  Eigen::Index dim_;
  KappaSchedule kappa_;
  Eigen::MatrixXd full_;
  Eigen::VectorXd diag_;
  long steps_ = 0;
  long clamped_ = 0;
};

}  // namespace sgmcmc
