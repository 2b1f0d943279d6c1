#include "sgmcmc/covariance.hpp"

#include <stdexcept>

namespace sgmcmc {

namespace {

Eigen::VectorXd mean_of(const std::vector<Eigen::VectorXd>& grads) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(grads.front().size());
  for (const auto& g : grads) m += g;
  return m / static_cast<double>(grads.size());
}

void require_at_least_two(const std::vector<Eigen::VectorXd>& grads) {
  if (grads.size() < 2)
    throw std::invalid_argument("empirical covariance needs at least 2 gradients (n-1 denominator)");
}

}  // namespace

Eigen::MatrixXd empirical_covariance(const std::vector<Eigen::VectorXd>& grads) {
  require_at_least_two(grads);
  const Eigen::VectorXd mean = mean_of(grads);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(mean.size(), mean.size());
  for (const auto& g : grads) {
    const Eigen::VectorXd c = g - mean;
    cov.noalias() += c * c.transpose();
  }
  return cov / static_cast<double>(grads.size() - 1);
}

Eigen::VectorXd empirical_covariance_diag(const std::vector<Eigen::VectorXd>& grads) {
  require_at_least_two(grads);
  const Eigen::VectorXd mean = mean_of(grads);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(mean.size());
  for (const auto& g : grads) var.array() += (g - mean).array().square();
  return var / static_cast<double>(grads.size() - 1);
}

GradientCovarianceEstimator::GradientCovarianceEstimator(CovarianceMode mode, Eigen::Index dim,
                                                         KappaSchedule kappa)
    : mode_(mode), dim_(dim), kappa_(std::move(kappa)) {
  if (mode_ == CovarianceMode::none)
    throw std::invalid_argument("covariance estimator needs mode diagonal or full");
  if (dim_ < 1) throw std::invalid_argument("covariance estimator dimension must be >= 1");
  full_ = Eigen::MatrixXd::Zero(mode_ == CovarianceMode::full ? dim_ : 0,
                                mode_ == CovarianceMode::full ? dim_ : 0);
  diag_ = Eigen::VectorXd::Zero(mode_ == CovarianceMode::diagonal ? dim_ : 0);
}

void GradientCovarianceEstimator::observe(const std::vector<Eigen::VectorXd>& per_sample_grads) {
  if (mode_ == CovarianceMode::full)
    update(empirical_covariance(per_sample_grads));
  else
    update_diag(empirical_covariance_diag(per_sample_grads));
}

void GradientCovarianceEstimator::update(const Eigen::MatrixXd& cov) {
  if (mode_ != CovarianceMode::full)
    throw std::invalid_argument("full-matrix update on a diagonal estimator");
  if (cov.rows() != dim_ || cov.cols() != dim_)
    throw std::invalid_argument("covariance update shape mismatch");
  ++steps_;
  const double k = kappa_ ? kappa_(steps_) : 1.0 / static_cast<double>(steps_);
  full_ = (1.0 - k) * full_ + k * cov;
  full_ = ((full_ + full_.transpose()) / 2.0).eval();
}

void GradientCovarianceEstimator::update_diag(const Eigen::VectorXd& var) {
  if (mode_ != CovarianceMode::diagonal)
    throw std::invalid_argument("diagonal update on a full-matrix estimator");
  if (var.size() != dim_) throw std::invalid_argument("covariance update shape mismatch");
  ++steps_;
  const double k = kappa_ ? kappa_(steps_) : 1.0 / static_cast<double>(steps_);
  diag_ = (1.0 - k) * diag_ + k * var;
  for (Eigen::Index i = 0; i < diag_.size(); ++i) {
    if (diag_[i] < 0.0) {
      diag_[i] = 0.0;
      ++clamped_;
    }
  }
}

const Eigen::MatrixXd& GradientCovarianceEstimator::estimate() const {
  if (mode_ != CovarianceMode::full)
    throw std::logic_error("full estimate requested from a diagonal estimator");
  return full_;
}

const Eigen::VectorXd& GradientCovarianceEstimator::estimate_diag() const {
  if (mode_ != CovarianceMode::diagonal)
    throw std::logic_error("diagonal estimate requested from a full-matrix estimator");
  return diag_;
}

void GradientCovarianceEstimator::require_estimate() const {
  if (steps_ == 0) throw std::logic_error("sigma_hat requested before any covariance update");
}

Eigen::MatrixXd GradientCovarianceEstimator::sigma_hat(long dataset_size, long batch_size) const {
  require_estimate();
  const double scale =
      static_cast<double>(dataset_size) * static_cast<double>(dataset_size) / static_cast<double>(batch_size);
  return scale * estimate();
}

Eigen::VectorXd GradientCovarianceEstimator::sigma_hat_diag(long dataset_size, long batch_size) const {
  require_estimate();
  const double scale =
      static_cast<double>(dataset_size) * static_cast<double>(dataset_size) / static_cast<double>(batch_size);
  return scale * estimate_diag();
}

}  // namespace sgmcmc
