#include "sgmcmc/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgmcmc {

namespace {

void require_support(double gamma) {
  if (!(gamma > 0.0)) throw std::domain_error("gamma must be positive");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

}  // namespace

NormalGammaParams gaussian_posterior_params(const Eigen::VectorXd& data) {
  const double n = static_cast<double>(data.size());
  NormalGammaParams p;
  p.kappa_n = 1.0 + n;
  p.alpha_n = 1.0 + n / 2.0;
  if (data.size() == 0) return p;
  const double mean = data.mean();
  const double ss = (data.array() - mean).square().sum();
  p.mu_n = n * mean / (n + 1.0);
  p.beta_n = 1.0 + ss / 2.0 + n * mean * mean / (2.0 * (1.0 + n));
  return p;
}

double gaussian_marginal_density(const NormalGammaParams& p, GaussianMarginal which, double x) {
  if (which == GaussianMarginal::precision) {
    if (x <= 0.0) return 0.0;
    return std::exp(p.alpha_n * std::log(p.beta_n) - std::lgamma(p.alpha_n) +
                    (p.alpha_n - 1.0) * std::log(x) - p.beta_n * x);
  }
  // Student-t compound of the conditional Gaussian over the Gamma precision.
  const double nu = 2.0 * p.alpha_n;
  const double scale = std::sqrt(p.beta_n / (p.alpha_n * p.kappa_n));
  const double z = (x - p.mu_n) / scale;
  const double lognorm = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) -
                         0.5 * std::log(nu * std::numbers::pi) - std::log(scale);
  return std::exp(lognorm - (nu + 1.0) / 2.0 * std::log1p(z * z / nu));
}

double gaussian_marginal_mean(const NormalGammaParams& p, GaussianMarginal which) {
  if (which == GaussianMarginal::precision) return p.alpha_n / p.beta_n;
  return p.mu_n;
}

double gaussian_marginal_sd(const NormalGammaParams& p, GaussianMarginal which) {
  if (which == GaussianMarginal::precision) return std::sqrt(p.alpha_n) / p.beta_n;
  const double nu = 2.0 * p.alpha_n;
  if (nu <= 2.0) throw std::domain_error("mean marginal sd undefined for alpha_n <= 1");
  const double scale2 = p.beta_n / (p.alpha_n * p.kappa_n);
  return std::sqrt(scale2 * nu / (nu - 2.0));
}

GaussianMeanPrecisionModel::GaussianMeanPrecisionModel(Eigen::VectorXd data)
    : data_(std::move(data)) {}

double GaussianMeanPrecisionModel::potential(const Eigen::VectorXd& theta) const {
  const double mu = theta[0];
  const double gamma = theta[1];
  require_support(gamma);
  const double n = static_cast<double>(data_.size());
  const double ss = (data_.array() - mu).square().sum();
  // Likelihood plus N(mu | 0, gamma^-1) Gam(gamma | 1, 1) prior, constants dropped.
  return gamma * ss / 2.0 - n * std::log(gamma) / 2.0 + gamma * mu * mu / 2.0 -
         std::log(gamma) / 2.0 + gamma;
}

Eigen::VectorXd GaussianMeanPrecisionModel::full_gradient(const Eigen::VectorXd& theta) const {
  return minibatch_gradient(theta, Minibatch::full(static_cast<int>(data_.size())), nullptr);
}

Eigen::VectorXd GaussianMeanPrecisionModel::minibatch_gradient(
    const Eigen::VectorXd& theta, const Minibatch& batch,
    std::vector<Eigen::VectorXd>* per_sample) const {
  const double mu = theta[0];
  const double gamma = theta[1];
  require_support(gamma);
  if (batch.size() == 0) throw std::invalid_argument("empty minibatch");

  const double n_total = static_cast<double>(data_.size());
  const double scale = batch.scale();

  double sum_x = 0.0;
  double sum_sq = 0.0;
  if (per_sample) {
    per_sample->clear();
    per_sample->reserve(batch.indices.size());
  }
  for (int idx : batch.indices) {
    const double x = data_[idx];
    sum_x += x;
    const double dev2 = (x - mu) * (x - mu);
    sum_sq += dev2;
    if (per_sample) {
      Eigen::VectorXd g(2);
      g[0] = gamma * (x - mu);
      g[1] = 1.0 / (2.0 * gamma) - dev2 / 2.0;
      per_sample->push_back(std::move(g));
    }
  }

  Eigen::VectorXd grad(2);
  grad[0] = (n_total + 1.0) * mu * gamma - gamma * scale * sum_x;
  grad[1] = 1.0 - (n_total + 1.0) / (2.0 * gamma) + mu * mu / 2.0 + scale * sum_sq / 2.0;
  return grad;
}

LogisticRegressionModel::LogisticRegressionModel(Dataset data) : data_(std::move(data)) {
  if (!data_.has_labels()) throw std::invalid_argument("logistic regression needs labeled data");
  for (Eigen::Index i = 0; i < data_.size(); ++i) {
    const double y = data_.labels[i];
    if (y != 1.0 && y != -1.0)
      throw std::invalid_argument("logistic regression labels must be exactly +-1");
  }
}

double LogisticRegressionModel::potential(const Eigen::VectorXd& w) const {
  const Eigen::VectorXd margins = data_.labels.cwiseProduct(data_.features * w);
  double u = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) u -= log_sigmoid(margins[i]);
  return u + 0.5 * w.squaredNorm();
}

Eigen::VectorXd LogisticRegressionModel::full_gradient(const Eigen::VectorXd& w) const {
  return minibatch_gradient(w, Minibatch::full(static_cast<int>(data_.size())), nullptr);
}

Eigen::VectorXd LogisticRegressionModel::minibatch_gradient(
    const Eigen::VectorXd& w, const Minibatch& batch,
    std::vector<Eigen::VectorXd>* per_sample) const {
  if (batch.size() == 0) throw std::invalid_argument("empty minibatch");
  const double scale = batch.scale();

  Eigen::VectorXd loglik_sum = Eigen::VectorXd::Zero(w.size());
  if (per_sample) {
    per_sample->clear();
    per_sample->reserve(batch.indices.size());
  }
  for (int idx : batch.indices) {
    const double y = data_.labels[idx];
    const auto x = data_.features.row(idx).transpose();
    const double weight = y * sigmoid(-y * x.dot(w));
    if (per_sample) per_sample->push_back(weight * x);
    loglik_sum.noalias() += weight * x;
  }
  return -scale * loglik_sum + w;
}

double logistic_test_loglik(const Eigen::VectorXd& w, const Dataset& testset) {
  if (testset.size() == 0) throw std::invalid_argument("empty test set");
  if (!testset.has_labels()) throw std::invalid_argument("test set has no labels");
  const Eigen::VectorXd margins = testset.labels.cwiseProduct(testset.features * w);
  double total = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) total += log_sigmoid(margins[i]);
  return total / static_cast<double>(testset.size());
}

}  // namespace sgmcmc
