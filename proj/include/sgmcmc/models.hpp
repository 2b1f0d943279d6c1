#pragma once

#include <Eigen/Dense>

#include <vector>

#include "sgmcmc/dataset.hpp"

namespace sgmcmc {

// Posterior/prior parameters of the conjugate Normal-Gamma family over
// (mean, precision).
struct NormalGammaParams {
  double mu_n = 0.0;
  double kappa_n = 1.0;
  double alpha_n = 1.0;
  double beta_n = 1.0;
};

// Conjugate update for N(x | mu, gamma^-1) with prior
// N(mu | 0, gamma^-1) Gam(gamma | 1, 1). Empty data returns the prior.
NormalGammaParams gaussian_posterior_params(const Eigen::VectorXd& data);

enum class GaussianMarginal { mean, precision };

// Exact marginal posterior densities: Gamma for the precision, a Student-t
// compound for the mean. Precision density is 0 at points <= 0.
double gaussian_marginal_density(const NormalGammaParams& p, GaussianMarginal which, double x);
double gaussian_marginal_mean(const NormalGammaParams& p, GaussianMarginal which);
double gaussian_marginal_sd(const NormalGammaParams& p, GaussianMarginal which);

// A target for the samplers: potential U(theta) = -log posterior up to a
// constant, its full-data gradient, and minibatch stochastic gradients.
// Evaluation is a pure function of (theta, batch); instances are safe to
// share across chains.
class Model {
 public:
  virtual ~Model() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual Eigen::Index data_size() const = 0;

  // Whether theta lies in the support of the posterior. Kernels that commit
  // a position without evaluating a gradient there check this first.
  virtual bool in_support(const Eigen::VectorXd&) const { return true; }

  virtual double potential(const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::VectorXd full_gradient(const Eigen::VectorXd& theta) const = 0;

  // Noisy potential gradient (N/n)-scaled with the prior term included once.
  // When per_sample is non-null it receives the n per-record log-likelihood
  // gradients (prior excluded), as needed by the covariance estimator.
  virtual Eigen::VectorXd minibatch_gradient(const Eigen::VectorXd& theta, const Minibatch& batch,
                                             std::vector<Eigen::VectorXd>* per_sample) const = 0;
};

// Bayesian inference of the mean and precision of a 1-D Gaussian,
// theta = (mu, gamma). Gradients require gamma > 0 and throw
// std::domain_error otherwise; the chain driver decides the retry policy.
class GaussianMeanPrecisionModel : public Model {
 public:
  explicit GaussianMeanPrecisionModel(Eigen::VectorXd data);

  Eigen::Index dimension() const override { return 2; }
  Eigen::Index data_size() const override { return data_.size(); }

  bool in_support(const Eigen::VectorXd& theta) const override { return theta[1] > 0.0; }

  double potential(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd full_gradient(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd minibatch_gradient(const Eigen::VectorXd& theta, const Minibatch& batch,
                                     std::vector<Eigen::VectorXd>* per_sample) const override;

  NormalGammaParams posterior_params() const { return gaussian_posterior_params(data_); }
  const Eigen::VectorXd& data() const { return data_; }

 private:
  Eigen::VectorXd data_;
};

// Binary logistic regression with labels in {-1,+1} and prior
// exp(-w'w/2). theta = w.
class LogisticRegressionModel : public Model {
 public:
  explicit LogisticRegressionModel(Dataset data);

  Eigen::Index dimension() const override { return data_.dim(); }
  Eigen::Index data_size() const override { return data_.size(); }

  double potential(const Eigen::VectorXd& w) const override;
  Eigen::VectorXd full_gradient(const Eigen::VectorXd& w) const override;
  Eigen::VectorXd minibatch_gradient(const Eigen::VectorXd& w, const Minibatch& batch,
                                     std::vector<Eigen::VectorXd>* per_sample) const override;

  const Dataset& data() const { return data_; }

 private:
  Dataset data_;
};

// Mean over the test set of log(1/(1+exp(-y w'x))).
double logistic_test_loglik(const Eigen::VectorXd& w, const Dataset& testset);

}  // namespace sgmcmc
