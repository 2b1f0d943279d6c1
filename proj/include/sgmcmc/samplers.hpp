#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sgmcmc/covariance.hpp"
#include "sgmcmc/dataset.hpp"
#include "sgmcmc/models.hpp"

namespace sgmcmc {

enum class Method { sgld, sghmc, sgnht, ccadl, hmc };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Position, momentum, and the Nose-Hoover feedback variable of one chain.
struct ThermostatState {
  Eigen::VectorXd theta;
  Eigen::VectorXd p;
  double xi = 0.0;
};

struct SamplerConfig {
  Method method = Method::ccadl;
  double h = 0.01;               // stepsize
  double friction = 1.0;         // A
  double beta = 1.0;             // inverse temperature
  double thermal_mass = 0.0;     // mu; <= 0 resolves to N_d
  Eigen::VectorXd mass_diag;     // empty resolves to ones
  CovarianceMode cov_mode = CovarianceMode::full;

  // Returns a copy with mass_diag and thermal_mass materialized for the
  // given dimension. Throws std::invalid_argument on bad values.
  SamplerConfig resolved(Eigen::Index dim) const;
  void validate(Eigen::Index dim) const;
};

// Per-step force evaluation: the noisy potential gradient plus whatever the
// covariance controller can know about its noise.
struct ForceEval {
  Eigen::VectorXd grad;                     // noisy potential gradient
  std::vector<Eigen::VectorXd> per_sample;  // minibatch log-lik gradients (may stay empty)
  // Closed-form noise covariance, set by the injected-noise harness; when
  // present the kernels use it directly instead of the running estimate.
  std::optional<Eigen::VectorXd> known_sigma_diag;
  std::optional<Eigen::MatrixXd> known_sigma_full;
};

// What a step kernel needs from the target problem. ModelForce adapts a
// Model (subsampling noise); InjectedNoiseForce synthesizes Gaussian
// gradient noise with a covariance given in closed form.
class ForceProvider {
 public:
  virtual ~ForceProvider() = default;
  virtual Eigen::Index dimension() const = 0;
  virtual bool needs_minibatch() const = 0;
  virtual Eigen::Index data_size() const = 0;  // 0 when batchless
  virtual bool in_support(const Eigen::VectorXd&) const { return true; }
  virtual ForceEval evaluate(const Eigen::VectorXd& theta, const Minibatch& batch,
                             std::mt19937_64& rng, bool want_per_sample) const = 0;
};

class ModelForce : public ForceProvider {
 public:
  explicit ModelForce(const Model& model) : model_(&model) {}
  Eigen::Index dimension() const override { return model_->dimension(); }
  bool needs_minibatch() const override { return true; }
  Eigen::Index data_size() const override { return model_->data_size(); }
  bool in_support(const Eigen::VectorXd& theta) const override { return model_->in_support(theta); }
  ForceEval evaluate(const Eigen::VectorXd& theta, const Minibatch& batch, std::mt19937_64& rng,
                     bool want_per_sample) const override;

 private:
  const Model* model_;
};

// Test harness: clean gradient plus N(0, Sigma(theta)) noise with Sigma
// known in closed form (diagonal). Mass enters the noise as M^(1/2).
class InjectedNoiseForce : public ForceProvider {
 public:
  using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using SigmaDiagFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  InjectedNoiseForce(Eigen::Index dim, GradFn clean_grad, SigmaDiagFn sigma_diag = {},
                     Eigen::VectorXd mass_diag = {});

  Eigen::Index dimension() const override { return dim_; }
  bool needs_minibatch() const override { return false; }
  Eigen::Index data_size() const override { return 0; }
  ForceEval evaluate(const Eigen::VectorXd& theta, const Minibatch& batch, std::mt19937_64& rng,
                     bool want_per_sample) const override;

 private:
  Eigen::Index dim_;
  GradFn clean_grad_;
  SigmaDiagFn sigma_diag_;
  Eigen::VectorXd sqrt_mass_;
};

// Bookkeeping shared by the step kernels.
struct StepCounters {
  long friction_deficit = 0;  // SGHMC noise-correction clamps
};

// One covariance-controlled thermostat update:
//   theta <- theta + M^-1 p h
//   I_hat <- moving-average update from the minibatch per-sample gradients
//   p     <- p - grad_tilde(theta) h - (h/2) beta Sigma_hat p h - xi p h
//            + sqrt(2 A h / beta) M^(1/2) N(0, I)
//   xi    <- xi + mu^-1 (p' M^-1 p - N_d / beta) h
// with Sigma_hat = (N^2/n) I_hat, or the closed-form covariance when the
// force provider supplies one. cfg must be resolved().
void ccadl_step(ThermostatState& state, const ForceProvider& force, const Minibatch& batch,
                GradientCovarianceEstimator* estimator, const SamplerConfig& cfg,
                std::mt19937_64& rng);

// CCAdL with the covariance damping removed (constant-noise thermostat).
void sgnht_step(ThermostatState& state, const ForceProvider& force, const Minibatch& batch,
                const SamplerConfig& cfg, std::mt19937_64& rng);

// Second-order Langevin with the estimated noise subtracted from the
// artificial diffusion:
//   p     <- p - grad_tilde(theta) h - A p h
//            + sqrt(2 beta^-1 (A I - h Sigma_hat / 2) h) M^(1/2) N(0, I)
//   theta <- theta + M^-1 p h
// Negative entries/eigenvalues of (A I - h Sigma_hat / 2) are clamped to
// zero and counted as friction deficit.
void sghmc_step(ThermostatState& state, const ForceProvider& force, const Minibatch& batch,
                GradientCovarianceEstimator* estimator, const SamplerConfig& cfg,
                StepCounters* counters, std::mt19937_64& rng);

// Overdamped update theta <- theta - grad_tilde(theta) h + sqrt(2 h / beta) N(0, I).
void sgld_step(ThermostatState& state, const ForceProvider& force, const Minibatch& batch,
               const SamplerConfig& cfg, std::mt19937_64& rng);

// Componentwise standard deviation of the SGHMC artificial noise for a
// diagonal Sigma_hat, plus the number of clamped entries. Exposed for tests.
std::pair<Eigen::VectorXd, long> sghmc_noise_scale_diag(double friction, double h, double beta,
                                                        const Eigen::VectorXd& sigma_diag);

struct ChainLog {
  Method method = Method::ccadl;
  std::uint64_t seed = 0;
  SamplerConfig config;
  long steps = 0;
  long burnin = 0;
  long thin = 1;
  int batch_size = 0;

  // Thinned post-burn-in records; row i of samples belongs to sample_steps[i]
  // and the series share that indexing.
  std::vector<long> sample_steps;
  Eigen::MatrixXd samples;  // records x dim
  std::vector<double> xi_series;
  std::vector<double> temp_series;

  // Accumulated over every post-burn-in step regardless of thinning.
  double mean_xi = 0.0;
  double mean_temp = 0.0;
  Eigen::VectorXd posterior_mean;

  // Metric checkpoints (step, value); the metric sees the running posterior
  // mean from step 1 so it tracks burn-in behaviour.
  std::vector<std::pair<long, double>> metric_series;

  long friction_deficit = 0;
  long support_rejects = 0;
  long covariance_clamps = 0;

  double acceptance_rate = -1.0;  // HMC only
  bool tuning_warning = false;    // HMC acceptance collapsed below 1% in a window

  bool aborted = false;
  std::string abort_reason;
};

struct RunOptions {
  long steps = 0;
  long burnin = 0;
  long thin = 1;
  int batch_size = 0;  // ignored by batchless force providers
  bool with_replacement = false;
  Eigen::VectorXd theta0;        // empty -> zeros
  bool randomize_theta0 = false; // adds N(0, I) from the init stream
  std::function<double(const Eigen::VectorXd& running_mean)> metric;
  long metric_every = 0;
  int max_support_retries = 100;
};

// Drives a single chain: fresh minibatch per step, the method's kernel,
// thinned recording. xi_0 = A, p_0 ~ N(0, beta^-1 M). All randomness comes
// from named sub-streams of the seed ("init", "minibatch", "noise"), so two
// runs with equal (seed, config, options) are bit-identical.
ChainLog run_chain(const ForceProvider& force, const SamplerConfig& cfg, const RunOptions& opt,
                   std::uint64_t seed);
ChainLog run_chain(const Model& model, const SamplerConfig& cfg, const RunOptions& opt,
                   std::uint64_t seed);

struct HmcOptions {
  double eps = 0.1;
  int leapfrog_steps = 10;
  long samples = 1000;
  long burnin = 0;
  long thin = 1;
  Eigen::VectorXd theta0;  // empty -> zeros
};

// Full-gradient leapfrog HMC with Metropolis correction; the reference
// sampler the stochastic-gradient methods are compared against. Proposals
// leaving the support (domain errors) are rejected.
ChainLog hmc_reference(const Model& model, const SamplerConfig& cfg, const HmcOptions& opt,
                       std::uint64_t seed);

// Mean absolute energy error of fresh leapfrog trajectories, used to verify
// the integrator's order of accuracy.
double hmc_mean_abs_energy_error(const Model& model, const SamplerConfig& cfg, double eps,
                                 int leapfrog_steps, const Eigen::VectorXd& theta0, int trials,
                                 std::uint64_t seed);

}  // namespace sgmcmc
