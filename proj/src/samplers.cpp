#include "sgmcmc/samplers.hpp"

#include <cmath>
#include <stdexcept>

#include "sgmcmc/diagnostics.hpp"
#include "sgmcmc/rng.hpp"

namespace sgmcmc {

std::string method_name(Method m) {
  switch (m) {
    case Method::sgld: return "sgld";
    case Method::sghmc: return "sghmc";
    case Method::sgnht: return "sgnht";
    case Method::ccadl: return "ccadl";
    case Method::hmc: return "hmc";
  }
  throw std::logic_error("unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "sgld") return Method::sgld;
  if (name == "sghmc") return Method::sghmc;
  if (name == "sgnht") return Method::sgnht;
  if (name == "ccadl") return Method::ccadl;
  if (name == "hmc") return Method::hmc;
  throw std::invalid_argument("unknown method '" + name + "'");
}

void SamplerConfig::validate(Eigen::Index dim) const {
  if (h <= 0.0) throw std::invalid_argument("stepsize h must be positive");
  if (friction < 0.0) throw std::invalid_argument("friction A must be >= 0");
  if (beta <= 0.0) throw std::invalid_argument("beta must be positive");
  if (mass_diag.size() != 0) {
    if (mass_diag.size() != dim) throw std::invalid_argument("mass vector dimension mismatch");
    if ((mass_diag.array() <= 0.0).any()) throw std::invalid_argument("mass entries must be positive");
  }
}

SamplerConfig SamplerConfig::resolved(Eigen::Index dim) const {
  validate(dim);
  SamplerConfig r = *this;
  if (r.mass_diag.size() == 0) r.mass_diag = Eigen::VectorXd::Ones(dim);
  if (r.thermal_mass <= 0.0) r.thermal_mass = static_cast<double>(dim);
  return r;
}

ForceEval ModelForce::evaluate(const Eigen::VectorXd& theta, const Minibatch& batch,
                               std::mt19937_64& /*rng*/, bool want_per_sample) const {
  ForceEval eval;
  std::vector<Eigen::VectorXd> per_sample;
  eval.grad = model_->minibatch_gradient(theta, batch, want_per_sample ? &per_sample : nullptr);
  eval.per_sample = std::move(per_sample);
  return eval;
}

InjectedNoiseForce::InjectedNoiseForce(Eigen::Index dim, GradFn clean_grad, SigmaDiagFn sigma_diag,
                                       Eigen::VectorXd mass_diag)
    : dim_(dim), clean_grad_(std::move(clean_grad)), sigma_diag_(std::move(sigma_diag)) {
  sqrt_mass_ = mass_diag.size() == 0 ? Eigen::VectorXd::Ones(dim_).eval()
                                     : mass_diag.cwiseSqrt().eval();
}

ForceEval InjectedNoiseForce::evaluate(const Eigen::VectorXd& theta, const Minibatch& /*batch*/,
                                       std::mt19937_64& rng, bool /*want_per_sample*/) const {
  ForceEval eval;
  eval.grad = clean_grad_(theta);
  if (sigma_diag_) {
    Eigen::VectorXd sigma = sigma_diag_(theta);
    eval.grad += sigma.cwiseSqrt().cwiseProduct(sqrt_mass_).cwiseProduct(gaussian_vector(rng, dim_));
    eval.known_sigma_diag = std::move(sigma);
  }
  return eval;
}

namespace {

struct SigmaHat {
  std::optional<Eigen::VectorXd> diag;
  std::optional<Eigen::MatrixXd> full;

  bool empty() const { return !diag && !full; }
  Eigen::VectorXd apply(const Eigen::VectorXd& p) const {
    if (diag) return diag->cwiseProduct(p);
    return (*full) * p;
  }
};

// Damping covariance for this step. Closed-form wins over estimation; the
// estimator sees one moving-average update per call.
SigmaHat resolve_sigma_hat(const ForceEval& eval, const Minibatch& batch,
                           GradientCovarianceEstimator* estimator, const SamplerConfig& cfg,
                           Eigen::Index data_size) {
  SigmaHat sig;
  if (cfg.cov_mode == CovarianceMode::none) return sig;
  if (eval.known_sigma_full) {
    sig.full = *eval.known_sigma_full;
    return sig;
  }
  if (eval.known_sigma_diag) {
    sig.diag = *eval.known_sigma_diag;
    return sig;
  }
  if (!estimator)
    throw std::invalid_argument("covariance control requires an estimator or closed-form sigma");
  if (estimator->mode() != cfg.cov_mode)
    throw std::invalid_argument("estimator mode does not match config covariance mode");
  estimator->observe(eval.per_sample);
  if (estimator->mode() == CovarianceMode::full)
    sig.full = estimator->sigma_hat(data_size, batch.size());
  else
    sig.diag = estimator->sigma_hat_diag(data_size, batch.size());
  return sig;
}

// Shared thermostat step; CCAdL and SGNHT differ only in whether the
// covariance damping is applied, so both run through this one code path
// (the reduction identity then holds exactly).
void thermostat_step(ThermostatState& s, const ForceProvider& force, const Minibatch& batch,
                     GradientCovarianceEstimator* estimator, const SamplerConfig& cfg,
                     bool covariance_controlled, std::mt19937_64& rng) {
  const Eigen::Index dim = s.theta.size();
  const Eigen::VectorXd& mass = cfg.mass_diag;

  s.theta.array() += cfg.h * (s.p.array() / mass.array());
  if (!force.in_support(s.theta)) throw std::domain_error("proposal left the support");

  const bool want_per_sample = covariance_controlled && estimator != nullptr;
  const ForceEval eval = force.evaluate(s.theta, batch, rng, want_per_sample);

  Eigen::VectorXd damping;
  bool have_damping = false;
  if (covariance_controlled) {
    const SigmaHat sig = resolve_sigma_hat(eval, batch, estimator, cfg, force.data_size());
    if (!sig.empty()) {
      damping = (cfg.h * cfg.h / 2.0) * cfg.beta * sig.apply(s.p);
      have_damping = true;
    }
  }

  const double noise_coef = std::sqrt(2.0 * cfg.friction * cfg.h / cfg.beta);
  Eigen::VectorXd p_new = s.p - cfg.h * eval.grad - (cfg.h * s.xi) * s.p +
                          noise_coef * mass.cwiseSqrt().cwiseProduct(gaussian_vector(rng, dim));
  if (have_damping) p_new -= damping;

  const double twice_kinetic = (p_new.array().square() / mass.array()).sum();
  s.xi += (twice_kinetic - static_cast<double>(dim) / cfg.beta) * cfg.h / cfg.thermal_mass;
  s.p = std::move(p_new);
}

}  // namespace

void ccadl_step(ThermostatState& state, const ForceProvider& force, const Minibatch& batch,
                GradientCovarianceEstimator* estimator, const SamplerConfig& cfg,
                std::mt19937_64& rng) {
  thermostat_step(state, force, batch, estimator, cfg, cfg.cov_mode != CovarianceMode::none, rng);
}

void sgnht_step(ThermostatState& state, const ForceProvider& force, const Minibatch& batch,
                const SamplerConfig& cfg, std::mt19937_64& rng) {
  thermostat_step(state, force, batch, nullptr, cfg, false, rng);
}

std::pair<Eigen::VectorXd, long> sghmc_noise_scale_diag(double friction, double h, double beta,
                                                        const Eigen::VectorXd& sigma_diag) {
  Eigen::VectorXd scale(sigma_diag.size());
  long clamped = 0;
  for (Eigen::Index i = 0; i < sigma_diag.size(); ++i) {
    double corrected = friction - h * sigma_diag[i] / 2.0;
    if (corrected < 0.0) {
      corrected = 0.0;
      ++clamped;
    }
    scale[i] = std::sqrt(2.0 * corrected * h / beta);
  }
  return {std::move(scale), clamped};
}

void sghmc_step(ThermostatState& state, const ForceProvider& force, const Minibatch& batch,
                GradientCovarianceEstimator* estimator, const SamplerConfig& cfg,
                StepCounters* counters, std::mt19937_64& rng) {
  const Eigen::Index dim = state.theta.size();
  const Eigen::VectorXd& mass = cfg.mass_diag;

  const bool want_per_sample = cfg.cov_mode != CovarianceMode::none && estimator != nullptr;
  const ForceEval eval = force.evaluate(state.theta, batch, rng, want_per_sample);
  const SigmaHat sig = resolve_sigma_hat(eval, batch, estimator, cfg, force.data_size());

  const Eigen::VectorXd raw = mass.cwiseSqrt().cwiseProduct(gaussian_vector(rng, dim));
  Eigen::VectorXd kick(dim);
  long clamped = 0;
  if (sig.full) {
    // Eigendecompose (A I - h Sigma/2); negative directions get zero noise.
    Eigen::MatrixXd corrected = -0.5 * cfg.h * (*sig.full);
    corrected.diagonal().array() += cfg.friction;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corrected);
    Eigen::VectorXd lambda = es.eigenvalues();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (lambda[i] < 0.0) {
        lambda[i] = 0.0;
        ++clamped;
      }
      lambda[i] = std::sqrt(2.0 * lambda[i] * cfg.h / cfg.beta);
    }
    kick = es.eigenvectors() *
           lambda.cwiseProduct(es.eigenvectors().transpose() * raw);
  } else {
    const Eigen::VectorXd sigma_diag =
        sig.diag ? *sig.diag : Eigen::VectorXd::Zero(dim).eval();
    auto [scale, n_clamped] = sghmc_noise_scale_diag(cfg.friction, cfg.h, cfg.beta, sigma_diag);
    clamped = n_clamped;
    kick = scale.cwiseProduct(raw);
  }
  if (counters) counters->friction_deficit += clamped;

  const Eigen::VectorXd p_new =
      state.p - cfg.h * eval.grad - (cfg.h * cfg.friction) * state.p + kick;
  const Eigen::VectorXd theta_new =
      state.theta + cfg.h * (p_new.array() / mass.array()).matrix();
  // The gradient was taken at the old position, so the proposal must be
  // vetted before it is committed.
  if (!force.in_support(theta_new)) throw std::domain_error("proposal left the support");
  state.p = p_new;
  state.theta = theta_new;
}

void sgld_step(ThermostatState& state, const ForceProvider& force, const Minibatch& batch,
               const SamplerConfig& cfg, std::mt19937_64& rng) {
  const ForceEval eval = force.evaluate(state.theta, batch, rng, false);
  const Eigen::VectorXd theta_new =
      state.theta - cfg.h * eval.grad +
      std::sqrt(2.0 * cfg.h / cfg.beta) * gaussian_vector(rng, state.theta.size());
  if (!force.in_support(theta_new)) throw std::domain_error("proposal left the support");
  state.theta = theta_new;
}

namespace {

bool uses_momentum(Method m) { return m != Method::sgld; }

bool uses_estimator(Method m) { return m == Method::ccadl || m == Method::sghmc; }

}  // namespace

ChainLog run_chain(const ForceProvider& force, const SamplerConfig& cfg, const RunOptions& opt,
                   std::uint64_t seed) {
  if (opt.steps <= 0) throw std::invalid_argument("run_chain: steps must be positive");
  if (opt.burnin < 0 || opt.burnin >= opt.steps)
    throw std::invalid_argument("run_chain: need steps > burnin >= 0");
  if (opt.thin < 1) throw std::invalid_argument("run_chain: thin must be >= 1");

  const Eigen::Index dim = force.dimension();
  const SamplerConfig rc = cfg.resolved(dim);

  const bool batched = force.needs_minibatch();
  const int data_size = static_cast<int>(force.data_size());
  int batch_size = opt.batch_size;
  if (batched) {
    if (batch_size <= 0) batch_size = data_size;
    if (!opt.with_replacement && batch_size > data_size)
      throw std::invalid_argument("run_chain: minibatch larger than dataset");
  }

  auto init_rng = make_stream(seed, "init");
  auto batch_rng = make_stream(seed, "minibatch");
  auto noise_rng = make_stream(seed, "noise");

  ThermostatState state;
  state.theta = opt.theta0.size() ? opt.theta0 : Eigen::VectorXd::Zero(dim);
  if (state.theta.size() != dim) throw std::invalid_argument("run_chain: theta0 dimension mismatch");
  if (opt.randomize_theta0) state.theta += gaussian_vector(init_rng, dim);
  state.p = std::sqrt(1.0 / rc.beta) * rc.mass_diag.cwiseSqrt().cwiseProduct(gaussian_vector(init_rng, dim));
  state.xi = rc.friction;

  std::optional<GradientCovarianceEstimator> estimator;
  if (uses_estimator(rc.method) && rc.cov_mode != CovarianceMode::none && batched)
    estimator.emplace(rc.cov_mode, dim);

  ChainLog log;
  log.method = rc.method;
  log.seed = seed;
  log.config = rc;
  log.steps = opt.steps;
  log.burnin = opt.burnin;
  log.thin = opt.thin;
  log.batch_size = batched ? batch_size : 0;
  log.posterior_mean = Eigen::VectorXd::Zero(dim);

  const long max_records = (opt.steps - opt.burnin) / opt.thin;
  log.samples.resize(max_records, dim);
  log.sample_steps.reserve(max_records);
  log.xi_series.reserve(max_records);
  log.temp_series.reserve(max_records);

  StepCounters counters;
  Eigen::VectorXd stat_sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd metric_sum = Eigen::VectorXd::Zero(dim);
  double xi_sum = 0.0;
  double temp_sum = 0.0;
  long stat_steps = 0;

  const Minibatch empty_batch;
  for (long step = 1; step <= opt.steps; ++step) {
    const Minibatch batch =
        batched ? draw_minibatch(batch_rng, data_size, batch_size, opt.with_replacement)
                : empty_batch;

    const ThermostatState backup = state;
    int failures = 0;
    for (;;) {
      try {
        switch (rc.method) {
          case Method::ccadl:
            ccadl_step(state, force, batch, estimator ? &*estimator : nullptr, rc, noise_rng);
            break;
          case Method::sgnht:
            sgnht_step(state, force, batch, rc, noise_rng);
            break;
          case Method::sghmc:
            sghmc_step(state, force, batch, estimator ? &*estimator : nullptr, rc, &counters,
                       noise_rng);
            break;
          case Method::sgld:
            sgld_step(state, force, batch, rc, noise_rng);
            break;
          case Method::hmc:
            throw std::invalid_argument("run_chain drives stochastic-gradient methods; use hmc_reference");
        }
        break;
      } catch (const std::domain_error&) {
        // The proposal left the model's support. Restore and retry with fresh
        // noise; momentum methods also refresh p, otherwise the deterministic
        // position update would fail identically.
        state = backup;
        ++log.support_rejects;
        if (++failures >= opt.max_support_retries) {
          log.aborted = true;
          log.abort_reason = "support violation: " + std::to_string(failures) +
                             " consecutive rejected steps at step " + std::to_string(step);
          break;
        }
        if (uses_momentum(rc.method))
          state.p = std::sqrt(1.0 / rc.beta) *
                    rc.mass_diag.cwiseSqrt().cwiseProduct(gaussian_vector(noise_rng, dim));
      }
    }
    if (log.aborted) break;

    metric_sum += state.theta;
    if (opt.metric && opt.metric_every > 0 && step % opt.metric_every == 0)
      log.metric_series.emplace_back(step, opt.metric(metric_sum / static_cast<double>(step)));

    if (step > opt.burnin) {
      ++stat_steps;
      stat_sum += state.theta;
      xi_sum += state.xi;
      const double temp = kinetic_temperature(state.p, rc.mass_diag);
      temp_sum += temp;
      if ((step - opt.burnin) % opt.thin == 0) {
        log.samples.row(static_cast<Eigen::Index>(log.sample_steps.size())) = state.theta;
        log.sample_steps.push_back(step);
        log.xi_series.push_back(state.xi);
        log.temp_series.push_back(temp);
      }
    }
  }

  const Eigen::Index records = static_cast<Eigen::Index>(log.sample_steps.size());
  if (records < log.samples.rows()) log.samples.conservativeResize(records, dim);

  if (stat_steps > 0) {
    log.posterior_mean = stat_sum / static_cast<double>(stat_steps);
    log.mean_xi = xi_sum / static_cast<double>(stat_steps);
    log.mean_temp = temp_sum / static_cast<double>(stat_steps);
  }
  log.friction_deficit = counters.friction_deficit;
  if (estimator) log.covariance_clamps = estimator->negative_clamp_count();
  return log;
}

ChainLog run_chain(const Model& model, const SamplerConfig& cfg, const RunOptions& opt,
                   std::uint64_t seed) {
  ModelForce force(model);
  return run_chain(force, cfg, opt, seed);
}

namespace {

double kinetic_energy(const Eigen::VectorXd& p, const Eigen::VectorXd& mass) {
  return 0.5 * (p.array().square() / mass.array()).sum();
}

// Standard leapfrog; throws std::domain_error when the trajectory leaves the
// model's support.
void leapfrog(const Model& model, Eigen::VectorXd& theta, Eigen::VectorXd& p,
              const Eigen::VectorXd& mass, double eps, int steps) {
  p -= 0.5 * eps * model.full_gradient(theta);
  for (int i = 0; i < steps; ++i) {
    theta.array() += eps * (p.array() / mass.array());
    if (i + 1 < steps) p -= eps * model.full_gradient(theta);
  }
  p -= 0.5 * eps * model.full_gradient(theta);
}

}  // namespace

ChainLog hmc_reference(const Model& model, const SamplerConfig& cfg, const HmcOptions& opt,
                       std::uint64_t seed) {
  if (opt.samples <= 0) throw std::invalid_argument("hmc: samples must be positive");
  if (opt.burnin < 0 || opt.burnin >= opt.samples)
    throw std::invalid_argument("hmc: need samples > burnin >= 0");
  if (opt.eps <= 0.0 || opt.leapfrog_steps < 1) throw std::invalid_argument("hmc: bad trajectory");

  const Eigen::Index dim = model.dimension();
  const SamplerConfig rc = cfg.resolved(dim);

  auto rng = make_stream(seed, "noise");
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Eigen::VectorXd theta = opt.theta0.size() ? opt.theta0 : Eigen::VectorXd::Zero(dim);
  if (theta.size() != dim) throw std::invalid_argument("hmc: theta0 dimension mismatch");

  ChainLog log;
  log.method = Method::hmc;
  log.seed = seed;
  log.config = rc;
  log.steps = opt.samples;
  log.burnin = opt.burnin;
  log.thin = opt.thin;
  log.posterior_mean = Eigen::VectorXd::Zero(dim);

  const long max_records = (opt.samples - opt.burnin) / opt.thin;
  log.samples.resize(max_records, dim);
  log.sample_steps.reserve(max_records);
  log.xi_series.reserve(max_records);
  log.temp_series.reserve(max_records);

  Eigen::VectorXd stat_sum = Eigen::VectorXd::Zero(dim);
  long stat_steps = 0;
  long accepted = 0;
  long window_accepted = 0;
  const long window = 200;

  for (long iter = 1; iter <= opt.samples; ++iter) {
    const Eigen::VectorXd p0 =
        std::sqrt(1.0 / rc.beta) * rc.mass_diag.cwiseSqrt().cwiseProduct(gaussian_vector(rng, dim));
    Eigen::VectorXd theta_prop = theta;
    Eigen::VectorXd p_prop = p0;
    bool accept = false;
    const double u = unif(rng);
    try {
      const double h0 = model.potential(theta) + kinetic_energy(p0, rc.mass_diag);
      leapfrog(model, theta_prop, p_prop, rc.mass_diag, opt.eps, opt.leapfrog_steps);
      const double h1 = model.potential(theta_prop) + kinetic_energy(p_prop, rc.mass_diag);
      accept = u < std::exp(-rc.beta * (h1 - h0));
    } catch (const std::domain_error&) {
      accept = false;
    }
    if (accept) {
      theta = theta_prop;
      ++accepted;
      ++window_accepted;
    }

    if (iter % window == 0) {
      if (window_accepted < window / 100) log.tuning_warning = true;
      window_accepted = 0;
    }

    if (iter > opt.burnin) {
      ++stat_steps;
      stat_sum += theta;
      if ((iter - opt.burnin) % opt.thin == 0) {
        log.samples.row(static_cast<Eigen::Index>(log.sample_steps.size())) = theta;
        log.sample_steps.push_back(iter);
        log.xi_series.push_back(0.0);
        log.temp_series.push_back(kinetic_temperature(p0, rc.mass_diag));
      }
    }
  }

  if (stat_steps > 0) log.posterior_mean = stat_sum / static_cast<double>(stat_steps);
  log.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(opt.samples);
  return log;
}

double hmc_mean_abs_energy_error(const Model& model, const SamplerConfig& cfg, double eps,
                                 int leapfrog_steps, const Eigen::VectorXd& theta0, int trials,
                                 std::uint64_t seed) {
  const Eigen::Index dim = model.dimension();
  const SamplerConfig rc = cfg.resolved(dim);
  auto rng = make_stream(seed, "noise");
  double total = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Eigen::VectorXd p0 =
        std::sqrt(1.0 / rc.beta) * rc.mass_diag.cwiseSqrt().cwiseProduct(gaussian_vector(rng, dim));
    Eigen::VectorXd theta = theta0;
    Eigen::VectorXd p = p0;
    const double h0 = model.potential(theta) + kinetic_energy(p0, rc.mass_diag);
    leapfrog(model, theta, p, rc.mass_diag, eps, leapfrog_steps);
    const double h1 = model.potential(theta) + kinetic_energy(p, rc.mass_diag);
    total += std::abs(h1 - h0);
  }
  return total / trials;
}

}  // namespace sgmcmc
