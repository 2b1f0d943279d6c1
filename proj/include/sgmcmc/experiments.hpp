#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sgmcmc/diagnostics.hpp"
#include "sgmcmc/samplers.hpp"

namespace sgmcmc {

// One experiment run as exposed by the CLI: method, model, chain sizes and
// the data source, all funneled through a single user seed.
struct ExperimentConfig {
  Method method = Method::ccadl;
  std::string model = "gaussian";  // gaussian | logreg
  double h = 0.01;
  double friction = 1.0;  // A
  double beta = 1.0;
  double thermal_mass = 0.0;  // <= 0 -> N_d
  CovarianceMode cov_mode = CovarianceMode::full;
  int batch_size = 10;  // n
  long steps = 100000;
  long burnin = -1;  // < 0 -> 20% of steps
  long thin = 1;
  std::uint64_t seed = 1;

  // Data source: a file, or synthetic when empty. Logistic-regression CSV
  // files carry the label in their last column.
  std::string data_path;
  bool data_libsvm = false;
  bool csv_header = false;  // skip the first non-comment line of CSV files
  bool remap01 = false;
  std::string test_path;

  int synth_n = 100;          // gaussian: N; logreg: training size
  int synth_dim = 10;         // logreg feature dimension
  double synth_separation = 2.0;
  int synth_test_n = 500;
  int project_k = 0;             // > 0 applies a shared random projection to train/test
  bool project_identity = false; // with project_k == d, keep the features unchanged

  bool with_replacement = false;
  std::vector<double> theta0;  // empty -> model default
  bool randomize_theta0 = false;

  // logreg extras
  bool ref_hmc = false;
  std::vector<std::pair<int, int>> pairs;  // coordinate pairs to dump
  long metric_every = 0;                   // 0 -> once per pass over the data

  // HMC reference tuning
  double hmc_eps = 0.05;
  int hmc_leapfrog = 20;
  long hmc_samples = 5000;

  std::string outdir = ".";

  long resolved_burnin() const { return burnin >= 0 ? burnin : steps / 5; }
  SamplerConfig sampler() const;
  // Single-line echo for file headers and the key=value config.echo body.
  std::string echo_line() const;
  std::string echo_file() const;
};

// Gaussian mean/precision study: synthesizes or loads the data, runs the
// chain, writes samples.csv, series.csv, report.csv, config.echo, run.meta.
// Returns the process exit code.
int cmd_gaussian(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

// Bayesian logistic regression study: writes the test-log-likelihood-vs-pass
// series, posterior-mean weights, optional coordinate-pair sample dumps, and
// the optional full-gradient HMC reference mean.
int cmd_logreg(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

struct ValidateOptions {
  bool quick = false;
  std::uint64_t seed = 1;
  // Fault injection for self-test demonstrations: forces the covariance
  // damping off inside the CCAdL runs.
  bool disable_damping = false;
};

// Packaged self-checks of the stationary-moment identities and the
// reduction identity; prints one pass/fail line per check. Returns the
// number of failures.
int cmd_validate(const ValidateOptions& opt, std::ostream& out);

// 1-D quadratic potential with injected Gaussian gradient noise of
// covariance sigma(theta) = sigma_const + sigma_quad * theta^2, the testbed
// for the stationary-moment checks. Runs with thin=1 and no burn-in so the
// recorded series cover every step.
ChainLog run_injected_quadratic(Method method, double h, double friction, double beta, long steps,
                                double sigma_const, double sigma_quad, CovarianceMode mode,
                                std::uint64_t seed);

// Chain-level summary used by reports and tests.
DiagnosticsReport gaussian_report(const ChainLog& log, const NormalGammaParams& posterior);

// CSV writers. Every file starts with a '#' comment echoing the config.
void write_samples_csv(const std::string& path, const ChainLog& log,
                       const std::vector<std::string>& param_names, const std::string& echo);
void write_series_csv(const std::string& path, const ChainLog& log, const std::string& echo);
void write_metric_series_csv(const std::string& path, const ChainLog& log, double steps_per_pass,
                             long burnin, const std::string& echo);
void write_vector_csv(const std::string& path, const Eigen::VectorXd& v,
                      const std::string& column, const std::string& echo);
void write_pair_csv(const std::string& path, const ChainLog& log, int i, int j,
                    const std::string& echo);

}  // namespace sgmcmc
