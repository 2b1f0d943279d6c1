// Experiment runner: Bayesian posterior sampling with stochastic-gradient
// thermostats (SGLD, SGHMC, SGNHT, CCAdL) plus a full-gradient HMC reference.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "sgmcmc/experiments.hpp"

namespace {

using sgmcmc::CovarianceMode;
using sgmcmc::ExperimentConfig;

void add_common_options(CLI::App* cmd, ExperimentConfig& cfg, std::string& method,
                        std::string& cov, std::vector<std::uint64_t>& seeds) {
  // The stepsize flag is --h, so the help flag keeps only its long form.
  cmd->set_help_flag("--help", "print help");
  cmd->add_option("--method", method, "sgld | sghmc | sgnht | ccadl")->capture_default_str();
  cmd->add_option("--h", cfg.h, "stepsize")->capture_default_str();
  cmd->add_option("--A", cfg.friction, "effective friction")->capture_default_str();
  cmd->add_option("--beta", cfg.beta, "inverse temperature")->capture_default_str();
  cmd->add_option("--mu", cfg.thermal_mass, "thermal mass (default N_d)");
  cmd->add_option("--cov", cov, "covariance mode: none | diagonal | full")->capture_default_str();
  cmd->add_option("--n", cfg.batch_size, "minibatch size")->capture_default_str();
  cmd->add_option("--steps", cfg.steps, "total steps")->capture_default_str();
  cmd->add_option("--burnin", cfg.burnin, "burn-in steps (default 20% of steps)");
  cmd->add_option("--thin", cfg.thin, "thinning interval")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  cmd->add_option("--seeds", seeds, "run one chain per seed (outputs in <out>/seed<k>/)")
      ->delimiter(',');
  cmd->add_option("--out", cfg.outdir, "output directory")->capture_default_str();
  cmd->add_option("--theta0", cfg.theta0, "initial parameter vector")->delimiter(',');
  cmd->add_flag("--randomize-theta0", cfg.randomize_theta0, "add N(0,I) to the initial point");
  cmd->add_flag("--with-replacement", cfg.with_replacement, "sample minibatches with replacement");
}

CovarianceMode parse_cov(const std::string& name) {
  if (name == "none") return CovarianceMode::none;
  if (name == "diagonal") return CovarianceMode::diagonal;
  if (name == "full") return CovarianceMode::full;
  throw CLI::ValidationError("--cov", "expected none|diagonal|full");
}

int run_per_seed(const ExperimentConfig& base, const std::vector<std::uint64_t>& seeds,
                 int (*cmd)(const ExperimentConfig&, std::ostream&, std::ostream&)) {
  if (seeds.empty()) return cmd(base, std::cout, std::cerr);

  // One chain per worker; outputs are per-seed directories, so no shared writes.
  std::vector<int> codes(seeds.size(), 0);
  std::vector<std::thread> workers;
  workers.reserve(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    workers.emplace_back([&, i] {
      ExperimentConfig cfg = base;
      cfg.seed = seeds[i];
      cfg.outdir = base.outdir + "/seed" + std::to_string(seeds[i]);
      try {
        codes[i] = cmd(cfg, std::cout, std::cerr);
      } catch (const std::exception& e) {
        std::cerr << "seed " << seeds[i] << ": " << e.what() << "\n";
        codes[i] = 2;
      }
    });
  }
  for (auto& w : workers) w.join();
  int worst = 0;
  for (int c : codes) worst = std::max(worst, c);
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-gradient MCMC thermostats with covariance control"};
  app.require_subcommand(1);

  ExperimentConfig gauss_cfg;
  gauss_cfg.model = "gaussian";
  gauss_cfg.batch_size = 10;
  std::string gauss_method = "ccadl", gauss_cov = "full";
  std::vector<std::uint64_t> gauss_seeds;
  auto* gauss = app.add_subcommand("gaussian", "1-D Gaussian mean/precision inference");
  add_common_options(gauss, gauss_cfg, gauss_method, gauss_cov, gauss_seeds);
  gauss->add_option("--N", gauss_cfg.synth_n, "synthetic dataset size")->capture_default_str();
  gauss->add_option("--data", gauss_cfg.data_path, "CSV file with one value per row");

  ExperimentConfig lr_cfg;
  lr_cfg.model = "logreg";
  lr_cfg.batch_size = 100;
  lr_cfg.steps = 20000;
  lr_cfg.synth_n = 2000;
  std::string lr_method = "ccadl", lr_cov = "full";
  std::vector<std::uint64_t> lr_seeds;
  std::vector<std::string> lr_pairs;
  auto* lr = app.add_subcommand("logreg", "Bayesian logistic regression");
  add_common_options(lr, lr_cfg, lr_method, lr_cov, lr_seeds);
  lr->add_option("--data", lr_cfg.data_path, "training data (CSV with the label last, or LIBSVM)");
  lr->add_option("--test", lr_cfg.test_path, "test data");
  lr->add_flag("--libsvm", lr_cfg.data_libsvm, "data files are LIBSVM sparse text");
  lr->add_flag("--csv-header", lr_cfg.csv_header, "CSV files start with a header line");
  lr->add_flag("--remap01", lr_cfg.remap01, "remap {0,1} labels to {-1,+1}");
  lr->add_option("--synth-N", lr_cfg.synth_n, "synthetic training size")->capture_default_str();
  lr->add_option("--synth-d", lr_cfg.synth_dim, "synthetic dimension")->capture_default_str();
  lr->add_option("--synth-sep", lr_cfg.synth_separation, "class separation")->capture_default_str();
  lr->add_option("--synth-test-N", lr_cfg.synth_test_n, "synthetic test size")->capture_default_str();
  lr->add_option("--project", lr_cfg.project_k, "random-project features to k dimensions");
  lr->add_flag("--project-identity", lr_cfg.project_identity,
               "with --project k equal to d, keep the features unchanged");
  lr->add_flag("--ref-hmc", lr_cfg.ref_hmc, "also run the full-gradient HMC reference");
  lr->add_option("--pairs", lr_pairs, "coordinate pairs to dump, e.g. --pairs 2,5");
  lr->add_option("--eval-every", lr_cfg.metric_every, "steps between test-loglik evaluations");
  lr->add_option("--hmc-eps", lr_cfg.hmc_eps, "HMC leapfrog stepsize")->capture_default_str();
  lr->add_option("--hmc-L", lr_cfg.hmc_leapfrog, "HMC leapfrog steps")->capture_default_str();
  lr->add_option("--hmc-samples", lr_cfg.hmc_samples, "HMC iterations")->capture_default_str();

  sgmcmc::ValidateOptions val_opt;
  auto* val = app.add_subcommand("validate", "stationary-moment and reduction self-checks");
  val->add_flag("--quick", val_opt.quick, "reduced step counts, looser tolerances");
  val->add_option("--seed", val_opt.seed, "master seed")->capture_default_str();
  val->add_flag("--disable-damping", val_opt.disable_damping,
                "fault injection: turn off the CCAdL covariance damping")
      ->group("");  // hidden

  CLI11_PARSE(app, argc, argv);

  try {
    if (gauss->parsed()) {
      gauss_cfg.method = sgmcmc::method_from_name(gauss_method);
      gauss_cfg.cov_mode = parse_cov(gauss_cov);
      return run_per_seed(gauss_cfg, gauss_seeds, sgmcmc::cmd_gaussian);
    }
    if (lr->parsed()) {
      lr_cfg.method = sgmcmc::method_from_name(lr_method);
      lr_cfg.cov_mode = parse_cov(lr_cov);
      for (const auto& p : lr_pairs) {
        const auto comma = p.find(',');
        if (comma == std::string::npos)
          throw std::invalid_argument("--pairs expects i,j");
        lr_cfg.pairs.emplace_back(std::stoi(p.substr(0, comma)), std::stoi(p.substr(comma + 1)));
      }
      return run_per_seed(lr_cfg, lr_seeds, sgmcmc::cmd_logreg);
    }
    if (val->parsed()) return sgmcmc::cmd_validate(val_opt, std::cout) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
