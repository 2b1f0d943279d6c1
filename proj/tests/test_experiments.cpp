#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sgmcmc/experiments.hpp"
#include "sgmcmc/rng.hpp"

using namespace sgmcmc;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

long data_rows(const std::string& csv) {
  long rows = 0;
  std::istringstream in(csv);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("cmd_gaussian: emits the expected files with the right record count") {
  ExperimentConfig cfg;
  cfg.model = "gaussian";
  cfg.method = Method::ccadl;
  cfg.steps = 100;
  cfg.burnin = 0;
  cfg.thin = 10;
  cfg.batch_size = 10;
  cfg.synth_n = 100;
  cfg.seed = 7;
  cfg.outdir = fresh_dir("sgmcmc_gauss").string();

  std::ostringstream out, err;
  REQUIRE(cmd_gaussian(cfg, out, err) == 0);

  const auto dir = std::filesystem::path(cfg.outdir);
  for (const char* name : {"samples.csv", "series.csv", "report.csv", "config.echo", "run.meta"})
    CHECK(std::filesystem::exists(dir / name));

  const std::string samples = slurp(dir / "samples.csv");
  CHECK(data_rows(samples) == 10);
  CHECK(samples.rfind("# method=ccadl", 0) == 0);  // config echo comment first

  const std::string report = slurp(dir / "report.csv");
  CHECK(report.find("rmse,mu,") != std::string::npos);
  CHECK(report.find("rmse,gamma,") != std::string::npos);
  CHECK(report.find("posterior_mean,gamma,") != std::string::npos);

  const std::string echo = slurp(dir / "config.echo");
  CHECK(echo.find("method=ccadl\n") != std::string::npos);
  CHECK(echo.find("seed=7\n") != std::string::npos);
}

TEST_CASE("cmd_gaussian: reruns with one seed are byte-identical") {
  ExperimentConfig cfg;
  cfg.model = "gaussian";
  cfg.method = Method::sgnht;
  cfg.cov_mode = CovarianceMode::none;
  cfg.steps = 2000;
  cfg.burnin = 0;
  cfg.thin = 5;
  cfg.batch_size = 10;
  cfg.seed = 42;

  cfg.outdir = fresh_dir("sgmcmc_rep_a").string();
  std::ostringstream out, err;
  REQUIRE(cmd_gaussian(cfg, out, err) == 0);
  ExperimentConfig cfg2 = cfg;
  cfg2.outdir = fresh_dir("sgmcmc_rep_b").string();
  REQUIRE(cmd_gaussian(cfg2, out, err) == 0);

  // Timestamps live only in run.meta; every other artifact must match.
  for (const char* name : {"samples.csv", "series.csv", "report.csv", "config.echo"})
    CHECK(slurp(std::filesystem::path(cfg.outdir) / name) ==
          slurp(std::filesystem::path(cfg2.outdir) / name));
}

TEST_CASE("cmd_logreg: pass arithmetic, reference mean and pair dumps") {
  ExperimentConfig cfg;
  cfg.model = "logreg";
  cfg.method = Method::ccadl;
  cfg.cov_mode = CovarianceMode::full;
  cfg.h = 5e-4;
  cfg.friction = 10.0;
  cfg.steps = 400;
  cfg.burnin = 0;
  cfg.thin = 4;
  cfg.batch_size = 100;
  cfg.synth_n = 2000;
  cfg.synth_dim = 10;
  cfg.synth_test_n = 200;
  cfg.seed = 5;
  cfg.ref_hmc = true;
  cfg.hmc_samples = 200;
  cfg.hmc_eps = 0.05;
  cfg.hmc_leapfrog = 10;
  cfg.pairs = {{2, 5}};
  cfg.outdir = fresh_dir("sgmcmc_logreg").string();

  std::ostringstream out, err;
  REQUIRE(cmd_logreg(cfg, out, err) == 0);

  const auto dir = std::filesystem::path(cfg.outdir);
  const std::string series = slurp(dir / "loglik_series.csv");
  // One evaluation per pass over the data: steps * n / N = 400 / 20 = 20.
  CHECK(data_rows(series) == 20);
  CHECK(series.find("step,passes,test_loglik,in_burnin") != std::string::npos);
  // The pass column of the first record is step/steps_per_pass = 20/20 = 1.
  CHECK(series.find("\n20,1,") != std::string::npos);

  const std::string pair = slurp(dir / "pairs_2_5.csv");
  CHECK(data_rows(pair) + 1 == 100 + 1);  // 400 steps / thin 4, header excluded

  CHECK(std::filesystem::exists(dir / "hmc_mean.csv"));
  CHECK(std::filesystem::exists(dir / "posterior_mean.csv"));
  const std::string report = slurp(dir / "report.csv");
  CHECK(report.find("hmc_acceptance,") != std::string::npos);
  CHECK(report.find("test_loglik_posterior_mean,") != std::string::npos);
}

TEST_CASE("cmd_logreg: file-backed datasets run end to end") {
  auto dir = fresh_dir("sgmcmc_logreg_files");
  std::filesystem::create_directories(dir);
  {
    auto rng = sgmcmc::make_stream(77, "data");
    const Dataset train = synth_two_class(rng, 200, 4, 2.0);
    const Dataset test = synth_two_class(rng, 50, 4, 2.0);
    write_dense_csv((dir / "train.csv").string(), train);
    write_dense_csv((dir / "test.csv").string(), test);
  }

  ExperimentConfig cfg;
  cfg.model = "logreg";
  cfg.method = Method::sgnht;
  cfg.cov_mode = CovarianceMode::none;
  cfg.h = 1e-3;
  cfg.steps = 200;
  cfg.burnin = 0;
  cfg.batch_size = 20;
  cfg.seed = 8;
  cfg.data_path = (dir / "train.csv").string();
  cfg.test_path = (dir / "test.csv").string();
  cfg.outdir = (dir / "out").string();

  std::ostringstream out, err;
  REQUIRE(cmd_logreg(cfg, out, err) == 0);
  CHECK(std::filesystem::exists(dir / "out" / "loglik_series.csv"));

  cfg.test_path.clear();
  CHECK_THROWS_AS(cmd_logreg(cfg, out, err), std::invalid_argument);
}

TEST_CASE("cmd_validate: quick self-check passes and fault injection fails") {
  ValidateOptions opt;
  opt.quick = true;
  opt.seed = 2;
  std::ostringstream out;
  CHECK(cmd_validate(opt, out) == 0);
  const std::string text = out.str();
  CHECK(text.find("PASS sgnht_constant_noise_mean_xi") != std::string::npos);
  CHECK(text.find("PASS ccadl_parameter_noise_mean_xi") != std::string::npos);
  CHECK(text.find("FAIL") == std::string::npos);

  ValidateOptions broken = opt;
  broken.disable_damping = true;
  std::ostringstream out2;
  CHECK(cmd_validate(broken, out2) > 0);
  CHECK(out2.str().find("FAIL") != std::string::npos);
}
