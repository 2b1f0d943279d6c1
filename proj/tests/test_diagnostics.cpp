#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sgmcmc/diagnostics.hpp"
#include "sgmcmc/models.hpp"
#include "sgmcmc/rng.hpp"

using namespace sgmcmc;

namespace {

std::vector<double> white_noise(std::mt19937_64& rng, long n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

std::vector<double> ar1(std::mt19937_64& rng, long n, double rho) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  double x = 0.0;
  for (auto& out : v) {
    x = rho * x + normal(rng);
    out = x;
  }
  return v;
}

}  // namespace

TEST_CASE("kinetic temperature: hand values") {
  CHECK(kinetic_temperature(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Ones(4)) == 0.0);
  CHECK(kinetic_temperature(Eigen::VectorXd::Ones(7), Eigen::VectorXd::Ones(7)) ==
        doctest::Approx(1.0));
  // Linear in p'p for unit mass.
  Eigen::VectorXd p = Eigen::VectorXd::Ones(7) * 2.0;
  CHECK(kinetic_temperature(p, Eigen::VectorXd::Ones(7)) == doctest::Approx(4.0));
  // Mass rescales componentwise.
  Eigen::VectorXd m = Eigen::VectorXd::Constant(7, 4.0);
  CHECK(kinetic_temperature(p, m) == doctest::Approx(1.0));
  CHECK_THROWS_AS(kinetic_temperature(p, Eigen::VectorXd::Ones(3)), std::invalid_argument);
}

TEST_CASE("kinetic temperature: chi-square moment for Gaussian momenta") {
  const int dim = 1000, draws = 10000;
  auto rng = make_stream(41, "p");
  const Eigen::VectorXd mass = Eigen::VectorXd::Ones(dim);
  double total = 0.0;
  for (int i = 0; i < draws; ++i) total += kinetic_temperature(gaussian_vector(rng, dim), mass);
  const double se = std::sqrt(2.0 / (static_cast<double>(dim) * draws));
  CHECK(std::abs(total / draws - 1.0) < 3.0 * se);
}

TEST_CASE("iact: white noise is near one") {
  auto rng = make_stream(42, "w");
  const auto r = integrated_autocorr_time(white_noise(rng, 100000));
  CHECK_FALSE(r.degenerate);
  CHECK(std::abs(r.iact - 1.0) < 0.1);
}

TEST_CASE("iact: AR(1) matches the analytic value") {
  auto rng = make_stream(43, "a");
  const double rho = 0.9;
  const auto r = integrated_autocorr_time(ar1(rng, 1000000, rho));
  const double expected = (1.0 + rho) / (1.0 - rho);  // 19
  CHECK(std::abs(r.iact - expected) < 0.1 * expected);
}

TEST_CASE("iact: duplicating every element roughly doubles it") {
  auto rng = make_stream(44, "a");
  const auto base = ar1(rng, 200000, 0.6);
  std::vector<double> dup;
  dup.reserve(base.size() * 2);
  for (double x : base) {
    dup.push_back(x);
    dup.push_back(x);
  }
  const double t1 = integrated_autocorr_time(base).iact;
  const double t2 = integrated_autocorr_time(dup).iact;
  CHECK(t2 / t1 > 1.8);
  CHECK(t2 / t1 < 2.2);
}

TEST_CASE("iact: invariant under affine transforms") {
  auto rng = make_stream(45, "a");
  const auto base = ar1(rng, 50000, 0.5);
  std::vector<double> scaled(base.size());
  std::transform(base.begin(), base.end(), scaled.begin(),
                 [](double x) { return -3.7 * x + 11.0; });
  CHECK(std::abs(integrated_autocorr_time(base).iact - integrated_autocorr_time(scaled).iact) <
        1e-10);
}

TEST_CASE("iact: degenerate and too-short series") {
  const std::vector<double> constant(500, 2.5);
  const auto r = integrated_autocorr_time(constant);
  CHECK(r.degenerate);
  CHECK(r.iact == 1.0);
  CHECK_THROWS_AS(integrated_autocorr_time(std::vector<double>(50, 0.0)), std::invalid_argument);
}

TEST_CASE("batch means: white-noise standard error") {
  auto rng = make_stream(46, "w");
  const long n = 300000;
  const auto series = white_noise(rng, n);
  const double se = batch_means_se(series, 30);
  const double expected = 1.0 / std::sqrt(static_cast<double>(n));
  CHECK(se / expected > 0.6);
  CHECK(se / expected < 1.4);
}

TEST_CASE("batch means: AR(1) standard error tracks the autocorrelation") {
  auto rng = make_stream(47, "a");
  const long n = 300000;
  const double rho = 0.6;
  const auto series = ar1(rng, n, rho);
  const double se = batch_means_se(series, 30);
  const double var_x = 1.0 / (1.0 - rho * rho);
  const double expected = std::sqrt(var_x * (1.0 + rho) / (1.0 - rho) / n);
  CHECK(se / expected > 0.6);
  CHECK(se / expected < 1.4);
}

TEST_CASE("batch means: rejects series that cannot form 10 batches") {
  CHECK_THROWS_AS(batch_means_se(std::vector<double>(5, 1.0), 10), std::invalid_argument);
}

TEST_CASE("marginal rmse: histogram noise floor for exact samples") {
  NormalGammaParams p;
  p.alpha_n = 51.0;
  p.beta_n = 50.0;
  auto density = [&](double x) { return gaussian_marginal_density(p, GaussianMarginal::precision, x); };
  const double mean = gaussian_marginal_mean(p, GaussianMarginal::precision);
  const double sd = gaussian_marginal_sd(p, GaussianMarginal::precision);

  std::gamma_distribution<double> gamma(p.alpha_n, 1.0 / p.beta_n);
  auto rng = make_stream(48, "g");
  std::vector<double> samples(1000000);
  for (auto& x : samples) x = gamma(rng);

  const GridSpec grid = grid_from_moments(mean, sd);
  const auto r = marginal_rmse(samples, density, grid);
  const double max_density = density((p.alpha_n - 1.0) / p.beta_n);
  CHECK(r.rmse < 0.01 * max_density);
  CHECK_FALSE(r.edge_flagged);
}

TEST_CASE("marginal rmse: point mass against a smooth density") {
  NormalGammaParams p;
  const std::vector<double> samples(1000, 1.0);
  const auto r = marginal_rmse(
      samples, [&](double x) { return gaussian_marginal_density(p, GaussianMarginal::precision, x); },
      grid_from_moments(1.0, 1.0));
  CHECK(r.rmse > 0.0);
}

TEST_CASE("marginal rmse: pure function, invariant under permutation") {
  auto rng = make_stream(49, "s");
  std::vector<double> samples(20000);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& x : samples) x = normal(rng);
  auto density = [](double x) { return std::exp(-x * x / 2.0) / std::sqrt(2.0 * M_PI); };
  const GridSpec grid = grid_from_moments(0.0, 1.0);

  const auto a = marginal_rmse(samples, density, grid);
  std::shuffle(samples.begin(), samples.end(), rng);
  const auto b = marginal_rmse(samples, density, grid);
  CHECK(a.rmse == b.rmse);
}

TEST_CASE("marginal rmse: flags when mass falls off the grid") {
  auto rng = make_stream(50, "s");
  std::vector<double> samples(10000);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& x : samples) x = normal(rng);
  auto density = [](double x) { return std::exp(-x * x / 2.0) / std::sqrt(2.0 * M_PI); };
  const auto r = marginal_rmse(samples, density, GridSpec{-1.0, 1.0, 20});
  CHECK(r.edge_flagged);
  CHECK(r.edge_fraction > 0.25);
}

TEST_CASE("report: csv serialization") {
  DiagnosticsReport rep;
  rep.add("rmse", "mu", 0.0021);
  rep.add("mean_xi", "", 1.02);
  const std::string csv = rep.to_csv("cfg");
  CHECK(csv.find("# cfg\n") == 0);
  CHECK(csv.find("metric,param,value") != std::string::npos);
  CHECK(csv.find("rmse,mu,") != std::string::npos);
}
