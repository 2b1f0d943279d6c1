#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "sgmcmc/covariance.hpp"
#include "sgmcmc/rng.hpp"

using namespace sgmcmc;

namespace {

std::vector<Eigen::VectorXd> random_grads(std::mt19937_64& rng, int n, int dim) {
  std::vector<Eigen::VectorXd> g;
  g.reserve(n);
  for (int i = 0; i < n; ++i) g.push_back(gaussian_vector(rng, dim));
  return g;
}

// Textbook two-pass covariance, written independently of the library path.
Eigen::MatrixXd two_pass_oracle(const std::vector<Eigen::VectorXd>& g) {
  const int n = static_cast<int>(g.size());
  const int d = static_cast<int>(g[0].size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& v : g) mean += v;
  mean /= n;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double s = 0.0;
      for (const auto& v : g) s += (v[a] - mean[a]) * (v[b] - mean[b]);
      cov(a, b) = s / (n - 1);
    }
  return cov;
}

}  // namespace

TEST_CASE("empirical covariance: identical gradients give zero") {
  std::vector<Eigen::VectorXd> g(5, Eigen::Vector3d(1.0, -2.0, 0.5));
  CHECK(empirical_covariance(g).cwiseAbs().maxCoeff() == 0.0);
  CHECK(empirical_covariance_diag(g).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("empirical covariance: two scalar points by hand") {
  std::vector<Eigen::VectorXd> g;
  g.push_back(Eigen::VectorXd::Constant(1, 0.0));
  g.push_back(Eigen::VectorXd::Constant(1, 2.0));
  CHECK(empirical_covariance(g)(0, 0) == doctest::Approx(2.0));
  CHECK(empirical_covariance_diag(g)[0] == doctest::Approx(2.0));
}

TEST_CASE("empirical covariance: matches the two-pass oracle") {
  auto rng = make_stream(31, "g");
  const auto g = random_grads(rng, 50, 3);
  const Eigen::MatrixXd oracle = two_pass_oracle(g);
  CHECK((empirical_covariance(g) - oracle).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((empirical_covariance_diag(g) - oracle.diagonal()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("empirical covariance: fewer than two gradients rejected") {
  std::vector<Eigen::VectorXd> g;
  g.push_back(Eigen::Vector2d(1.0, 2.0));
  CHECK_THROWS_AS(empirical_covariance(g), std::invalid_argument);
}

TEST_CASE("estimator: first update overwrites the zero initialization") {
  GradientCovarianceEstimator est(CovarianceMode::full, 2);
  Eigen::Matrix2d v;
  v << 3.0, 1.0, 1.0, 2.0;
  est.update(v);
  CHECK(est.step_count() == 1);
  CHECK((est.estimate() - v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("estimator: constant stream is a fixed point") {
  GradientCovarianceEstimator est(CovarianceMode::diagonal, 2);
  const Eigen::Vector2d v(4.0, 0.5);
  for (int t = 0; t < 20; ++t) est.update_diag(v);
  CHECK((est.estimate_diag() - v).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("estimator: running-mean identity for kappa_t = 1/t") {
  GradientCovarianceEstimator est(CovarianceMode::diagonal, 1);
  est.update_diag(Eigen::VectorXd::Constant(1, 0.0));
  est.update_diag(Eigen::VectorXd::Constant(1, 2.0));
  CHECK(est.estimate_diag()[0] == doctest::Approx(1.0));

  auto rng = make_stream(32, "v");
  GradientCovarianceEstimator full(CovarianceMode::full, 3);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(3, 3);
  const int t_max = 37;
  for (int t = 0; t < t_max; ++t) {
    const auto g = random_grads(rng, 6, 3);
    const Eigen::MatrixXd v = empirical_covariance(g);
    full.update(v);
    mean += v;
  }
  mean /= t_max;
  CHECK((full.estimate() - mean).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("estimator: symmetric and numerically PSD in full mode") {
  auto rng = make_stream(33, "v");
  GradientCovarianceEstimator est(CovarianceMode::full, 4);
  for (int t = 0; t < 200; ++t) est.observe(random_grads(rng, 5, 4));
  const Eigen::MatrixXd& m = est.estimate();
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("estimator: diagonal mode equals the diagonal of full mode") {
  auto rng_a = make_stream(34, "v");
  auto rng_b = make_stream(34, "v");
  GradientCovarianceEstimator full(CovarianceMode::full, 3);
  GradientCovarianceEstimator diag(CovarianceMode::diagonal, 3);
  for (int t = 0; t < 50; ++t) {
    full.observe(random_grads(rng_a, 8, 3));
    diag.observe(random_grads(rng_b, 8, 3));
  }
  CHECK((full.estimate().diagonal() - diag.estimate_diag()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("estimator: custom kappa schedule gives an exponential moving average") {
  GradientCovarianceEstimator est(CovarianceMode::diagonal, 1, [](long) { return 0.5; });
  est.update_diag(Eigen::VectorXd::Constant(1, 4.0));  // 0.5*0 + 0.5*4
  est.update_diag(Eigen::VectorXd::Constant(1, 8.0));  // 0.5*2 + 0.5*8
  CHECK(est.estimate_diag()[0] == doctest::Approx(5.0));
}

TEST_CASE("estimator: shape mismatch and mode misuse rejected") {
  GradientCovarianceEstimator est(CovarianceMode::full, 2);
  CHECK_THROWS_AS(est.update(Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
  CHECK_THROWS_AS(est.update_diag(Eigen::Vector2d(1.0, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(est.estimate_diag(), std::logic_error);
}

TEST_CASE("sigma hat: scaling and the not-ready state") {
  GradientCovarianceEstimator est(CovarianceMode::full, 2);
  CHECK_THROWS_AS(est.sigma_hat(100, 10), std::logic_error);

  est.update(Eigen::Matrix2d::Zero());
  CHECK(est.sigma_hat(100, 10).cwiseAbs().maxCoeff() == 0.0);

  GradientCovarianceEstimator est2(CovarianceMode::full, 2);
  est2.update(Eigen::Matrix2d::Identity());
  const Eigen::MatrixXd s = est2.sigma_hat(100, 10);  // N^2/n = 1000
  CHECK(s(0, 0) == doctest::Approx(1000.0));
  CHECK(s(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("sigma hat: converges to the true scaled covariance") {
  // Per-sample gradients drawn with known covariance C; after many updates
  // sigma_hat should approach (N^2/n) C.
  Eigen::Matrix2d c;
  c << 2.0, 0.6, 0.6, 1.0;
  const Eigen::Matrix2d chol = c.llt().matrixL();

  auto rng = make_stream(35, "g");
  GradientCovarianceEstimator est(CovarianceMode::full, 2);
  const int n = 50, updates = 2000;
  std::vector<Eigen::VectorXd> g(n);
  for (int t = 0; t < updates; ++t) {
    for (int i = 0; i < n; ++i) g[i] = chol * gaussian_vector(rng, 2);
    est.observe(g);
  }
  const Eigen::MatrixXd target = (100.0 * 100.0 / 10.0) * c;
  const double rel = (est.sigma_hat(100, 10) - target).norm() / target.norm();
  CHECK(rel < 0.05);
}
