#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace sgmcmc {

// Instantaneous temperature p'M^-1 p / N_d (average kinetic energy per
// degree of freedom).
double kinetic_temperature(const Eigen::VectorXd& p, const Eigen::VectorXd& mass_diag);

struct IactResult {
  double iact = 1.0;
  bool degenerate = false;  // zero-variance input
  long lags_used = 0;
};

// Integrated autocorrelation time 1 + 2*sum(rho_k), truncated at the first
// lag whose sample autocorrelation drops below zero. Needs >= 100 points.
IactResult integrated_autocorr_time(const std::vector<double>& series);

// Standard error of the series mean from non-overlapping batch means.
// The series must split into at least 10 batches.
double batch_means_se(const std::vector<double>& series, int batch_count);

struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  int bins = 100;
  double width() const { return (hi - lo) / bins; }
  double center(int i) const { return lo + (i + 0.5) * width(); }
};

GridSpec grid_from_moments(double mean, double sd, int bins = 100, double half_width_sds = 5.0);

struct HistogramRmse {
  double rmse = 0.0;
  double edge_fraction = 0.0;  // sample mass falling outside the grid
  bool edge_flagged = false;   // edge_fraction > 1%
};

// RMSE between the histogram density of the samples and the analytic density
// at bin centers. Out-of-grid samples are counted in the edge bins.
HistogramRmse marginal_rmse(const std::vector<double>& samples,
                            const std::function<double(double)>& density, const GridSpec& grid);

struct MetricRow {
  std::string name;
  std::string param;
  double value;
};

// Flat per-run measurement summary. Serialized one row per metric so runs
// can be diffed and aggregated mechanically.
struct DiagnosticsReport {
  std::vector<MetricRow> rows;

  void add(const std::string& name, const std::string& param, double value) {
    rows.push_back({name, param, value});
  }
  std::string to_csv(const std::string& header_comment = "") const;
  std::string to_text() const;
};

}  // namespace sgmcmc
