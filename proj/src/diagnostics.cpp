#include "sgmcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace sgmcmc {

double kinetic_temperature(const Eigen::VectorXd& p, const Eigen::VectorXd& mass_diag) {
  if (p.size() != mass_diag.size()) throw std::invalid_argument("momentum/mass dimension mismatch");
  return (p.array().square() / mass_diag.array()).sum() / static_cast<double>(p.size());
}

IactResult integrated_autocorr_time(const std::vector<double>& series) {
  const long n = static_cast<long>(series.size());
  if (n < 100) throw std::invalid_argument("iact needs a series of length >= 100");

  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);

  double var = 0.0;
  for (double x : series) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n);

  IactResult r;
  if (var == 0.0) {
    r.degenerate = true;
    return r;
  }

  double sum_rho = 0.0;
  const long max_lag = n / 2;
  for (long k = 1; k <= max_lag; ++k) {
    double c = 0.0;
    for (long t = 0; t + k < n; ++t) c += (series[t] - mean) * (series[t + k] - mean);
    const double rho = c / (static_cast<double>(n) * var);
    if (rho < 0.0) break;
    sum_rho += rho;
    r.lags_used = k;
  }
  r.iact = 1.0 + 2.0 * sum_rho;
  return r;
}

double batch_means_se(const std::vector<double>& series, int batch_count) {
  if (batch_count < 2) throw std::invalid_argument("batch_means_se needs >= 2 batches");
  const long n = static_cast<long>(series.size());
  const long batch_len = n / batch_count;
  if (batch_len < 1 || n / batch_len < 10)
    throw std::invalid_argument("series too short: cannot form >= 10 batches");

  std::vector<double> means(batch_count, 0.0);
  for (int b = 0; b < batch_count; ++b) {
    double s = 0.0;
    for (long t = b * batch_len; t < (b + 1) * batch_len; ++t) s += series[t];
    means[b] = s / static_cast<double>(batch_len);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= batch_count;
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= (batch_count - 1);
  return std::sqrt(var / batch_count);
}

GridSpec grid_from_moments(double mean, double sd, int bins, double half_width_sds) {
  if (bins < 1) throw std::invalid_argument("grid needs >= 1 bin");
  if (sd <= 0.0) throw std::invalid_argument("grid needs sd > 0");
  return {mean - half_width_sds * sd, mean + half_width_sds * sd, bins};
}

HistogramRmse marginal_rmse(const std::vector<double>& samples,
                            const std::function<double(double)>& density, const GridSpec& grid) {
  if (samples.empty()) throw std::invalid_argument("marginal_rmse needs samples");
  const double w = grid.width();
  std::vector<long> counts(grid.bins, 0);
  long outside = 0;
  for (double x : samples) {
    int bin = static_cast<int>(std::floor((x - grid.lo) / w));
    if (bin < 0) {
      bin = 0;
      ++outside;
    } else if (bin >= grid.bins) {
      bin = grid.bins - 1;
      ++outside;
    }
    ++counts[bin];
  }

  const double total = static_cast<double>(samples.size());
  double sq = 0.0;
  for (int i = 0; i < grid.bins; ++i) {
    const double est = static_cast<double>(counts[i]) / (total * w);
    const double diff = est - density(grid.center(i));
    sq += diff * diff;
  }

  HistogramRmse r;
  r.rmse = std::sqrt(sq / grid.bins);
  r.edge_fraction = static_cast<double>(outside) / total;
  r.edge_flagged = r.edge_fraction > 0.01;
  return r;
}

std::string DiagnosticsReport::to_csv(const std::string& header_comment) const {
  std::ostringstream out;
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "metric,param,value\n";
  char buf[32];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", row.value);
    out << row.name << "," << row.param << "," << buf << "\n";
  }
  return out.str();
}

std::string DiagnosticsReport::to_text() const {
  std::ostringstream out;
  for (const auto& row : rows) {
    out << row.name;
    if (!row.param.empty()) out << "(" << row.param << ")";
    out << " = " << row.value << "\n";
  }
  return out.str();
}

}  // namespace sgmcmc
