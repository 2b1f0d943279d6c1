#pragma once

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

namespace sgmcmc {

// Immutable after construction; samplers only ever read it.
struct Dataset {
  Eigen::MatrixXd features;  // N x d
  Eigen::VectorXd labels;    // size N, or size 0 when the data carry no labels
  std::string provenance;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
  bool has_labels() const { return labels.size() > 0; }
};

// A size-n random subset of [0, N). The gradient scale factor is N/n.
struct Minibatch {
  std::vector<int> indices;
  int dataset_size = 0;

  int size() const { return static_cast<int>(indices.size()); }
  double scale() const { return static_cast<double>(dataset_size) / static_cast<double>(indices.size()); }

  static Minibatch full(int n);
};

// Draws n distinct indices uniformly over n-subsets of [0, N).
// with_replacement relaxes distinctness (ablation only).
Minibatch draw_minibatch(std::mt19937_64& rng, int dataset_size, int batch_size,
                         bool with_replacement = false);

// Dense CSV: comma-separated reals, dot decimal separator, lines starting
// with '#' ignored. When label_column is set the last column is split off
// into labels. Parse errors carry the 1-based line number.
Dataset load_dense_csv(const std::string& path, bool label_column = false,
                       bool skip_header = false);
void write_dense_csv(const std::string& path, const Dataset& data,
                     const std::string& comment = "");

// LIBSVM sparse text, 1-based indices: "label idx:val idx:val ...".
// Dimension is the largest index seen unless dim_override > 0.
// remap01 maps {0,1} labels onto {-1,+1}.
Dataset load_libsvm(const std::string& path, int dim_override = 0, bool remap01 = false);

// N i.i.d. draws from N(mean, sd^2), one column.
Dataset synth_gaussian(std::mt19937_64& rng, int n, double mean, double sd);

// Two Gaussian blobs centered at +-(separation/2) e1 with unit covariance,
// labels +-1, balanced up to rounding.
Dataset synth_two_class(std::mt19937_64& rng, int n, int dim, double separation);

// k x d matrix of i.i.d. N(0, 1/k) entries, kept so the same projection can
// be applied to both train and test sets.
class RandomProjection {
 public:
  static RandomProjection gaussian(std::mt19937_64& rng, int input_dim, int output_dim);
  static RandomProjection identity(int dim);

  Dataset apply(const Dataset& data) const;
  const Eigen::MatrixXd& matrix() const { return projection_; }

 private:
  explicit RandomProjection(Eigen::MatrixXd projection) : projection_(std::move(projection)) {}
  Eigen::MatrixXd projection_;
};

}  // namespace sgmcmc
