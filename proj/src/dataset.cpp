#include "sgmcmc/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sgmcmc {

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

// Locale-independent double parse of a trimmed token. from_chars rejects a
// leading '+', which LIBSVM labels use.
bool parse_double(std::string_view tok, double& out) {
  if (tok.size() > 1 && tok.front() == '+') tok.remove_prefix(1);
  const char* b = tok.data();
  const char* e = tok.data() + tok.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Minibatch Minibatch::full(int n) {
  Minibatch b;
  b.dataset_size = n;
  b.indices.resize(n);
  std::iota(b.indices.begin(), b.indices.end(), 0);
  return b;
}

Minibatch draw_minibatch(std::mt19937_64& rng, int dataset_size, int batch_size,
                         bool with_replacement) {
  if (dataset_size < 1 || batch_size < 1)
    throw std::invalid_argument("draw_minibatch: need dataset_size >= 1 and batch_size >= 1");
  if (!with_replacement && batch_size > dataset_size)
    throw std::invalid_argument("draw_minibatch: batch_size exceeds dataset size");

  Minibatch batch;
  batch.dataset_size = dataset_size;
  batch.indices.reserve(batch_size);

  if (with_replacement) {
    std::uniform_int_distribution<int> pick(0, dataset_size - 1);
    for (int i = 0; i < batch_size; ++i) batch.indices.push_back(pick(rng));
    return batch;
  }

  // Floyd's subset sampling: uniform over n-subsets, O(n) expected work.
  std::set<int> chosen;
  for (int j = dataset_size - batch_size; j < dataset_size; ++j) {
    std::uniform_int_distribution<int> pick(0, j);
    int candidate = pick(rng);
    if (!chosen.insert(candidate).second) chosen.insert(j);
  }
  batch.indices.assign(chosen.begin(), chosen.end());
  return batch;
}

Dataset load_dense_csv(const std::string& path, bool label_column, bool skip_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header_pending = skip_header;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    const std::string s(sv);
    while (true) {
      std::size_t comma = s.find(',', start);
      std::string_view tok = trim(std::string_view(s).substr(
          start, comma == std::string::npos ? std::string::npos : comma - start));
      double v;
      if (!parse_double(tok, v))
        parse_fail(path, lineno, "non-numeric field '" + std::string(tok) + "'");
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      parse_fail(path, lineno, "ragged row: expected " + std::to_string(rows.front().size()) +
                                   " fields, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no records");

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  Eigen::Index d = static_cast<Eigen::Index>(rows.front().size());
  if (label_column) {
    if (d < 2) throw std::runtime_error(path + ": label column requested but rows have a single field");
    --d;
  }

  Dataset data;
  data.features.resize(n, d);
  if (label_column) data.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.features(i, j) = rows[i][j];
    if (label_column) data.labels[i] = rows[i][d];
  }
  data.provenance = "csv:" + path;
  return data;
}

void write_dense_csv(const std::string& path, const Dataset& data, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (!comment.empty()) out << "# " << comment << "\n";
  char buf[32];
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.features(i, j));
      out << (j ? "," : "") << buf;
    }
    if (data.has_labels()) {
      std::snprintf(buf, sizeof buf, "%.17g", data.labels[i]);
      out << "," << buf;
    }
    out << "\n";
  }
}

Dataset load_libsvm(const std::string& path, int dim_override, bool remap01) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::vector<double> labels;
  std::vector<std::vector<std::pair<int, double>>> rows;
  int max_index = 0;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    std::istringstream ls{std::string(sv)};
    std::string tok;
    if (!(ls >> tok)) continue;
    double label;
    if (!parse_double(tok, label)) parse_fail(path, lineno, "bad label '" + tok + "'");
    std::vector<std::pair<int, double>> row;
    std::set<int> seen;
    while (ls >> tok) {
      std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        parse_fail(path, lineno, "malformed token '" + tok + "'");
      int idx;
      {
        const char* b = tok.data();
        const char* e = tok.data() + colon;
        auto res = std::from_chars(b, e, idx);
        if (res.ec != std::errc() || res.ptr != e || idx < 1)
          parse_fail(path, lineno, "bad feature index in '" + tok + "'");
      }
      double val;
      if (!parse_double(std::string_view(tok).substr(colon + 1), val))
        parse_fail(path, lineno, "bad feature value in '" + tok + "'");
      if (!seen.insert(idx).second)
        parse_fail(path, lineno, "duplicate feature index " + std::to_string(idx));
      max_index = std::max(max_index, idx);
      row.emplace_back(idx, val);
    }
    labels.push_back(label);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no records");

  int dim = dim_override > 0 ? dim_override : max_index;
  if (max_index > dim)
    throw std::runtime_error(path + ": feature index " + std::to_string(max_index) +
                             " exceeds dimension override " + std::to_string(dim));

  Dataset data;
  data.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), dim);
  data.labels.resize(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (auto [idx, val] : rows[i]) data.features(static_cast<Eigen::Index>(i), idx - 1) = val;
    double y = labels[i];
    if (remap01 && (y == 0.0 || y == 1.0)) y = y == 0.0 ? -1.0 : 1.0;
    data.labels[static_cast<Eigen::Index>(i)] = y;
  }
  data.provenance = "libsvm:" + path;
  return data;
}

Dataset synth_gaussian(std::mt19937_64& rng, int n, double mean, double sd) {
  if (sd <= 0.0) throw std::invalid_argument("synth_gaussian: sd must be positive");
  std::normal_distribution<double> normal(mean, sd);
  Dataset data;
  data.features.resize(n, 1);
  for (int i = 0; i < n; ++i) data.features(i, 0) = normal(rng);
  data.provenance = "synth_gaussian";
  return data;
}

Dataset synth_two_class(std::mt19937_64& rng, int n, int dim, double separation) {
  if (dim < 1) throw std::invalid_argument("synth_two_class: dim must be >= 1");
  if (separation < 0.0) throw std::invalid_argument("synth_two_class: separation must be >= 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset data;
  data.features.resize(n, dim);
  data.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const double y = (i % 2 == 0) ? 1.0 : -1.0;
    for (int j = 0; j < dim; ++j) data.features(i, j) = normal(rng);
    data.features(i, 0) += y * separation / 2.0;
    data.labels[i] = y;
  }
  data.provenance = "synth_two_class";
  return data;
}

RandomProjection RandomProjection::gaussian(std::mt19937_64& rng, int input_dim, int output_dim) {
  if (output_dim > input_dim)
    throw std::invalid_argument("random projection: output dimension exceeds input dimension");
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(output_dim)));
  Eigen::MatrixXd p(output_dim, input_dim);
  for (int i = 0; i < output_dim; ++i)
    for (int j = 0; j < input_dim; ++j) p(i, j) = normal(rng);
  return RandomProjection(std::move(p));
}

RandomProjection RandomProjection::identity(int dim) {
  return RandomProjection(Eigen::MatrixXd::Identity(dim, dim));
}

Dataset RandomProjection::apply(const Dataset& data) const {
  if (data.dim() != projection_.cols())
    throw std::invalid_argument("random projection: dimension mismatch");
  Dataset out;
  out.features = data.features * projection_.transpose();
  out.labels = data.labels;
  out.provenance = data.provenance + "+proj" + std::to_string(projection_.rows());
  return out;
}

}  // namespace sgmcmc
