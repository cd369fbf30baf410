#include "sgdml/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "sgdml/error.hpp"
#include "sgdml/random.hpp"

namespace sgdml {

namespace {

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + what);
}

struct SparseRow {
  std::string label;
  std::vector<std::pair<long, double>> entries;
};

SparseRow parse_line(const std::string& line, std::size_t line_no) {
  std::istringstream tokens(line);
  SparseRow row;
  tokens >> row.label;
  if (row.label.find(':') != std::string::npos) parse_fail(line_no, "missing label");
  long previous = 0;
  std::string token;
  while (tokens >> token) {
    const auto colon = token.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == token.size())
      parse_fail(line_no, "expected <index>:<value>, got '" + token + "'");
    const char* begin = token.data();
    const char* sep = begin + colon;
    const char* end = begin + token.size();
    long index = 0;
    auto [p1, e1] = std::from_chars(begin, sep, index);
    if (e1 != std::errc() || p1 != sep) parse_fail(line_no, "bad feature index in '" + token + "'");
    double value = 0.0;
    auto [p2, e2] = std::from_chars(sep + 1, end, value);
    if (e2 != std::errc() || p2 != end || !std::isfinite(value))
      parse_fail(line_no, "bad feature value in '" + token + "'");
    if (index < 1) parse_fail(line_no, "feature indices are 1-based");
    if (index <= previous) parse_fail(line_no, "feature indices must be strictly increasing");
    previous = index;
    row.entries.emplace_back(index, value);
  }
  return row;
}

}  // namespace

Dataset read_libsvm(std::istream& in) {
  std::vector<SparseRow> rows;
  std::string line;
  std::size_t line_no = 0;
  long max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    SparseRow row = parse_line(line, line_no);
    if (!row.entries.empty()) max_index = std::max(max_index, row.entries.back().first);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyDataset, "no data lines");

  Dataset data;
  data.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(rows.size()), max_index);
  data.labels.reserve(rows.size());
  std::map<std::string, int> ids;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto [it, inserted] = ids.emplace(rows[r].label, static_cast<int>(data.label_names.size()));
    if (inserted) data.label_names.push_back(rows[r].label);
    data.labels.push_back(it->second);
    for (const auto& [index, value] : rows[r].entries)
      data.features(static_cast<Eigen::Index>(r), index - 1) = value;
  }
  data.class_count = static_cast<int>(data.label_names.size());
  return data;
}

Dataset read_libsvm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_libsvm(in);
}

void write_libsvm(const Dataset& data, std::ostream& out) {
  const Eigen::Index d = data.dim();
  // Without a nonzero in the last column a reader would infer a smaller d.
  const bool pin_last = d > 0 && data.size() > 0 && (data.features.col(d - 1).array() == 0.0).all();
  char buffer[64];
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto label = static_cast<std::size_t>(data.labels[r]);
    out << (label < data.label_names.size() ? data.label_names[label] : std::to_string(label));
    for (Eigen::Index c = 0; c < d; ++c) {
      const double v = data.features(static_cast<Eigen::Index>(r), c);
      if (v == 0.0 && !(pin_last && r == 0 && c == d - 1)) continue;
      auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
      out << ' ' << (c + 1) << ':' << std::string_view(buffer, static_cast<std::size_t>(end - buffer));
    }
    out << '\n';
  }
}

void write_libsvm(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_libsvm(data, out);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void align_datasets(Dataset& a, Dataset& b) {
  std::vector<std::string> names = a.label_names;
  std::map<std::string, int> ids;
  for (std::size_t c = 0; c < names.size(); ++c) ids.emplace(names[c], static_cast<int>(c));
  std::vector<int> remap(b.label_names.size());
  for (std::size_t c = 0; c < b.label_names.size(); ++c) {
    auto [it, inserted] = ids.emplace(b.label_names[c], static_cast<int>(names.size()));
    if (inserted) names.push_back(b.label_names[c]);
    remap[c] = it->second;
  }
  for (int& label : b.labels) label = remap[static_cast<std::size_t>(label)];
  a.label_names = names;
  b.label_names = names;
  a.class_count = b.class_count = static_cast<int>(names.size());

  const Eigen::Index d = std::max(a.dim(), b.dim());
  for (Dataset* data : {&a, &b}) {
    if (data->dim() < d) {
      const Eigen::Index old = data->dim();
      data->features.conservativeResize(Eigen::NoChange, d);
      data->features.rightCols(d - old).setZero();
    }
  }
}

PcaModel pca_fit(const Dataset& data, Eigen::Index p) {
  data.validate();
  const auto n = static_cast<Eigen::Index>(data.size());
  const Eigen::Index d = data.dim();
  if (p < 1 || p > std::min(n - 1, d))
    throw Error(ErrorCode::BadRank, "PCA rank must lie in [1, min(n - 1, d)]");

  PcaModel model;
  model.mean = data.features.colwise().mean().transpose();
  const Matrix centred = data.features.rowwise() - model.mean.transpose();
  const Matrix cov = (centred.transpose() * centred) / static_cast<double>(n - 1);
  const EigenDecomposition eig = sym_eigen(cov);

  model.components.resize(d, p);
  model.explained_variance.resize(p);
  for (Eigen::Index c = 0; c < p; ++c) {
    const Eigen::Index src = d - 1 - c;  // eigenvalues ascend
    Vector axis = eig.vectors.col(src);
    Eigen::Index lead = 0;
    axis.cwiseAbs().maxCoeff(&lead);
    if (axis[lead] < 0.0) axis = -axis;
    model.components.col(c) = axis;
    model.explained_variance[c] = std::max(eig.values[src], 0.0);
  }
  return model;
}

Dataset pca_transform(const PcaModel& model, const Dataset& data) {
  if (data.dim() != model.mean.size() || model.components.rows() != model.mean.size())
    throw Error(ErrorCode::DimMismatch, "data dimension does not match the PCA model");
  Dataset out;
  out.labels = data.labels;
  out.class_count = data.class_count;
  out.label_names = data.label_names;
  out.features = (data.features.rowwise() - model.mean.transpose()) * model.components;
  return out;
}

Standardizer fit_standardizer(const Dataset& data) {
  data.validate();
  Standardizer s;
  s.mean = data.features.colwise().mean().transpose();
  const auto n = static_cast<double>(data.size());
  const Matrix centred = data.features.rowwise() - s.mean.transpose();
  const Vector var = centred.colwise().squaredNorm().transpose() / std::max(n - 1.0, 1.0);
  s.scale = var.unaryExpr([](double v) { return v > 0.0 ? std::sqrt(v) : 1.0; });
  return s;
}

Dataset apply_standardizer(const Standardizer& standardizer, const Dataset& data) {
  if (data.dim() != standardizer.mean.size())
    throw Error(ErrorCode::DimMismatch, "data dimension does not match the standardizer");
  Dataset out = data;
  out.features = ((data.features.rowwise() - standardizer.mean.transpose()).array().rowwise() /
                  standardizer.scale.transpose().array())
                     .matrix();
  return out;
}

Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.classes < 2) throw Error(ErrorCode::DegenerateLabels, "need at least two classes");
  if (spec.dim < 2 || spec.per_class < 2 || spec.noise_dims < 0 || spec.noise_dims >= spec.dim)
    throw Error(ErrorCode::InvalidConfig,
                "need dim >= 2, per_class >= 2 and 0 <= noise_dims < dim");
  if (!(spec.noise_std >= 0.0) || !std::isfinite(spec.separation))
    throw Error(ErrorCode::InvalidConfig, "bad separation or noise scale");

  const int signal = spec.dim - spec.noise_dims;
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix means = Matrix::Zero(spec.classes, signal);
  for (int c = 0; c < spec.classes; ++c) {
    if (spec.classes <= signal) {
      means(c, c) = spec.separation;
    } else {
      Vector direction(signal);
      for (int a = 0; a < signal; ++a) direction[a] = normal(rng);
      means.row(c) = spec.separation * direction.normalized().transpose();
    }
  }

  Dataset data;
  const auto n = static_cast<Eigen::Index>(spec.classes) * spec.per_class;
  data.features.resize(n, spec.dim);
  data.class_count = spec.classes;
  for (int c = 0; c < spec.classes; ++c) data.label_names.push_back(std::to_string(c));
  Eigen::Index r = 0;
  for (int c = 0; c < spec.classes; ++c) {
    for (int s = 0; s < spec.per_class; ++s, ++r) {
      for (int a = 0; a < signal; ++a) data.features(r, a) = means(c, a) + normal(rng);
      for (int a = signal; a < spec.dim; ++a) data.features(r, a) = spec.noise_std * normal(rng);
      data.labels.push_back(c);
    }
  }
  return data;
}

}  // namespace sgdml
