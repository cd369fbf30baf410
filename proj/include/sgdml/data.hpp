#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "sgdml/dataset.hpp"
#include "sgdml/linalg.hpp"

namespace sgdml {

// LIBSVM text format: `<label> <index>:<value> ...`, 1-based strictly
// increasing indices. Labels are remapped to ids in order of first appearance.

/// Throws ParseError (with the 1-based line number), EmptyDataset, IoError.
Dataset read_libsvm(const std::filesystem::path& path);
Dataset read_libsvm(std::istream& in);

/// Values are written in shortest round-trip form, zeros omitted.
void write_libsvm(const Dataset& data, const std::filesystem::path& path);
void write_libsvm(const Dataset& data, std::ostream& out);

/// Gives two separately loaded files one label universe (by label text) and
/// one feature width (zero-padding the narrower).
void align_datasets(Dataset& a, Dataset& b);

struct PcaModel {
  Vector mean;
  Matrix components;           // d x p, orthonormal columns
  Vector explained_variance;  // descending
};

/// Top-p principal axes of the sample covariance (1/(n-1) normalisation). Each
/// component's largest-magnitude entry is made positive. Throws BadRank unless
/// 1 <= p <= min(n - 1, d).
PcaModel pca_fit(const Dataset& data, Eigen::Index p);

/// Rows mapped to components^T (x - mean). Throws DimMismatch.
Dataset pca_transform(const PcaModel& model, const Dataset& data);

/// Per-feature affine map to zero mean and unit variance, fitted on one set
/// and applied to others. Constant features are only centred.
struct Standardizer {
  Vector mean;
  Vector scale;
};

Standardizer fit_standardizer(const Dataset& data);
Dataset apply_standardizer(const Standardizer& standardizer, const Dataset& data);

struct SyntheticSpec {
  int classes = 3;
  int dim = 20;
  int per_class = 100;
  int noise_dims = 10;
  std::uint64_t seed = 0;
  // Distance of each class mean from the origin along its own axis.
  double separation = 6.0;
  // Standard deviation of the trailing label-independent coordinates.
  double noise_std = 5.0;
};

/// Class c is centred at separation * e_c in the leading (dim - noise_dims)
/// coordinates (random directions of the same length when there are more
/// classes than signal coordinates), with unit Gaussian noise there and
/// N(0, noise_std^2) in the trailing noise_dims coordinates. Rows are grouped
/// by class. Throws DegenerateLabels for classes < 2, InvalidConfig for other
/// bad shapes.
Dataset make_synthetic(const SyntheticSpec& spec);

}  // namespace sgdml
