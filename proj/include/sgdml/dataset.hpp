#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sgdml {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense labeled data. Rows of `features` are samples; `labels[r]` is a class
/// id in [0, class_count). `label_names[c]` is the original text of class c.
struct Dataset {
  FeatureMatrix features;
  std::vector<int> labels;
  int class_count = 0;
  std::vector<std::string> label_names;

  std::size_t size() const { return labels.size(); }
  Eigen::Index dim() const { return features.cols(); }

  auto point(std::size_t r) const { return features.row(static_cast<Eigen::Index>(r)).transpose(); }

  /// Rows selected by `rows`, in that order, sharing this dataset's class universe.
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Largest Euclidean norm of any row.
  double max_row_norm() const;

  /// Checks shape consistency and label range. Throws EmptyDataset / InvalidConfig.
  void validate() const;

  /// Number of distinct labels that actually occur.
  int present_classes() const;
};

/// "Point i should be closer to j than to k": label(i) == label(j) != label(k).
struct Triplet {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

}  // namespace sgdml
