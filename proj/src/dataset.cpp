#include "sgdml/dataset.hpp"

#include <algorithm>

#include "sgdml/error.hpp"

namespace sgdml {

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.class_count = class_count;
  out.label_names = label_names;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), dim());
  out.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= size()) throw Error(ErrorCode::InvalidConfig, "subset row out of range");
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
    out.labels.push_back(labels[rows[r]]);
  }
  return out;
}

double Dataset::max_row_norm() const {
  if (size() == 0) return 0.0;
  return features.rowwise().norm().maxCoeff();
}

void Dataset::validate() const {
  if (size() == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no rows");
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw Error(ErrorCode::InvalidConfig, "feature rows and labels disagree");
  if (class_count <= 0) throw Error(ErrorCode::InvalidConfig, "class_count must be positive");
  for (int label : labels) {
    if (label < 0 || label >= class_count)
      throw Error(ErrorCode::InvalidConfig, "label outside [0, class_count)");
  }
  if (!features.allFinite()) throw Error(ErrorCode::NonFiniteInput, "non-finite feature value");
}

int Dataset::present_classes() const {
  std::vector<bool> seen(static_cast<std::size_t>(std::max(class_count, 0)), false);
  int count = 0;
  for (int label : labels) {
    if (label >= 0 && label < class_count && !seen[static_cast<std::size_t>(label)]) {
      seen[static_cast<std::size_t>(label)] = true;
      ++count;
    }
  }
  return count;
}

}  // namespace sgdml
