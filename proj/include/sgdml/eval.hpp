#pragma once

#include <vector>

#include "sgdml/dataset.hpp"
#include "sgdml/linalg.hpp"

namespace sgdml {

struct EvalResult {
  double error_rate = 0.0;
  std::size_t n_test = 0;
  int k = 0;
  // confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
};

/// Majority label among the k training points closest to `query` under
/// `metric`. Distance ties go to the lower index; vote ties go to the class
/// with the smallest summed distance, then the lowest class id.
/// Throws DimMismatch, InvalidConfig (k == 0 or k > train size).
int knn_predict(const MetricMatrix& metric, const Dataset& train,
                const Eigen::Ref<const Vector>& query, int k);

EvalResult classification_error(const MetricMatrix& metric, const Dataset& train,
                                 const Dataset& test, int k);

}  // namespace sgdml
