#include "sgdml/eval.hpp"

#include <algorithm>
#include <numeric>

#include "sgdml/error.hpp"

namespace sgdml {

namespace {

void check_inputs(const MetricMatrix& metric, const Dataset& train, Eigen::Index query_dim, int k) {
  if (metric.rows() != metric.cols() || metric.rows() != train.dim() || query_dim != train.dim())
    throw Error(ErrorCode::DimMismatch, "metric, training data and query dimensions disagree");
  if (k <= 0 || static_cast<std::size_t>(k) > train.size())
    throw Error(ErrorCode::InvalidConfig, "k must lie in [1, training size]");
}

int predict(const MetricMatrix& metric, const Dataset& train, const Eigen::Ref<const Vector>& query,
            int k, std::vector<std::size_t>& order) {
  const FeatureMatrix diff = train.features.rowwise() - query.transpose();
  const Vector dist = (diff * metric).cwiseProduct(diff).rowwise().sum();

  order.resize(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto closer = [&](std::size_t a, std::size_t b) {
    const double da = dist[static_cast<Eigen::Index>(a)];
    const double db = dist[static_cast<Eigen::Index>(b)];
    return da < db || (da == db && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);

  std::vector<int> votes(static_cast<std::size_t>(train.class_count), 0);
  std::vector<double> summed(static_cast<std::size_t>(train.class_count), 0.0);
  for (int r = 0; r < k; ++r) {
    const std::size_t idx = order[static_cast<std::size_t>(r)];
    const auto label = static_cast<std::size_t>(train.labels[idx]);
    ++votes[label];
    summed[label] += dist[static_cast<Eigen::Index>(idx)];
  }
  int best = -1;
  for (int c = 0; c < train.class_count; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    if (votes[cu] == 0) continue;
    if (best < 0) {
      best = c;
      continue;
    }
    const auto bu = static_cast<std::size_t>(best);
    if (votes[cu] > votes[bu] || (votes[cu] == votes[bu] && summed[cu] < summed[bu])) best = c;
  }
  return best;
}

}  // namespace

int knn_predict(const MetricMatrix& metric, const Dataset& train,
                const Eigen::Ref<const Vector>& query, int k) {
  check_inputs(metric, train, query.size(), k);
  std::vector<std::size_t> order;
  return predict(metric, train, query, k, order);
}

EvalResult classification_error(const MetricMatrix& metric, const Dataset& train,
                                 const Dataset& test, int k) {
  train.validate();
  test.validate();
  check_inputs(metric, train, test.dim(), k);
  if (test.class_count != train.class_count)
    throw Error(ErrorCode::InvalidConfig, "train and test use different class universes");

  EvalResult result;
  result.k = k;
  result.n_test = test.size();
  const auto classes = static_cast<std::size_t>(train.class_count);
  result.confusion.assign(classes, std::vector<std::size_t>(classes, 0));

  std::vector<std::size_t> order;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < test.size(); ++r) {
    const int predicted = predict(metric, train, test.point(r), k, order);
    const int truth = test.labels[r];
    ++result.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
    if (predicted == truth) ++correct;
  }
  result.error_rate = 1.0 - static_cast<double>(correct) / static_cast<double>(test.size());
  return result;
}

}  // namespace sgdml
