#pragma once

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "sgdml/dataset.hpp"
#include "sgdml/error.hpp"

namespace fixture {

inline sgdml::Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
  sgdml::Dataset data;
  const auto d = rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size());
  data.features.resize(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (Eigen::Index c = 0; c < d; ++c) data.features(static_cast<Eigen::Index>(r), c) = rows[r][c];
  data.labels = labels;
  int classes = 0;
  for (int l : labels) classes = std::max(classes, l + 1);
  data.class_count = classes;
  for (int c = 0; c < classes; ++c) data.label_names.push_back(std::to_string(c));
  return data;
}

// n points with iid N(0, scale^2) coordinates and labels cycling through classes.
inline sgdml::Dataset random_dataset(std::mt19937_64& rng, std::size_t n, int d, int classes, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  std::vector<int> labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (int c = 0; c < d; ++c) rows[r][c] = normal(rng);
    labels[r] = static_cast<int>(r % classes);
  }
  return make_dataset(rows, labels);
}

template <typename F>
void expect_code(sgdml::ErrorCode code, const F& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << sgdml::to_string(code);
  } catch (const sgdml::Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace fixture
