#include "sgdml/triplets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "sgdml/error.hpp"
#include "sgdml/random.hpp"

namespace sgdml {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Neighbours {
  std::size_t same = kNone;
  std::size_t other = kNone;
};

// Exact brute-force scan; strict '<' keeps the lowest index on ties.
Neighbours nearest_neighbours(const Dataset& data, std::size_t anchor) {
  Neighbours nn;
  double best_same = std::numeric_limits<double>::infinity();
  double best_other = std::numeric_limits<double>::infinity();
  const auto x = data.features.row(static_cast<Eigen::Index>(anchor));
  const int label = data.labels[anchor];
  for (std::size_t r = 0; r < data.size(); ++r) {
    if (r == anchor) continue;
    const double dist = (data.features.row(static_cast<Eigen::Index>(r)) - x).squaredNorm();
    if (data.labels[r] == label) {
      if (dist < best_same) {
        best_same = dist;
        nn.same = r;
      }
    } else if (dist < best_other) {
      best_other = dist;
      nn.other = r;
    }
  }
  return nn;
}

}  // namespace

std::vector<Triplet> generate_triplets(const Dataset& data, std::size_t n_constraints,
                                       std::uint64_t seed) {
  data.validate();
  if (data.present_classes() < 2)
    throw Error(ErrorCode::DegenerateLabels, "triplets need at least two classes");

  std::vector<Triplet> triplets;
  triplets.reserve(n_constraints);
  // Anchors repeat (N usually exceeds n), so neighbours are cached per anchor.
  std::vector<Neighbours> cache(data.size());
  std::vector<bool> cached(data.size(), false);
  Rng rng(seed);
  for (std::size_t t = 0; t < n_constraints; ++t) {
    const std::size_t anchor = uniform_index(rng, data.size());
    if (!cached[anchor]) {
      cache[anchor] = nearest_neighbours(data, anchor);
      cached[anchor] = true;
    }
    const Neighbours& nn = cache[anchor];
    if (nn.same == kNone)
      throw Error(ErrorCode::SingletonClass,
                  "anchor " + std::to_string(anchor) + " has no same-class neighbour");
    triplets.push_back({anchor, nn.same, nn.other});
  }
  return triplets;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double train_fraction,
                                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorCode::BadFraction, "train fraction must lie in (0, 1)");
  const std::size_t n = data.size();
  // The small slack keeps e.g. 0.7 * 10 at 7 rather than ceil(7.000000000000001).
  const auto n_train = static_cast<std::size_t>(
      std::ceil(train_fraction * static_cast<double>(n) - 1e-9));
  if (n_train == 0 || n_train >= n)
    throw Error(ErrorCode::BadFraction, "split leaves one side empty");

  std::vector<std::size_t> order(n);
  for (std::size_t r = 0; r < n; ++r) order[r] = r;
  Rng rng(seed);
  for (std::size_t r = n - 1; r > 0; --r) std::swap(order[r], order[uniform_index(rng, r + 1)]);

  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.subset(train), data.subset(test)};
}

void write_triplets_csv(std::ostream& out, const std::vector<Triplet>& triplets) {
  for (const Triplet& t : triplets) out << t.i << ',' << t.j << ',' << t.k << '\n';
}

}  // namespace sgdml
