#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "sgdml/dataset.hpp"

namespace sgdml {

/// Draws `n_constraints` anchors uniformly with replacement; for each anchor i,
/// j is its Euclidean nearest neighbour within its class and k its nearest
/// neighbour outside it. Ties go to the lowest index.
///
/// Throws DegenerateLabels when fewer than two classes are present and
/// SingletonClass when a drawn anchor has no same-class partner.
std::vector<Triplet> generate_triplets(const Dataset& data, std::size_t n_constraints,
                                       std::uint64_t seed);

/// Random partition into ceil(fraction * n) training rows and the rest. Rows on
/// each side keep their original relative order. Throws BadFraction.
std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double train_fraction,
                                             std::uint64_t seed);

/// One `i,j,k` line per triplet.
void write_triplets_csv(std::ostream& out, const std::vector<Triplet>& triplets);

}  // namespace sgdml
