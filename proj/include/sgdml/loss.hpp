#pragma once

#include <span>
#include <vector>

#include "sgdml/dataset.hpp"
#include "sgdml/linalg.hpp"

namespace sgdml {

/// Either the smoothed hinge (1/L) log(1 + exp(-L (z - 1))) or the plain hinge
/// max(0, 1 - z).
class LossKind {
 public:
  enum class Type { Smooth, Hinge };

  /// Throws InvalidConfig unless smoothness > 0 and finite.
  static LossKind smooth(double smoothness);
  static LossKind hinge();

  Type type() const { return type_; }
  bool is_smooth() const { return type_ == Type::Smooth; }
  /// L for the smooth loss; 0 for the hinge.
  double smoothness() const { return smoothness_; }

  friend bool operator==(const LossKind&, const LossKind&) = default;

 private:
  LossKind(Type type, double smoothness) : type_(type), smoothness_(smoothness) {}

  Type type_;
  double smoothness_;
};

using TripletBatch = std::span<const Triplet>;

double loss_value(const LossKind& kind, double z);

/// Smooth: -1 / (1 + exp(L (z - 1))), strictly inside (-1, 0).
/// Hinge: -1 for z < 1, otherwise 0 (the subgradient at the kink is 0).
double loss_deriv(const LossKind& kind, double z);

/// |x_i - x_k|^2_M - |x_i - x_j|^2_M, i.e. <M, A_t> without forming A_t.
/// Throws BadTriplet for out-of-range indices, DimMismatch for a wrong-size M.
double triplet_margin(const MetricMatrix& m, const Triplet& t, const Dataset& data);

/// Mean per-triplet loss over the batch. Throws InvalidConfig on an empty batch.
double minibatch_loss(const MetricMatrix& m, TripletBatch batch, const Dataset& data,
                      const LossKind& kind);

/// (1/b) sum_s loss'(margin_s) A_s, symmetric by construction.
MetricMatrix minibatch_gradient(const MetricMatrix& m, TripletBatch batch, const Dataset& data,
                                const LossKind& kind);

/// Per-triplet quantities for one batch at one iterate; what the training
/// loops need from a single pass over the batch.
struct BatchEvaluation {
  std::vector<double> margins;
  std::vector<double> losses;
  std::vector<double> derivs;

  double loss_sum() const;
};

BatchEvaluation evaluate_batch(const MetricMatrix& m, TripletBatch batch, const Dataset& data,
                               const LossKind& kind);

/// sum_s coeffs[s] * A_s, accumulated in index order as symmetric rank-1 updates.
/// Entries with a zero coefficient are skipped.
MetricMatrix weighted_constraint_sum(TripletBatch batch, std::span<const double> coeffs,
                                     const Dataset& data);

}  // namespace sgdml
