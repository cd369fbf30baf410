#include "sgdml/loss.hpp"

#include <cmath>
#include <numeric>

#include "sgdml/error.hpp"

namespace sgdml {

LossKind LossKind::smooth(double smoothness) {
  if (!(smoothness > 0.0) || !std::isfinite(smoothness))
    throw Error(ErrorCode::InvalidConfig, "smooth loss needs L > 0");
  return LossKind(Type::Smooth, smoothness);
}

LossKind LossKind::hinge() { return LossKind(Type::Hinge, 0.0); }

double loss_value(const LossKind& kind, double z) {
  if (!kind.is_smooth()) return std::max(0.0, 1.0 - z);
  const double L = kind.smoothness();
  // (1/L) softplus(u) with u = -L (z - 1), split so exp never overflows.
  const double u = -L * (z - 1.0);
  if (u > 0.0) return (u + std::log1p(std::exp(-u))) / L;
  return std::log1p(std::exp(u)) / L;
}

double loss_deriv(const LossKind& kind, double z) {
  if (!kind.is_smooth()) return z < 1.0 ? -1.0 : 0.0;
  const double v = kind.smoothness() * (z - 1.0);
  if (v >= 0.0) {
    const double e = std::exp(-v);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(v));
}

namespace {

void check_triplet(const MetricMatrix& m, const Triplet& t, const Dataset& data) {
  const std::size_t n = data.size();
  if (t.i >= n || t.j >= n || t.k >= n)
    throw Error(ErrorCode::BadTriplet, "triplet index out of range");
  if (m.rows() != data.dim() || m.cols() != data.dim())
    throw Error(ErrorCode::DimMismatch, "metric dimension does not match data");
}

void require_nonempty(TripletBatch batch) {
  if (batch.empty()) throw Error(ErrorCode::InvalidConfig, "empty triplet batch");
}

}  // namespace

double triplet_margin(const MetricMatrix& m, const Triplet& t, const Dataset& data) {
  check_triplet(m, t, data);
  const Vector far = data.point(t.i) - data.point(t.k);
  const Vector near = data.point(t.i) - data.point(t.j);
  return far.dot(m * far) - near.dot(m * near);
}

double BatchEvaluation::loss_sum() const {
  return std::accumulate(losses.begin(), losses.end(), 0.0);
}

BatchEvaluation evaluate_batch(const MetricMatrix& m, TripletBatch batch, const Dataset& data,
                               const LossKind& kind) {
  BatchEvaluation out;
  out.margins.reserve(batch.size());
  out.losses.reserve(batch.size());
  out.derivs.reserve(batch.size());
  for (const Triplet& t : batch) {
    const double z = triplet_margin(m, t, data);
    out.margins.push_back(z);
    out.losses.push_back(loss_value(kind, z));
    out.derivs.push_back(loss_deriv(kind, z));
  }
  return out;
}

MetricMatrix weighted_constraint_sum(TripletBatch batch, std::span<const double> coeffs,
                                     const Dataset& data) {
  if (coeffs.size() != batch.size())
    throw Error(ErrorCode::InvalidConfig, "coefficient count does not match batch");
  const Eigen::Index d = data.dim();
  MetricMatrix sum = MetricMatrix::Zero(d, d);
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const Triplet& t = batch[s];
    check_triplet(sum, t, data);
    const double c = coeffs[s];
    if (c == 0.0) continue;
    const Vector far = data.point(t.i) - data.point(t.k);
    const Vector near = data.point(t.i) - data.point(t.j);
    sum.selfadjointView<Eigen::Lower>().rankUpdate(far, c);
    sum.selfadjointView<Eigen::Lower>().rankUpdate(near, -c);
  }
  sum.triangularView<Eigen::StrictlyUpper>() = sum.transpose();
  return sum;
}

double minibatch_loss(const MetricMatrix& m, TripletBatch batch, const Dataset& data,
                      const LossKind& kind) {
  require_nonempty(batch);
  return evaluate_batch(m, batch, data, kind).loss_sum() / static_cast<double>(batch.size());
}

MetricMatrix minibatch_gradient(const MetricMatrix& m, TripletBatch batch, const Dataset& data,
                                const LossKind& kind) {
  require_nonempty(batch);
  const BatchEvaluation eval = evaluate_batch(m, batch, data, kind);
  MetricMatrix grad = weighted_constraint_sum(batch, eval.derivs, data);
  grad *= 1.0 / static_cast<double>(batch.size());
  return grad;
}

}  // namespace sgdml
