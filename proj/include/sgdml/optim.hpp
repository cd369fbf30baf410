#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sgdml/dataset.hpp"
#include "sgdml/linalg.hpp"
#include "sgdml/loss.hpp"
#include "sgdml/random.hpp"

namespace sgdml {

enum class Algorithm { FullSGD, MiniSGD, AsSGD, HrSGD, HaSGD };

/// Short CLI names: sgd, mini, as, hr, ha.
std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct TrainConfig {
  Algorithm algorithm = Algorithm::MiniSGD;
  double eta = 1.0;
  std::size_t batch_size = 10;
  double radius = 1000.0;
  LossKind loss = LossKind::smooth(3.0);
  std::size_t n_constraints = 100000;
  std::uint64_t seed = 0;
  std::size_t warmup_batches = 100;
  double gamma_floor = 1e-8;
  std::size_t curve_stride = 1000;

  /// FullSGD and AsSGD always work on single constraints.
  std::size_t effective_batch_size() const;

  /// Throws InvalidConfig / InvalidRadius.
  void validate() const;
};

struct LossPoint {
  std::size_t constraints_seen = 0;
  double mean_loss = 0.0;
};

struct TrainReport {
  Algorithm algorithm = Algorithm::MiniSGD;
  TrainConfig config;
  MetricMatrix averaged_metric;
  MetricMatrix final_metric;
  std::size_t updates = 0;
  std::size_t projections = 0;
  std::size_t constraints_consumed = 0;
  // Trailing constraints that do not fill a whole batch.
  std::size_t dropped_constraints = 0;
  // Hybrid batches accepted by the Bernoulli draw but skipped because
  // gamma <= gamma_floor. Not counted in `updates`.
  std::size_t skipped_below_floor = 0;
  // Sum over consumed constraints of the loss at the iterate that saw them.
  double cumulative_loss = 0.0;
  // HA only: the warm-up estimate of max_t ||grad_t||_F.
  double gradient_scale = 0.0;
  // Running mean of per-constraint loss, sampled every curve_stride constraints.
  std::vector<LossPoint> loss_curve;
  std::int64_t wall_time_ms = 0;
};

/// Called with (constraints_seen, current iterate) at every loss-curve sample.
using IterateObserver = std::function<void(std::size_t, const MetricMatrix&)>;

// The loops consume the first cfg.n_constraints entries of `triplets` and throw
// InvalidConfig when fewer are supplied or when cfg.algorithm does not match.
// All start from the identity and throw NumericalDivergence on a non-finite loss.

TrainReport run_full_sgd(const TrainConfig& cfg, std::span<const Triplet> triplets,
                         const Dataset& data, const IterateObserver& observer = {});
TrainReport run_mini_sgd(const TrainConfig& cfg, std::span<const Triplet> triplets,
                         const Dataset& data, const IterateObserver& observer = {});
TrainReport run_as_sgd(const TrainConfig& cfg, std::span<const Triplet> triplets,
                       const Dataset& data, const IterateObserver& observer = {});
TrainReport run_hybrid(const TrainConfig& cfg, std::span<const Triplet> triplets,
                       const Dataset& data, const IterateObserver& observer = {});

/// Dispatches on cfg.algorithm.
TrainReport train(const TrainConfig& cfg, std::span<const Triplet> triplets, const Dataset& data,
                  const IterateObserver& observer = {});

/// max over `warmup_batches` batch indices drawn uniformly (with replacement)
/// from the consecutive batches of `triplets`, of ||grad of the batch loss at
/// the identity||_F. Throws DegenerateScale when the maximum is 0 or there is
/// no whole batch.
double estimate_w(const Dataset& data, std::span<const Triplet> triplets, std::size_t batch_size,
                  std::size_t warmup_batches, const LossKind& loss, std::uint64_t seed);

/// Mean loss of `metric` over `triplets` (the training objective).
double objective(const MetricMatrix& metric, std::span<const Triplet> triplets,
                 const Dataset& data, const LossKind& loss);

// Sampling decisions of the adaptive variants. The training loops use exactly
// these, so they can be exercised on a frozen metric.

struct SampleDecision {
  bool accept = false;  // Z_t
  double gamma = 0.0;   // Pr(Z_t = 1)
  double tau = 0.0;     // step weight applied when accepted
};

/// gamma = |deriv|, tau = sign(deriv). One uniform draw.
SampleDecision adaptive_decision(double deriv, Rng& rng);

/// Picks one member uniformly (index draw first, then the Bernoulli draw):
/// gamma = |derivs[s']|, tau = 1 / gamma. Accepted draws with gamma <= floor
/// come back with accept = true and tau = 0.
SampleDecision random_member_decision(std::span<const double> derivs, double gamma_floor,
                                      Rng& rng);

/// gamma = min(1, gradient_norm / scale), tau = 1 / gamma. One uniform draw.
SampleDecision average_gradient_decision(double gradient_norm, double scale, double gamma_floor,
                                         Rng& rng);

}  // namespace sgdml
