#include "sgdml/optim.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <string>

#include "sgdml/error.hpp"

namespace sgdml {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::FullSGD: return "sgd";
    case Algorithm::MiniSGD: return "mini";
    case Algorithm::AsSGD: return "as";
    case Algorithm::HrSGD: return "hr";
    case Algorithm::HaSGD: return "ha";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::FullSGD, Algorithm::MiniSGD, Algorithm::AsSGD, Algorithm::HrSGD,
                      Algorithm::HaSGD}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::size_t TrainConfig::effective_batch_size() const {
  if (algorithm == Algorithm::FullSGD || algorithm == Algorithm::AsSGD) return 1;
  return batch_size;
}

void TrainConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(ErrorCode::InvalidConfig, "eta must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw Error(ErrorCode::InvalidRadius, "radius must be positive and finite");
  if (batch_size == 0) throw Error(ErrorCode::InvalidConfig, "batch size must be positive");
  if (curve_stride == 0) throw Error(ErrorCode::InvalidConfig, "curve stride must be positive");
  if (warmup_batches == 0) throw Error(ErrorCode::InvalidConfig, "warmup batches must be positive");
  if (!(gamma_floor > 0.0 && gamma_floor <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "gamma floor must lie in (0, 1]");
}

SampleDecision adaptive_decision(double deriv, Rng& rng) {
  SampleDecision d;
  d.gamma = std::abs(deriv);
  d.accept = bernoulli(rng, d.gamma);
  d.tau = deriv < 0.0 ? -1.0 : (deriv > 0.0 ? 1.0 : 0.0);
  return d;
}

SampleDecision random_member_decision(std::span<const double> derivs, double gamma_floor,
                                      Rng& rng) {
  if (derivs.empty()) throw Error(ErrorCode::InvalidConfig, "empty triplet batch");
  SampleDecision d;
  const std::size_t member = uniform_index(rng, derivs.size());
  d.gamma = std::abs(derivs[member]);
  d.accept = bernoulli(rng, d.gamma);
  d.tau = d.gamma > gamma_floor ? 1.0 / d.gamma : 0.0;
  return d;
}

SampleDecision average_gradient_decision(double gradient_norm, double scale, double gamma_floor,
                                         Rng& rng) {
  if (!(scale > 0.0)) throw Error(ErrorCode::DegenerateScale, "gradient scale must be positive");
  SampleDecision d;
  d.gamma = std::min(1.0, std::max(gradient_norm, 0.0) / scale);
  d.accept = bernoulli(rng, d.gamma);
  d.tau = d.gamma > gamma_floor ? 1.0 / d.gamma : 0.0;
  return d;
}

double objective(const MetricMatrix& metric, std::span<const Triplet> triplets,
                 const Dataset& data, const LossKind& loss) {
  if (triplets.empty()) return 0.0;
  return evaluate_batch(metric, triplets, data, loss).loss_sum() /
         static_cast<double>(triplets.size());
}

double estimate_w(const Dataset& data, std::span<const Triplet> triplets, std::size_t batch_size,
                  std::size_t warmup_batches, const LossKind& loss, std::uint64_t seed) {
  if (batch_size == 0 || warmup_batches == 0)
    throw Error(ErrorCode::InvalidConfig, "batch size and warmup batches must be positive");
  const std::size_t batches = triplets.size() / batch_size;
  if (batches == 0) throw Error(ErrorCode::DegenerateScale, "no whole batch to estimate W from");

  const MetricMatrix identity = MetricMatrix::Identity(data.dim(), data.dim());
  std::map<std::size_t, double> norms;
  Rng rng(seed);
  double w = 0.0;
  for (std::size_t draw = 0; draw < warmup_batches; ++draw) {
    const std::size_t index = uniform_index(rng, batches);
    auto it = norms.find(index);
    if (it == norms.end()) {
      const double norm =
          minibatch_gradient(identity, triplets.subspan(index * batch_size, batch_size), data, loss)
              .norm();
      it = norms.emplace(index, norm).first;
    }
    w = std::max(w, it->second);
  }
  if (!(w > 0.0) || !std::isfinite(w))
    throw Error(ErrorCode::DegenerateScale, "warm-up gradients are all zero");
  return w;
}

namespace {

// Bookkeeping shared by all loops: current iterate, running average of the
// pre-update iterates, loss accounting and the sampled loss curve.
class RunState {
 public:
  RunState(const TrainConfig& cfg, const Dataset& data, const IterateObserver& observer)
      : cfg_(cfg),
        observer_(observer),
        start_(std::chrono::steady_clock::now()),
        metric_(MetricMatrix::Identity(data.dim(), data.dim())),
        sum_(MetricMatrix::Zero(data.dim(), data.dim())) {
    report_.algorithm = cfg.algorithm;
    report_.config = cfg;
    report_.config.batch_size = cfg.effective_batch_size();
    next_mark_ = cfg.curve_stride;
  }

  const MetricMatrix& metric() const { return metric_; }
  TrainReport& report() { return report_; }

  // Called once per step with the losses the current iterate incurred on
  // the step's constraints.
  void visit(const BatchEvaluation& eval) {
    ++pending_;
    ++steps_;
    for (double loss : eval.losses) {
      if (!std::isfinite(loss))
        throw Error(ErrorCode::NumericalDivergence,
                    "non-finite loss at constraint " + std::to_string(seen_));
      report_.cumulative_loss += loss;
      ++seen_;
    }
  }

  void step(const MetricMatrix& direction, double scale) {
    MetricMatrix next = metric_ - scale * direction;
    if (!next.allFinite())
      throw Error(ErrorCode::NumericalDivergence,
                  "non-finite iterate after constraint " + std::to_string(seen_));
    next = domain_project(next, cfg_.radius);
    sum_ += static_cast<double>(pending_) * metric_;
    pending_ = 0;
    metric_ = std::move(next);
    ++report_.updates;
    ++report_.projections;
  }

  void end_step() {
    if (seen_ >= next_mark_) {
      record();
      while (next_mark_ <= seen_) next_mark_ += cfg_.curve_stride;
    }
  }

  TrainReport finish(std::size_t dropped) {
    if (seen_ > 0 && (report_.loss_curve.empty() || report_.loss_curve.back().constraints_seen != seen_))
      record();
    sum_ += static_cast<double>(pending_) * metric_;
    report_.averaged_metric =
        steps_ > 0 ? MetricMatrix(sum_ / static_cast<double>(steps_)) : metric_;
    report_.final_metric = metric_;
    report_.constraints_consumed = seen_;
    report_.dropped_constraints = dropped;
    report_.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start_)
                               .count();
    return std::move(report_);
  }

 private:
  void record() {
    report_.loss_curve.push_back({seen_, report_.cumulative_loss / static_cast<double>(seen_)});
    if (observer_) observer_(seen_, metric_);
  }

  const TrainConfig& cfg_;
  const IterateObserver& observer_;
  std::chrono::steady_clock::time_point start_;
  MetricMatrix metric_;
  MetricMatrix sum_;
  std::size_t pending_ = 0;
  std::size_t steps_ = 0;
  std::size_t seen_ = 0;
  std::size_t next_mark_ = 0;
  TrainReport report_;
};

std::span<const Triplet> prepare(const TrainConfig& cfg, std::span<const Triplet> triplets,
                                 const Dataset& data, std::initializer_list<Algorithm> allowed) {
  cfg.validate();
  bool ok = false;
  for (Algorithm a : allowed) ok = ok || a == cfg.algorithm;
  if (!ok)
    throw Error(ErrorCode::InvalidConfig,
                "algorithm '" + std::string(to_string(cfg.algorithm)) + "' does not match this loop");
  if (triplets.size() < cfg.n_constraints)
    throw Error(ErrorCode::InvalidConfig, "fewer triplets supplied than n_constraints");
  if (data.dim() == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no features");
  return triplets.first(cfg.n_constraints);
}

// Projected gradient steps on consecutive batches; b = 1 is plain SGD.
TrainReport run_gradient_batches(const TrainConfig& cfg, std::span<const Triplet> stream,
                                 const Dataset& data, const IterateObserver& observer) {
  const std::size_t b = cfg.effective_batch_size();
  const std::size_t batches = stream.size() / b;
  const double inv_b = 1.0 / static_cast<double>(b);
  RunState state(cfg, data, observer);
  for (std::size_t t = 0; t < batches; ++t) {
    const TripletBatch batch = stream.subspan(t * b, b);
    const BatchEvaluation eval = evaluate_batch(state.metric(), batch, data, cfg.loss);
    state.visit(eval);
    MetricMatrix grad = weighted_constraint_sum(batch, eval.derivs, data);
    grad *= inv_b;
    state.step(grad, cfg.eta);
    state.end_step();
  }
  return state.finish(stream.size() - batches * b);
}

}  // namespace

TrainReport run_full_sgd(const TrainConfig& cfg, std::span<const Triplet> triplets,
                         const Dataset& data, const IterateObserver& observer) {
  const auto stream = prepare(cfg, triplets, data, {Algorithm::FullSGD});
  return run_gradient_batches(cfg, stream, data, observer);
}

TrainReport run_mini_sgd(const TrainConfig& cfg, std::span<const Triplet> triplets,
                         const Dataset& data, const IterateObserver& observer) {
  const auto stream = prepare(cfg, triplets, data, {Algorithm::MiniSGD});
  return run_gradient_batches(cfg, stream, data, observer);
}

TrainReport run_as_sgd(const TrainConfig& cfg, std::span<const Triplet> triplets,
                       const Dataset& data, const IterateObserver& observer) {
  const auto stream = prepare(cfg, triplets, data, {Algorithm::AsSGD});
  Rng rng(derive_seed(cfg.seed, kOptimizerStream));
  RunState state(cfg, data, observer);
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const TripletBatch one = stream.subspan(t, 1);
    const BatchEvaluation eval = evaluate_batch(state.metric(), one, data, cfg.loss);
    state.visit(eval);
    const SampleDecision decision = adaptive_decision(eval.derivs[0], rng);
    if (decision.accept) {
      const double tau = decision.tau;
      state.step(weighted_constraint_sum(one, std::span<const double>(&tau, 1), data), cfg.eta);
    }
    state.end_step();
  }
  return state.finish(0);
}

TrainReport run_hybrid(const TrainConfig& cfg, std::span<const Triplet> triplets,
                       const Dataset& data, const IterateObserver& observer) {
  const auto stream = prepare(cfg, triplets, data, {Algorithm::HrSGD, Algorithm::HaSGD});
  const bool average = cfg.algorithm == Algorithm::HaSGD;
  const std::size_t b = cfg.batch_size;
  const std::size_t batches = stream.size() / b;
  const double inv_b = 1.0 / static_cast<double>(b);

  double scale = 0.0;
  if (average && batches > 0)
    scale = estimate_w(data, stream.first(batches * b), b, cfg.warmup_batches, cfg.loss,
                       derive_seed(cfg.seed, kWarmupStream));

  Rng rng(derive_seed(cfg.seed, kOptimizerStream));
  RunState state(cfg, data, observer);
  state.report().gradient_scale = scale;
  for (std::size_t t = 0; t < batches; ++t) {
    const TripletBatch batch = stream.subspan(t * b, b);
    const BatchEvaluation eval = evaluate_batch(state.metric(), batch, data, cfg.loss);
    state.visit(eval);

    MetricMatrix grad;
    SampleDecision decision;
    if (average) {
      grad = weighted_constraint_sum(batch, eval.derivs, data);
      grad *= inv_b;
      decision = average_gradient_decision(grad.norm(), scale, cfg.gamma_floor, rng);
    } else {
      decision = random_member_decision(eval.derivs, cfg.gamma_floor, rng);
    }

    if (decision.accept) {
      if (decision.tau == 0.0) {
        ++state.report().skipped_below_floor;
      } else {
        if (!average) {
          grad = weighted_constraint_sum(batch, eval.derivs, data);
          grad *= inv_b;
        }
        state.step(grad, cfg.eta * decision.tau);
      }
    }
    state.end_step();
  }
  return state.finish(stream.size() - batches * b);
}

TrainReport train(const TrainConfig& cfg, std::span<const Triplet> triplets, const Dataset& data,
                  const IterateObserver& observer) {
  switch (cfg.algorithm) {
    case Algorithm::FullSGD: return run_full_sgd(cfg, triplets, data, observer);
    case Algorithm::MiniSGD: return run_mini_sgd(cfg, triplets, data, observer);
    case Algorithm::AsSGD: return run_as_sgd(cfg, triplets, data, observer);
    case Algorithm::HrSGD:
    case Algorithm::HaSGD: return run_hybrid(cfg, triplets, data, observer);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown algorithm");
}

}  // namespace sgdml
