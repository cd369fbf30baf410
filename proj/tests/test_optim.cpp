#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sgdml/data.hpp"
#include "sgdml/optim.hpp"
#include "sgdml/triplets.hpp"

using namespace sgdml;
using fixture::expect_code;

namespace {

const Algorithm kAll[] = {Algorithm::FullSGD, Algorithm::MiniSGD, Algorithm::AsSGD, Algorithm::HrSGD,
                          Algorithm::HaSGD};

struct Problem {
  Dataset data;
  std::vector<Triplet> triplets;
};

Problem synthetic_problem(std::uint64_t seed, std::size_t n_triplets, int per_class = 40) {
  SyntheticSpec spec;
  spec.per_class = per_class;
  spec.seed = seed;
  Problem p;
  p.data = make_synthetic(spec);
  p.triplets = generate_triplets(p.data, n_triplets, seed + 100);
  return p;
}

TrainConfig config(Algorithm a, std::size_t n, std::size_t b = 10) {
  TrainConfig cfg;
  cfg.algorithm = a;
  cfg.n_constraints = n;
  cfg.batch_size = b;
  cfg.curve_stride = 100;
  return cfg;
}

void expect_same_run(const TrainReport& a, const TrainReport& b) {
  EXPECT_EQ(a.averaged_metric, b.averaged_metric);
  EXPECT_EQ(a.final_metric, b.final_metric);
  EXPECT_EQ(a.updates, b.updates);
  EXPECT_EQ(a.projections, b.projections);
  EXPECT_EQ(a.cumulative_loss, b.cumulative_loss);
  ASSERT_EQ(a.loss_curve.size(), b.loss_curve.size());
  for (std::size_t p = 0; p < a.loss_curve.size(); ++p) {
    EXPECT_EQ(a.loss_curve[p].constraints_seen, b.loss_curve[p].constraints_seen);
    EXPECT_EQ(a.loss_curve[p].mean_loss, b.loss_curve[p].mean_loss);
  }
}

bool in_domain(const Matrix& m, double radius) {
  return m.norm() <= radius * (1 + 1e-12) && oracle::min_eigenvalue(m) >= -1e-9 * m.norm() &&
         (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, m.norm());
}

}  // namespace

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.eta = 0;
  expect_code(ErrorCode::InvalidConfig, [&] { cfg.validate(); });
  cfg = TrainConfig{};
  cfg.radius = -1;
  expect_code(ErrorCode::InvalidRadius, [&] { cfg.validate(); });
  cfg = TrainConfig{};
  cfg.gamma_floor = 0;
  expect_code(ErrorCode::InvalidConfig, [&] { cfg.validate(); });
  cfg.gamma_floor = 1.5;
  expect_code(ErrorCode::InvalidConfig, [&] { cfg.validate(); });
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  expect_code(ErrorCode::InvalidConfig, [&] { cfg.validate(); });
}

TEST(TrainConfig, BatchForcedToOne) {
  TrainConfig cfg;
  cfg.batch_size = 25;
  cfg.algorithm = Algorithm::FullSGD;
  EXPECT_EQ(cfg.effective_batch_size(), 1u);
  cfg.algorithm = Algorithm::AsSGD;
  EXPECT_EQ(cfg.effective_batch_size(), 1u);
  cfg.algorithm = Algorithm::HrSGD;
  EXPECT_EQ(cfg.effective_batch_size(), 25u);
}

TEST(Algorithm, NamesRoundTrip) {
  for (Algorithm a : kAll) EXPECT_EQ(parse_algorithm(to_string(a)), a);
  EXPECT_FALSE(parse_algorithm("adam").has_value());
}

TEST(Train, RejectsMismatchedAlgorithm) {
  const Problem p = synthetic_problem(1, 50);
  expect_code(ErrorCode::InvalidConfig, [&] { run_full_sgd(config(Algorithm::MiniSGD, 50), p.triplets, p.data); });
  expect_code(ErrorCode::InvalidConfig, [&] { run_hybrid(config(Algorithm::AsSGD, 50), p.triplets, p.data); });
  expect_code(ErrorCode::InvalidConfig, [&] { train(config(Algorithm::MiniSGD, 51), p.triplets, p.data); });
}

TEST(Train, UpdateAccounting) {
  const Problem p = synthetic_problem(2, 2005);
  for (Algorithm a : kAll) {
    const TrainReport r = train(config(a, 2005, 10), p.triplets, p.data);
    EXPECT_EQ(r.updates, r.projections) << to_string(a);
    switch (a) {
      case Algorithm::FullSGD:
        EXPECT_EQ(r.updates, 2005u);
        EXPECT_EQ(r.constraints_consumed, 2005u);
        break;
      case Algorithm::MiniSGD:
        EXPECT_EQ(r.updates, 200u);
        EXPECT_EQ(r.dropped_constraints, 5u);
        EXPECT_EQ(r.constraints_consumed, 2000u);
        break;
      case Algorithm::AsSGD: EXPECT_LE(r.updates, 2005u); break;
      default: EXPECT_LE(r.updates + r.skipped_below_floor, 200u); EXPECT_EQ(r.dropped_constraints, 5u);
    }
  }
}

TEST(Train, ZeroConstraints) {
  const Problem p = synthetic_problem(3, 10);
  const Matrix identity = Matrix::Identity(p.data.dim(), p.data.dim());
  for (Algorithm a : kAll) {
    const TrainReport r = train(config(a, 0), p.triplets, p.data);
    EXPECT_EQ(r.updates, 0u);
    EXPECT_EQ(r.averaged_metric, identity);
    EXPECT_EQ(r.final_metric, identity);
    EXPECT_TRUE(r.loss_curve.empty());
  }
}

TEST(Train, SaturatedConstraintBarelyMoves) {
  const Dataset data = fixture::make_dataset({{0, 0}, {0.01, 0}, {50, 0}}, {0, 0, 1});
  const std::vector<Triplet> t = {{0, 1, 2}};
  const TrainReport r = run_full_sgd(config(Algorithm::FullSGD, 1), t, data);
  EXPECT_EQ(r.updates, 1u);
  EXPECT_LE((r.final_metric - Matrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(Train, MiniWithUnitBatchEqualsFullSgd) {
  const Problem p = synthetic_problem(4, 3000);
  const TrainReport full = run_full_sgd(config(Algorithm::FullSGD, 3000), p.triplets, p.data);
  const TrainReport mini = run_mini_sgd(config(Algorithm::MiniSGD, 3000, 1), p.triplets, p.data);
  expect_same_run(full, mini);
}

TEST(Train, FullSgdMatchesLoopOracle) {
  // Straight transcription of the projected update with explicit A_t.
  const Problem p = synthetic_problem(5, 300);
  TrainConfig cfg = config(Algorithm::FullSGD, 300);
  cfg.eta = 0.01;
  const LossKind kind = cfg.loss;
  const int d = static_cast<int>(p.data.dim());
  Matrix m = Matrix::Identity(d, d), sum = Matrix::Zero(d, d);
  for (std::size_t t = 0; t < 300; ++t) {
    sum += m;
    const Matrix a = oracle::constraint_matrix(p.data, p.triplets[t]);
    m = domain_project(m - cfg.eta * loss_deriv(kind, (m.array() * a.array()).sum()) * a, cfg.radius);
  }
  const TrainReport r = run_full_sgd(cfg, p.triplets, p.data);
  EXPECT_LE((r.final_metric - m).norm(), 1e-9 * m.norm());
  EXPECT_LE((r.averaged_metric - sum / 300.0).norm(), 1e-9 * m.norm());
}

TEST(Train, MiniSgdMatchesLoopOracle) {
  const Problem p = synthetic_problem(6, 400);
  TrainConfig cfg = config(Algorithm::MiniSGD, 400, 8);
  cfg.eta = 0.05;
  const int d = static_cast<int>(p.data.dim());
  Matrix m = Matrix::Identity(d, d), sum = Matrix::Zero(d, d);
  for (std::size_t t = 0; t < 50; ++t) {
    sum += m;
    Matrix g = Matrix::Zero(d, d);
    for (std::size_t s = 0; s < 8; ++s) {
      const Matrix a = oracle::constraint_matrix(p.data, p.triplets[t * 8 + s]);
      g += loss_deriv(cfg.loss, (m.array() * a.array()).sum()) * a;
    }
    m = domain_project(m - cfg.eta * g / 8.0, cfg.radius);
  }
  const TrainReport r = run_mini_sgd(cfg, p.triplets, p.data);
  EXPECT_LE((r.final_metric - m).norm(), 1e-9 * m.norm());
  EXPECT_LE((r.averaged_metric - sum / 50.0).norm(), 1e-9 * m.norm());
}

TEST(Train, ToyProblemDownweightsNoiseAxis) {
  // Classes differ along axis 0; axis 1 is large label-free noise.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int r = 0; r < 80; ++r) {
    const int label = r % 2;
    rows.push_back({2.0 * label + 0.3 * normal(rng), 3.0 * normal(rng)});
    labels.push_back(label);
  }
  const Dataset data = fixture::make_dataset(rows, labels);
  const auto triplets = generate_triplets(data, 5000, 3);
  TrainConfig cfg = config(Algorithm::FullSGD, 5000);
  cfg.eta = 0.01;
  const TrainReport r = run_full_sgd(cfg, triplets, data);
  EXPECT_GT(r.averaged_metric(0, 0), r.averaged_metric(1, 1));
}

TEST(Train, AsAllSaturatedNeverUpdates) {
  const Dataset data = fixture::make_dataset({{0, 0}, {0.01, 0}, {60, 0}, {60.01, 0}}, {0, 0, 1, 1});
  const auto triplets = generate_triplets(data, 500, 1);
  const TrainReport r = run_as_sgd(config(Algorithm::AsSGD, 500), triplets, data);
  EXPECT_EQ(r.updates, 0u);
  EXPECT_EQ(r.averaged_metric, Matrix(Matrix::Identity(2, 2)));
}

TEST(Train, AsWithAlwaysViolatedHingeIsSignGradientSgd) {
  Problem p = synthetic_problem(8, 200);
  p.data.features /= 100.0;  // every margin far below 1
  TrainConfig as = config(Algorithm::AsSGD, 200);
  as.loss = LossKind::hinge();
  as.eta = 1e-6;
  TrainConfig full = as;
  full.algorithm = Algorithm::FullSGD;
  const TrainReport a = run_as_sgd(as, p.triplets, p.data);
  ASSERT_EQ(a.updates, 200u);  // every margin stayed below 1
  expect_same_run(a, run_full_sgd(full, p.triplets, p.data));
}

TEST(Train, HrWithUnitBatchMatchesAsSamplingDecisions) {
  std::vector<double> derivs(1000);
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-1, 0);
  for (double& g : derivs) g = u(gen);
  Rng a(123), b(123);
  for (double g : derivs) {
    const SampleDecision as = adaptive_decision(g, a);
    const SampleDecision hr = random_member_decision(std::span(&g, 1), 1e-8, b);
    EXPECT_EQ(as.accept, hr.accept);
    EXPECT_EQ(as.gamma, hr.gamma);
  }
}

TEST(Train, HrWithUnitBatchAndHingeEqualsAs) {
  const Problem p = synthetic_problem(10, 3000);
  TrainConfig hr = config(Algorithm::HrSGD, 3000, 1);
  hr.loss = LossKind::hinge();
  TrainConfig as = hr;
  as.algorithm = Algorithm::AsSGD;
  expect_same_run(run_hybrid(hr, p.triplets, p.data), run_as_sgd(as, p.triplets, p.data));
}

TEST(Train, IteratesStayInDomain) {
  const Problem p = synthetic_problem(11, 4000);
  for (Algorithm a : kAll) {
    TrainConfig cfg = config(a, 4000, 5);
    cfg.radius = 3.0;
    cfg.curve_stride = 50;
    int checks = 0;
    const TrainReport r = train(cfg, p.triplets, p.data, [&](std::size_t, const MetricMatrix& m) {
      ++checks;
      EXPECT_TRUE(in_domain(m, cfg.radius)) << to_string(a);
    });
    EXPECT_GT(checks, 10);
    EXPECT_TRUE(in_domain(r.averaged_metric, cfg.radius)) << to_string(a);
    EXPECT_TRUE(in_domain(r.final_metric, cfg.radius)) << to_string(a);
  }
}

TEST(Train, Deterministic) {
  const Problem p = synthetic_problem(12, 3000);
  for (Algorithm a : kAll) {
    const TrainConfig cfg = config(a, 3000);
    expect_same_run(train(cfg, p.triplets, p.data), train(cfg, p.triplets, p.data));
  }
}

TEST(Train, SeedChangesAdaptiveSampling) {
  Problem p = synthetic_problem(13, 3000);
  p.data.features /= p.data.max_row_norm();  // derivatives away from 0 and -1
  TrainConfig a = config(Algorithm::AsSGD, 3000);
  TrainConfig b = a;
  b.seed = 99;
  EXPECT_NE(run_as_sgd(a, p.triplets, p.data).averaged_metric, run_as_sgd(b, p.triplets, p.data).averaged_metric);
}

TEST(Train, LossCurveIsRunningMean) {
  const Problem p = synthetic_problem(14, 1050);
  for (Algorithm a : kAll) {
    TrainConfig cfg = config(a, 1050, 10);
    cfg.curve_stride = 100;
    const TrainReport r = train(cfg, p.triplets, p.data);
    ASSERT_FALSE(r.loss_curve.empty());
    EXPECT_EQ(r.loss_curve.back().constraints_seen, r.constraints_consumed);
    EXPECT_NEAR(r.loss_curve.back().mean_loss, r.cumulative_loss / r.constraints_consumed, 1e-12);
    EXPECT_EQ(r.loss_curve.front().constraints_seen, 100u);
    EXPECT_EQ(r.loss_curve.size(), 11u);
  }
}

TEST(Train, HingeFloorOfOneSkipsEveryAcceptedDraw) {
  const Problem p = synthetic_problem(15, 1000);
  TrainConfig cfg = config(Algorithm::HrSGD, 1000, 10);
  cfg.loss = LossKind::hinge();
  cfg.gamma_floor = 1.0;
  const TrainReport r = run_hybrid(cfg, p.triplets, p.data);
  EXPECT_EQ(r.updates, 0u);
  EXPECT_GT(r.skipped_below_floor, 0u);
}

TEST(Train, DivergenceDetected) {
  const Problem p = synthetic_problem(16, 100);
  TrainConfig cfg = config(Algorithm::FullSGD, 100);
  cfg.loss = LossKind::hinge();
  cfg.eta = 1e308;
  cfg.radius = 1e308;
  expect_code(ErrorCode::NumericalDivergence, [&] { run_full_sgd(cfg, p.triplets, p.data); });
}

TEST(Train, HaDegenerateScale) {
  const Dataset data = fixture::make_dataset({{0, 0}, {0.01, 0}, {60, 0}, {60.01, 0}}, {0, 0, 1, 1});
  const auto triplets = generate_triplets(data, 100, 1);
  expect_code(ErrorCode::DegenerateScale, [&] { run_hybrid(config(Algorithm::HaSGD, 100), triplets, data); });
}

TEST(Train, UpdateBoundForAdaptiveSampling) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Problem p = synthetic_problem(20 + seed, 5000);
    TrainConfig cfg = config(Algorithm::AsSGD, 5000);
    cfg.seed = seed;
    const TrainReport r = run_as_sgd(cfg, p.triplets, p.data);
    const double m = std::ceil(std::log2(5000.0 * 5000.0));
    const double bound = 1.5 * 3.0 * r.cumulative_loss + 2.5 * std::log(m / 0.01);
    EXPECT_LE(static_cast<double>(r.updates), bound);
  }
}

TEST(EstimateW, SingleBatch) {
  const Problem p = synthetic_problem(30, 10);
  const LossKind kind = LossKind::smooth(3);
  const Matrix identity = Matrix::Identity(p.data.dim(), p.data.dim());
  const double expected = minibatch_gradient(identity, p.triplets, p.data, kind).norm();
  EXPECT_EQ(estimate_w(p.data, p.triplets, 10, 7, kind, 1), expected);
}

TEST(EstimateW, DuplicatedBatches) {
  const Problem p = synthetic_problem(31, 10);
  std::vector<Triplet> twice = p.triplets;
  twice.insert(twice.end(), p.triplets.begin(), p.triplets.end());
  const LossKind kind = LossKind::smooth(3);
  EXPECT_EQ(estimate_w(p.data, twice, 10, 20, kind, 2), estimate_w(p.data, p.triplets, 10, 1, kind, 2));
}

TEST(EstimateW, DominatesWarmupBatches) {
  const Problem p = synthetic_problem(32, 50);
  const LossKind kind = LossKind::smooth(3);
  const Matrix identity = Matrix::Identity(p.data.dim(), p.data.dim());
  const double w = estimate_w(p.data, p.triplets, 10, 100, kind, 3);
  double max_norm = 0;
  for (std::size_t b = 0; b < 5; ++b) {
    const double norm = minibatch_gradient(identity, std::span(p.triplets).subspan(b * 10, 10), p.data, kind).norm();
    EXPECT_GE(w, norm);
    max_norm = std::max(max_norm, norm);
  }
  EXPECT_EQ(w, max_norm);
}

TEST(EstimateW, Errors) {
  const Problem p = synthetic_problem(33, 5);
  expect_code(ErrorCode::DegenerateScale, [&] { estimate_w(p.data, p.triplets, 10, 3, LossKind::smooth(3), 1); });
}

TEST(SampleDecision, AverageGradientClipsAtOne) {
  Rng rng(1);
  for (int s = 0; s < 100; ++s) {
    const SampleDecision d = average_gradient_decision(5.0, 2.0, 1e-8, rng);
    EXPECT_TRUE(d.accept);
    EXPECT_EQ(d.gamma, 1.0);
    EXPECT_EQ(d.tau, 1.0);
  }
  expect_code(ErrorCode::DegenerateScale, [&] { average_gradient_decision(1.0, 0.0, 1e-8, rng); });
}

TEST(SampleDecision, ZeroDerivativeNeverAccepted) {
  Rng rng(2);
  for (int s = 0; s < 1000; ++s) EXPECT_FALSE(adaptive_decision(0.0, rng).accept);
  const std::vector<double> zeros(4, 0.0);
  for (int s = 0; s < 1000; ++s) EXPECT_FALSE(random_member_decision(zeros, 1e-8, rng).accept);
}

TEST(SampleDecision, AdaptiveUnbiased) {
  // E[Z tau] = deriv, so E[Z tau A] = deriv A.
  Rng rng(3);
  for (double g : {-0.9, -0.5, -0.05}) {
    const int n = 20000;
    double sum = 0, sum_sq = 0;
    for (int s = 0; s < n; ++s) {
      const SampleDecision d = adaptive_decision(g, rng);
      const double x = d.accept ? d.tau : 0.0;
      sum += x;
      sum_sq += x * x;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    EXPECT_LE(std::abs(mean - g), 3 * se + 1e-12);
  }
}

TEST(SampleDecision, RandomMemberUnbiased) {
  // E[Z tau] = 1 over both the member draw and the Bernoulli draw.
  Rng rng(4);
  const std::vector<double> derivs = {-0.9, -0.2, -0.6, -0.05};
  const int n = 20000;
  double sum = 0, sum_sq = 0;
  for (int s = 0; s < n; ++s) {
    const SampleDecision d = random_member_decision(derivs, 1e-8, rng);
    const double x = d.accept ? d.tau : 0.0;
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  EXPECT_LE(std::abs(mean - 1.0), 3 * std::sqrt((sum_sq / n - mean * mean) / n));
}

TEST(SampleDecision, AverageGradientUnbiased) {
  Rng rng(5);
  const int n = 20000;
  double sum = 0, sum_sq = 0;
  for (int s = 0; s < n; ++s) {
    const SampleDecision d = average_gradient_decision(0.3, 1.0, 1e-8, rng);
    const double x = d.accept ? d.tau : 0.0;
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  EXPECT_LE(std::abs(mean - 1.0), 3 * std::sqrt((sum_sq / n - mean * mean) / n));
}

TEST(Objective, MeanLoss) {
  const Problem p = synthetic_problem(40, 30);
  const Matrix identity = Matrix::Identity(p.data.dim(), p.data.dim());
  const LossKind kind = LossKind::smooth(3);
  EXPECT_NEAR(objective(identity, p.triplets, p.data, kind), minibatch_loss(identity, p.triplets, p.data, kind), 1e-12);
  EXPECT_EQ(objective(identity, {}, p.data, kind), 0.0);
}

TEST(Train, LargerBatchesAreNoMoreAccurate) {
  // Trend check in the regime where the step size respects the smoothness of
  // the loss: data scaled into the unit ball and eta below 1 / (3 L max ||A_t||^2).
  const std::size_t n = 20000;
  std::vector<double> final_loss(3, 0.0);
  const std::size_t batches[] = {1, 10, 100};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    Dataset data = make_synthetic(spec);
    data.features /= data.max_row_norm();
    const auto triplets = generate_triplets(data, n, seed + 7);
    double a_max = 0;
    for (const Triplet& t : triplets) a_max = std::max(a_max, oracle::constraint_matrix(data, t).norm());
    for (int v = 0; v < 3; ++v) {
      TrainConfig cfg = config(batches[v] == 1 ? Algorithm::FullSGD : Algorithm::MiniSGD, n, batches[v]);
      cfg.eta = 0.9 / (3.0 * 3.0 * a_max * a_max);
      final_loss[v] += train(cfg, triplets, data).loss_curve.back().mean_loss / 3.0;
    }
  }
  EXPECT_LE(final_loss[0], final_loss[1] * 1.01);
  EXPECT_LE(final_loss[1], final_loss[2] * 1.01);
}
