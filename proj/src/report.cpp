#include "sgdml/report.hpp"

#include "sgdml/error.hpp"

namespace sgdml {

using nlohmann::json;

json metric_to_json(const MetricMatrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"dim", m.rows()}, {"data", std::move(data)}};
}

MetricMatrix metric_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("data") || !j["data"].is_array())
    throw Error(ErrorCode::InvalidConfig, "metric JSON needs 'dim' and 'data'");
  const auto d = j["dim"].get<Eigen::Index>();
  const json& data = j["data"];
  if (d < 0 || data.size() != static_cast<std::size_t>(d * d))
    throw Error(ErrorCode::InvalidConfig, "metric 'data' must hold dim * dim values");
  MetricMatrix m(d, d);
  std::size_t at = 0;
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = data[at++].get<double>();
  return m;
}

json config_to_json(const TrainConfig& cfg) {
  json loss = {{"kind", cfg.loss.is_smooth() ? "smooth" : "hinge"}};
  if (cfg.loss.is_smooth()) loss["L"] = cfg.loss.smoothness();
  return {
      {"algorithm", std::string(to_string(cfg.algorithm))},
      {"eta", cfg.eta},
      {"batch_size", cfg.batch_size},
      {"radius", cfg.radius},
      {"loss", std::move(loss)},
      {"n_constraints", cfg.n_constraints},
      {"seed", cfg.seed},
      {"warmup_batches", cfg.warmup_batches},
      {"gamma_floor", cfg.gamma_floor},
      {"curve_stride", cfg.curve_stride},
  };
}

json report_to_json(const TrainReport& report) {
  json curve = json::array();
  for (const LossPoint& p : report.loss_curve) curve.push_back(json::array({p.constraints_seen, p.mean_loss}));
  json out = {
      {"algorithm", std::string(to_string(report.algorithm))},
      {"config", config_to_json(report.config)},
      {"updates", report.updates},
      {"projections", report.projections},
      {"constraints_consumed", report.constraints_consumed},
      {"dropped_constraints", report.dropped_constraints},
      {"skipped_below_floor", report.skipped_below_floor},
      {"cumulative_loss", report.cumulative_loss},
      {"wall_time_ms", report.wall_time_ms},
      {"loss_curve", std::move(curve)},
      {"metric", metric_to_json(report.averaged_metric)},
  };
  if (report.algorithm == Algorithm::HaSGD) out["gradient_scale"] = report.gradient_scale;
  return out;
}

json eval_to_json(const EvalResult& result) {
  return {
      {"k", result.k},
      {"n_test", result.n_test},
      {"error_rate", result.error_rate},
      {"confusion", result.confusion},
  };
}

}  // namespace sgdml
