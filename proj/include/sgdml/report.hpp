#pragma once

#include <json.hpp>

#include "sgdml/eval.hpp"
#include "sgdml/linalg.hpp"
#include "sgdml/optim.hpp"

namespace sgdml {

nlohmann::json metric_to_json(const MetricMatrix& m);
/// Accepts {"dim": d, "data": [row-major d*d values]}. Throws InvalidConfig.
MetricMatrix metric_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const TrainConfig& cfg);
nlohmann::json report_to_json(const TrainReport& report);
nlohmann::json eval_to_json(const EvalResult& result);

}  // namespace sgdml
