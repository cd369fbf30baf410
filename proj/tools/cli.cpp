#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <set>
#include <sstream>

#include "sgdml/data.hpp"
#include "sgdml/error.hpp"
#include "sgdml/eval.hpp"
#include "sgdml/optim.hpp"
#include "sgdml/random.hpp"
#include "sgdml/report.hpp"
#include "sgdml/triplets.hpp"

namespace sgdml::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json error_object(std::string_view code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

// Where the data comes from and how it is preprocessed. Without a training
// file the standard synthetic recipe is generated instead.
struct DataOptions {
  std::string train_path;
  std::string test_path;
  double split = 0.7;
  bool standardize = false;
  int pca = 0;  // 0 = off
  SyntheticSpec synthetic;
};

struct PreparedData {
  Dataset train;
  Dataset test;
  json description;
};

bool parse_on_off(const std::string& value, const std::string& flag) {
  if (value == "on") return true;
  if (value == "off") return false;
  throw UsageError(flag + " expects on|off, got '" + value + "'");
}

int parse_pca(const std::string& value) {
  if (value == "off") return 0;
  try {
    std::size_t used = 0;
    const int p = std::stoi(value, &used);
    if (used == value.size() && p > 0) return p;
  } catch (const std::exception&) {
  }
  throw UsageError("--pca expects a positive integer or 'off', got '" + value + "'");
}

PreparedData prepare_data(const DataOptions& opts, std::uint64_t seed) {
  PreparedData prepared;
  json desc;
  Dataset full;
  if (opts.train_path.empty()) {
    SyntheticSpec spec = opts.synthetic;
    spec.seed = derive_seed(seed, kSyntheticStream);
    full = make_synthetic(spec);
    desc["source"] = {{"synthetic",
                       {{"classes", spec.classes},
                        {"dim", spec.dim},
                        {"per_class", spec.per_class},
                        {"noise_dims", spec.noise_dims},
                        {"separation", spec.separation},
                        {"noise_std", spec.noise_std}}}};
  } else {
    full = read_libsvm(std::filesystem::path(opts.train_path));
    desc["source"] = {{"train", opts.train_path}};
  }

  if (!opts.test_path.empty()) {
    prepared.train = std::move(full);
    prepared.test = read_libsvm(std::filesystem::path(opts.test_path));
    align_datasets(prepared.train, prepared.test);
    desc["source"]["test"] = opts.test_path;
  } else {
    auto [train, test] = split_train_test(full, opts.split, derive_seed(seed, kSplitStream));
    prepared.train = std::move(train);
    prepared.test = std::move(test);
    desc["split"] = opts.split;
  }

  if (opts.standardize) {
    const Standardizer s = fit_standardizer(prepared.train);
    prepared.train = apply_standardizer(s, prepared.train);
    prepared.test = apply_standardizer(s, prepared.test);
  }
  if (opts.pca > 0) {
    const PcaModel model = pca_fit(prepared.train, opts.pca);
    prepared.train = pca_transform(model, prepared.train);
    prepared.test = pca_transform(model, prepared.test);
  }
  desc["standardize"] = opts.standardize;
  desc["pca"] = opts.pca > 0 ? json(opts.pca) : json("off");
  desc["n_train"] = prepared.train.size();
  desc["n_test"] = prepared.test.size();
  desc["dim"] = prepared.train.dim();
  desc["classes"] = prepared.train.class_count;
  prepared.description = std::move(desc);
  return prepared;
}

// Flag-level values shared by `train` and bench runs.
struct TrainFlags {
  std::string algo = "mini";
  double eta = 1.0;
  std::size_t batch = 10;
  double radius = 1000.0;
  std::string loss = "smooth";
  double smoothness = 3.0;
  std::size_t triplets = 100000;
  std::size_t warmup = 100;
  double gamma_floor = 1e-8;
  std::size_t curve_stride = 1000;
};

TrainConfig make_config(const TrainFlags& flags, std::uint64_t seed) {
  TrainConfig cfg;
  const auto algorithm = parse_algorithm(flags.algo);
  if (!algorithm) throw UsageError("--algo expects sgd|mini|as|hr|ha, got '" + flags.algo + "'");
  cfg.algorithm = *algorithm;
  cfg.eta = flags.eta;
  cfg.batch_size = flags.batch;
  cfg.radius = flags.radius;
  try {
    if (flags.loss == "smooth") {
      cfg.loss = LossKind::smooth(flags.smoothness);
    } else if (flags.loss == "hinge") {
      cfg.loss = LossKind::hinge();
    } else {
      throw UsageError("--loss expects smooth|hinge, got '" + flags.loss + "'");
    }
    cfg.n_constraints = flags.triplets;
    cfg.seed = seed;
    cfg.warmup_batches = flags.warmup;
    cfg.gamma_floor = flags.gamma_floor;
    cfg.curve_stride = flags.curve_stride;
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path);
  if (!file) throw Error(ErrorCode::IoError, "cannot write " + path);
  file << text;
  if (!file) throw Error(ErrorCode::IoError, "write failed for " + path);
}

double final_running_loss(const TrainReport& report) {
  return report.loss_curve.empty() ? 0.0 : report.loss_curve.back().mean_loss;
}

void add_data_options(CLI::App& cmd, DataOptions& data, std::string& standardize, std::string& pca) {
  cmd.add_option("--train", data.train_path, "Training data (LIBSVM); synthetic when omitted");
  cmd.add_option("--test", data.test_path, "Test data (LIBSVM); otherwise --split is used");
  cmd.add_option("--split", data.split, "Training fraction when no --test is given");
  cmd.add_option("--standardize", standardize, "Per-feature standardisation: on|off");
  cmd.add_option("--pca", pca, "Reduce to this many principal components, or 'off'");
  cmd.add_option("--classes", data.synthetic.classes, "Synthetic: number of classes");
  cmd.add_option("--dim", data.synthetic.dim, "Synthetic: dimension");
  cmd.add_option("--per-class", data.synthetic.per_class, "Synthetic: points per class");
  cmd.add_option("--noise-dims", data.synthetic.noise_dims, "Synthetic: label-independent dims");
  cmd.add_option("--separation", data.synthetic.separation, "Synthetic: class mean offset");
  cmd.add_option("--noise-std", data.synthetic.noise_std, "Synthetic: std of noise dims");
}

// ---------------------------------------------------------------- train

int cmd_train(const TrainFlags& flags, const DataOptions& data_opts, std::uint64_t seed, int k,
              const std::string& out_path, std::ostream& out) {
  const TrainConfig cfg = make_config(flags, seed);
  if (k <= 0) throw UsageError("--k must be positive");

  const PreparedData data = prepare_data(data_opts, seed);
  const std::vector<Triplet> triplets =
      generate_triplets(data.train, cfg.n_constraints, derive_seed(seed, kTripletStream));
  const TrainReport report = train(cfg, triplets, data.train);

  const MetricMatrix identity = MetricMatrix::Identity(data.train.dim(), data.train.dim());
  json doc = report_to_json(report);
  doc["data"] = data.description;
  doc["train_loss"] = final_running_loss(report);
  doc["averaged_objective"] = objective(report.averaged_metric, triplets, data.train, cfg.loss);
  doc["evaluation"] = eval_to_json(classification_error(report.averaged_metric, data.train, data.test, k));
  doc["euclidean_evaluation"] = eval_to_json(classification_error(identity, data.train, data.test, k));

  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    write_text(out_path, text);
    out << to_string(report.algorithm) << ": updates " << report.updates << ", error "
        << doc["evaluation"]["error_rate"].get<double>() << ", wall " << report.wall_time_ms
        << " ms -> " << out_path << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const std::string& metric_path, const DataOptions& data_opts, std::uint64_t seed, int k,
             const std::string& out_path, std::ostream& out) {
  if (k <= 0) throw UsageError("--k must be positive");
  std::ifstream file(metric_path);
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + metric_path);
  json doc;
  try {
    doc = json::parse(file);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, metric_path + ": " + e.what());
  }
  const MetricMatrix metric = metric_from_json(doc.contains("metric") ? doc["metric"] : doc);
  const PreparedData data = prepare_data(data_opts, seed);
  json result = eval_to_json(classification_error(metric, data.train, data.test, k));
  result["data"] = data.description;
  const std::string text = result.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    write_text(out_path, text);
  }
  return kOk;
}

// ---------------------------------------------------------------- gen

int cmd_gen(const SyntheticSpec& spec, const std::string& out_path, std::ostream& out) {
  Dataset data;
  try {
    data = make_synthetic(spec);
  } catch (const Error& e) {
    throw UsageError(std::string(to_string(e.code())) + ": " + e.what());
  }
  if (out_path.empty()) {
    write_libsvm(data, out);
  } else {
    write_libsvm(data, std::filesystem::path(out_path));
  }
  return kOk;
}

// ---------------------------------------------------------------- bench

struct BenchSpec {
  DataOptions data;
  std::uint64_t seed = 0;
  int k = 3;
  std::size_t triplets = 100000;
  std::string out;
  TrainFlags defaults;
  std::vector<json> runs;
};

template <typename T>
void read_field(const json& obj, const char* key, T& value) {
  if (!obj.contains(key)) return;
  try {
    value = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("bench spec field '") + key + "' has the wrong type");
  }
}

void read_train_fields(const json& obj, TrainFlags& flags) {
  read_field(obj, "algo", flags.algo);
  read_field(obj, "eta", flags.eta);
  read_field(obj, "batch", flags.batch);
  read_field(obj, "radius", flags.radius);
  read_field(obj, "loss", flags.loss);
  read_field(obj, "L", flags.smoothness);
  read_field(obj, "warmup", flags.warmup);
  read_field(obj, "gamma_floor", flags.gamma_floor);
  read_field(obj, "curve_stride", flags.curve_stride);
}

const std::set<std::string> kRunKeys = {"name",  "algo", "eta",    "batch",       "radius",
                                        "loss",  "L",    "warmup", "gamma_floor", "curve_stride"};
const std::set<std::string> kSpecKeys = {
    "train", "test",  "split", "standardize", "pca",          "synthetic", "seed", "k",
    "triplets", "out", "runs", "eta",         "batch",        "radius",    "loss", "L",
    "warmup", "gamma_floor", "curve_stride"};

BenchSpec parse_bench_spec(const json& j) {
  if (!j.is_object()) throw UsageError("bench spec must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kSpecKeys.contains(key)) throw UsageError("unknown bench spec field '" + key + "'");
  }
  BenchSpec spec;
  read_field(j, "train", spec.data.train_path);
  read_field(j, "test", spec.data.test_path);
  read_field(j, "split", spec.data.split);
  read_field(j, "standardize", spec.data.standardize);
  read_field(j, "pca", spec.data.pca);
  if (j.contains("synthetic")) {
    const json& s = j["synthetic"];
    read_field(s, "classes", spec.data.synthetic.classes);
    read_field(s, "dim", spec.data.synthetic.dim);
    read_field(s, "per_class", spec.data.synthetic.per_class);
    read_field(s, "noise_dims", spec.data.synthetic.noise_dims);
    read_field(s, "separation", spec.data.synthetic.separation);
    read_field(s, "noise_std", spec.data.synthetic.noise_std);
  }
  read_field(j, "seed", spec.seed);
  read_field(j, "k", spec.k);
  read_field(j, "triplets", spec.triplets);
  read_field(j, "out", spec.out);
  read_train_fields(j, spec.defaults);
  if (!j.contains("runs") || !j["runs"].is_array() || j["runs"].empty())
    throw UsageError("bench spec needs a non-empty 'runs' array");
  for (const json& run : j["runs"]) {
    if (!run.is_object()) throw UsageError("each run must be a JSON object");
    for (const auto& [key, value] : run.items()) {
      if (!kRunKeys.contains(key))
        throw UsageError("run field '" + key + "' is not allowed (triplet stream is shared)");
    }
    spec.runs.push_back(run);
  }
  if (spec.k <= 0) throw UsageError("k must be positive");
  if (spec.data.pca < 0) throw UsageError("pca must be >= 0");
  return spec;
}

std::string fixed(double value, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << value;
  return s.str();
}

std::string significant(double value, int digits) {
  std::ostringstream s;
  s << std::setprecision(digits) << value;
  return s.str();
}

// Text cells are formatted first and the JSON numbers are parsed back from
// them, so both renderings carry identical values.
struct BenchRow {
  std::string name;
  std::string algorithm;
  std::string status = "ok";
  std::string error_pct = "-";
  std::string updates = "-";
  std::string projections = "-";
  std::string wall_ms = "-";
  std::string train_loss = "-";
  json extra = json::object();
};

json row_to_json(const BenchRow& row) {
  json j = {{"name", row.name}, {"algorithm", row.algorithm}, {"status", row.status}};
  const auto number = [](const std::string& cell) { return cell == "-" ? json(nullptr) : json(std::stod(cell)); };
  const auto integer = [](const std::string& cell) {
    return cell == "-" ? json(nullptr) : json(std::stoll(cell));
  };
  j["error_pct"] = number(row.error_pct);
  j["updates"] = integer(row.updates);
  j["projections"] = integer(row.projections);
  j["wall_time_ms"] = integer(row.wall_ms);
  j["train_loss"] = number(row.train_loss);
  j.update(row.extra);
  return j;
}

std::string render_table(const std::vector<BenchRow>& rows) {
  const std::vector<std::string> header = {"row", "algorithm", "error%", "updates", "projections",
                                           "wall_ms", "train_loss", "status"};
  std::vector<std::vector<std::string>> cells;
  cells.push_back(header);
  for (const BenchRow& r : rows)
    cells.push_back({r.name, r.algorithm, r.error_pct, r.updates, r.projections, r.wall_ms,
                     r.train_loss, r.status});
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  std::ostringstream s;
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c > 0) s << "  ";
      if (c < 2 || c + 1 == line.size()) {
        s << std::left << std::setw(static_cast<int>(width[c])) << line[c];
      } else {
        s << std::right << std::setw(static_cast<int>(width[c])) << line[c];
      }
    }
    s << "\n";
  }
  return s.str();
}

int cmd_bench(const std::string& spec_path, const std::string& out_override, std::ostream& out) {
  std::ifstream file(spec_path);
  if (!file) throw UsageError("cannot open bench spec " + spec_path);
  json raw;
  try {
    raw = json::parse(file);
  } catch (const json::exception& e) {
    throw UsageError(spec_path + ": " + e.what());
  }
  BenchSpec spec = parse_bench_spec(raw);
  if (!out_override.empty()) spec.out = out_override;

  // Validate every run up front so flag mistakes are usage errors.
  std::vector<TrainConfig> configs;
  std::vector<std::string> names;
  for (const json& run : spec.runs) {
    TrainFlags flags = spec.defaults;
    flags.triplets = spec.triplets;
    read_train_fields(run, flags);
    configs.push_back(make_config(flags, spec.seed));
    names.push_back(run.value("name", flags.algo));
  }

  const PreparedData data = prepare_data(spec.data, spec.seed);
  const std::vector<Triplet> triplets =
      generate_triplets(data.train, spec.triplets, derive_seed(spec.seed, kTripletStream));

  std::vector<BenchRow> rows;
  {
    BenchRow base;
    base.name = "euclidean";
    base.algorithm = "euclidean";
    const MetricMatrix identity = MetricMatrix::Identity(data.train.dim(), data.train.dim());
    const EvalResult eval = classification_error(identity, data.train, data.test, spec.k);
    base.error_pct = fixed(100.0 * eval.error_rate, 4);
    base.updates = "0";
    base.projections = "0";
    base.extra["evaluation"] = eval_to_json(eval);
    rows.push_back(std::move(base));
  }
  for (std::size_t r = 0; r < configs.size(); ++r) {
    BenchRow row;
    row.name = names[r];
    row.algorithm = std::string(to_string(configs[r].algorithm));
    try {
      const TrainReport report = train(configs[r], triplets, data.train);
      const EvalResult eval = classification_error(report.averaged_metric, data.train, data.test, spec.k);
      row.error_pct = fixed(100.0 * eval.error_rate, 4);
      row.updates = std::to_string(report.updates);
      row.projections = std::to_string(report.projections);
      row.wall_ms = std::to_string(report.wall_time_ms);
      row.train_loss = significant(final_running_loss(report), 6);
      row.extra["report"] = report_to_json(report);
      row.extra["evaluation"] = eval_to_json(eval);
    } catch (const Error& e) {
      row.status = "error";
      row.extra["error"] = error_object(to_string(e.code()), e.what())["error"];
    }
    rows.push_back(std::move(row));
  }

  json doc = {{"seed", spec.seed}, {"k", spec.k}, {"triplets", spec.triplets}, {"data", data.description}};
  doc["rows"] = json::array();
  for (const BenchRow& row : rows) doc["rows"].push_back(row_to_json(row));

  out << render_table(rows);
  if (spec.out.empty()) {
    out << doc.dump(2) << "\n";
  } else {
    write_text(spec.out, doc.dump(2) + "\n");
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projection-reduced SGD for Mahalanobis metric learning"};
  app.require_subcommand(1);

  TrainFlags flags;
  DataOptions data;
  std::string standardize = "off";
  std::string pca = "off";
  std::uint64_t seed = 0;
  int k = 3;
  std::string out_path;
  std::string metric_path;
  std::string spec_path;
  SyntheticSpec gen_spec;

  CLI::App* train_cmd = app.add_subcommand("train", "Generate triplets, train one variant, evaluate");
  train_cmd->add_option("--algo", flags.algo, "sgd|mini|as|hr|ha");
  train_cmd->add_option("--eta", flags.eta, "Step size");
  train_cmd->add_option("--batch", flags.batch, "Mini-batch size (mini, hr, ha)");
  train_cmd->add_option("--radius", flags.radius, "Frobenius radius R of the domain");
  train_cmd->add_option("--loss", flags.loss, "smooth|hinge");
  train_cmd->add_option("--L", flags.smoothness, "Smoothness of the smooth loss");
  train_cmd->add_option("--triplets", flags.triplets, "Number of triplet constraints N");
  train_cmd->add_option("--warmup", flags.warmup, "Warm-up batches for the HA gradient scale");
  train_cmd->add_option("--gamma-floor", flags.gamma_floor, "Smallest accepted hybrid probability");
  train_cmd->add_option("--curve-stride", flags.curve_stride, "Constraints between loss samples");
  train_cmd->add_option("--seed", seed, "Seed for split, triplets and sampling");
  train_cmd->add_option("--k", k, "Neighbours for k-NN evaluation");
  train_cmd->add_option("--out", out_path, "Report path (stdout when omitted)");
  add_data_options(*train_cmd, data, standardize, pca);

  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a saved metric with k-NN");
  eval_cmd->add_option("--metric", metric_path, "Report or metric JSON")->required();
  eval_cmd->add_option("--seed", seed, "Seed for the split / synthetic data");
  eval_cmd->add_option("--k", k, "Neighbours for k-NN evaluation");
  eval_cmd->add_option("--out", out_path, "Result path (stdout when omitted)");
  add_data_options(*eval_cmd, data, standardize, pca);

  CLI::App* gen_cmd = app.add_subcommand("gen", "Write a synthetic dataset in LIBSVM format");
  gen_cmd->add_option("--classes", gen_spec.classes, "Number of classes");
  gen_cmd->add_option("--dim", gen_spec.dim, "Dimension");
  gen_cmd->add_option("--per-class", gen_spec.per_class, "Points per class");
  gen_cmd->add_option("--noise-dims", gen_spec.noise_dims, "Trailing label-independent dims");
  gen_cmd->add_option("--separation", gen_spec.separation, "Class mean offset");
  gen_cmd->add_option("--noise-std", gen_spec.noise_std, "Std of the noise dims");
  gen_cmd->add_option("--seed", gen_spec.seed, "Generator seed");
  gen_cmd->add_option("--out", out_path, "Output path (stdout when omitted)");

  CLI::App* bench_cmd = app.add_subcommand("bench", "Run every configured variant on shared triplets");
  bench_cmd->add_option("spec", spec_path, "Bench spec JSON")->required();
  bench_cmd->add_option("--out", out_path, "JSON table path (overrides the spec's 'out')");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << error_object("UsageError", e.what()).dump() << "\n";
    return kUsageError;
  }

  try {
    data.standardize = parse_on_off(standardize, "--standardize");
    data.pca = parse_pca(pca);
    if (*train_cmd) return cmd_train(flags, data, seed, k, out_path, out);
    if (*eval_cmd) return cmd_eval(metric_path, data, seed, k, out_path, out);
    if (*gen_cmd) return cmd_gen(gen_spec, out_path, out);
    if (*bench_cmd) return cmd_bench(spec_path, out_path, out);
  } catch (const UsageError& e) {
    err << error_object("UsageError", e.what()).dump() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    err << error_object(to_string(e.code()), e.what()).dump() << "\n";
    return kRuntimeError;
  } catch (const std::exception& e) {
    err << error_object("Internal", e.what()).dump() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace sgdml::cli
