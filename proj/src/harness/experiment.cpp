#include "xdboost/harness/experiment.hpp"

#include "xdboost/error.hpp"
#include "xdboost/harness/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <limits>

namespace xdboost::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

nlohmann::ordered_json optional_report(const std::optional<metrics::MetricsReport>& r) {
  return r ? r->to_json() : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json model_metrics_json(const ModelMetrics& m) {
  return {{"val", optional_report(m.val)}, {"test", m.test.to_json()}};
}

std::optional<metrics::MetricsReport> evaluate_if_possible(std::span<const double> probs,
                                                           std::span<const double> labels) {
  const bool has_pos = std::find(labels.begin(), labels.end(), 1.0) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), 0.0) != labels.end();
  if (!has_pos || !has_neg) return std::nullopt;
  return metrics::evaluate(probs, labels);
}

std::string format_percent(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", p);
  return buf;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return kExitConfig;
  if (dynamic_cast<const DataError*>(&e) != nullptr) return kExitData;
  if (dynamic_cast<const InputError*>(&e) != nullptr) return kExitData;
  if (dynamic_cast<const TrainingError*>(&e) != nullptr) return kExitTraining;
  if (dynamic_cast<const MetricError*>(&e) != nullptr) return kExitEvaluation;
  return kExitInternal;
}

const char* failure_kind(const std::exception& e) {
  switch (exit_code_for(e)) {
    case kExitConfig: return "config";
    case kExitData: return "data";
    case kExitTraining: return "training";
    case kExitEvaluation: return "evaluation";
    default: return "internal";
  }
}

std::uint64_t record_hash(std::span<const data::InteractionRecord> records) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& r : records) {
    mix(&r.timestamp, sizeof(r.timestamp));
    mix(&r.label, sizeof(r.label));
    for (const auto& t : r.categorical) {
      mix(t.data(), t.size());
      mix("\x1f", 1);
    }
    for (const auto& v : r.continuous) {
      const double d = v.value_or(std::numeric_limits<double>::quiet_NaN());
      mix(&d, sizeof(d));
    }
    mix("\x1e", 1);
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

LoadedData load_and_split(const ExperimentConfig& config) {
  config.validate();
  LoadedData out;
  std::vector<data::InteractionRecord> records;
  if (config.synthetic) {
    SyntheticDataset ds = generate_synthetic(*config.synthetic, config.split);
    out.spec = ds.spec;
    records = std::move(ds.records);
  } else {
    out.spec = *config.field_spec;
    data::IngestOptions opts;
    opts.strict = config.strict;
    auto ingested = data::ingest_csv(config.dataset, out.spec, opts);
    out.malformed = ingested.malformed;
    records = std::move(ingested.records);
  }
  out.total = records.size();
  out.splits = data::chronological_split(std::move(records), config.split);
  return out;
}

std::vector<data::InteractionRecord> training_records(const LoadedData& data,
                                                      std::optional<double> percent,
                                                      const data::SplitSpec& split) {
  if (!percent) return data.splits.train;
  return data::sub_training(data.splits.train, data.total, *percent, split);
}

nlohmann::ordered_json RunResult::metrics_json() const {
  nlohmann::ordered_json j;
  j["sizes"] = {{"total", total_records},
                {"train", train_records},
                {"val", val_records},
                {"test", test_records}};
  if (original_test_records) j["sizes"]["original_test"] = *original_test_records;
  j["class_weights"] = {{"nonclick", weights.nonclick}, {"click", weights.click}};
  j["train_set_hash"] = hex(train_hash);
  j["test_set_hash"] = hex(test_hash);
  j["xdboost"] = model_metrics_json(boosted);
  j["base"] = model_metrics_json(base);
  return j;
}

nlohmann::ordered_json RunResult::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["status"] = status;
  j["seed"] = config.contains("model") ? config["model"]["seed"] : nlohmann::ordered_json(nullptr);
  j["sub_training_percent"] =
      sub_training_percent ? nlohmann::ordered_json(*sub_training_percent) : nullptr;
  j["config"] = config;
  j["metrics"] = metrics_json();
  j["diagnostics"] = diagnostics;
  j["timings_seconds"] = timings;
  return j;
}

TrainedRun run_experiment(const ExperimentConfig& config,
                          std::span<const data::InteractionRecord> train,
                          std::span<const data::InteractionRecord> val,
                          std::span<const data::InteractionRecord> test) {
  const auto t0 = Clock::now();
  data::SchemaOptions schema_opts;
  schema_opts.minmax_scale = config.minmax_scale;
  if (!config.field_spec) throw UsageError("run_experiment needs a resolved field spec");
  data::FeatureSchema schema = data::build_schema(train, *config.field_spec, schema_opts);
  const std::size_t n = config.model.iterations;
  const DesignMatrix x_train = append_placeholders(data::encode(train, schema), n);
  const DesignMatrix x_val = append_placeholders(data::encode(val, schema), n);
  const DesignMatrix x_test = append_placeholders(data::encode(test, schema), n);
  const auto y_train = data::labels_of(train);
  const auto y_val = data::labels_of(val);
  const auto y_test = data::labels_of(test);
  const nn::ClassWeights weights = data::class_weights(y_train);
  const double encode_s = seconds_since(t0);

  std::optional<boosting::LabeledMatrix> v;
  if (!val.empty()) v = boosting::LabeledMatrix{&x_val, y_val};

  auto t1 = Clock::now();
  boosting::XDBoostModel boosted = boosting::create_xdboost(schema, config.model);
  const boosting::TrainingReport report = boosted.train(x_train, y_train, v, weights);
  const double boost_s = seconds_since(t1);

  t1 = Clock::now();
  std::vector<model::FitReport> base_fits;
  model::BaseNet base = boosting::train_unboosted_baseline(schema, config.model, x_train, y_train,
                                                           v, weights, &base_fits);
  const double base_s = seconds_since(t1);

  t1 = Clock::now();
  RunResult r;
  r.config = config.to_json();
  r.total_records = train.size() + val.size() + test.size();
  r.train_records = train.size();
  r.val_records = val.size();
  r.test_records = test.size();
  r.weights = weights;
  r.train_hash = record_hash(train);
  r.test_hash = record_hash(test);
  if (!val.empty()) {
    r.boosted.val = evaluate_if_possible(boosted.predict(x_val), y_val);
    r.base.val = evaluate_if_possible(base.predict(x_val), y_val);
  }
  r.boosted.test = metrics::evaluate(boosted.predict(x_test), y_test);
  r.base.test = metrics::evaluate(base.predict(x_test), y_test);
  const double eval_s = seconds_since(t1);

  r.diagnostics["xdboost"] = report.to_json();
  auto& bj = r.diagnostics["base"] = nlohmann::ordered_json::array();
  for (const auto& f : base_fits) bj.push_back(f.to_json());
  r.timings = {{"encode", encode_s},
               {"train_xdboost", boost_s},
               {"train_base", base_s},
               {"evaluate", eval_s}};
  return TrainedRun{std::move(schema), std::move(boosted), std::move(base), std::move(r)};
}

RunResult cmd_train(const ExperimentConfig& config) {
  const auto start = Clock::now();
  const LoadedData data = load_and_split(config);
  ExperimentConfig effective = config;
  if (!effective.field_spec) effective.field_spec = data.spec;
  const auto train = training_records(data, config.sub_training_percent, config.split);
  TrainedRun run = run_experiment(effective, train, data.splits.val, data.splits.test);
  run.result.command = "train";
  run.result.sub_training_percent = config.sub_training_percent;
  run.result.total_records = data.total;

  const auto& out = config.output_dir;
  std::filesystem::create_directories(out / "encoded");
  run.boosted.save(out / "bundle");
  run.base.save(out / "baseline.bin");
  const std::size_t n = config.model.iterations;
  write_json(out / "encoded" / "schema.json", run.schema.with_placeholders(n).to_json());
  for (const auto& [name, records] :
       {std::pair<const char*, std::span<const data::InteractionRecord>>{"train", train},
        {"val", data.splits.val},
        {"test", data.splits.test}}) {
    data::write_encoded(out / "encoded" / (std::string(name) + ".csv"),
                        run.schema.with_placeholders(n),
                        append_placeholders(data::encode(records, run.schema), n),
                        data::labels_of(records));
  }
  run.result.timings["total"] = seconds_since(start);
  write_json(out / "result.json", run.result.to_json());
  return run.result;
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "percentage,model,auc,logloss,status\n";
  char buf[32];
  for (const auto& r : rows) {
    out << format_percent(r.percent) << ',' << r.model << ',';
    if (r.auc) {
      std::snprintf(buf, sizeof(buf), "%.17g", *r.auc);
      out << buf;
    }
    out << ',';
    if (r.log_loss) {
      std::snprintf(buf, sizeof(buf), "%.17g", *r.log_loss);
      out << buf;
    }
    out << ',' << r.status << '\n';
  }
}

SweepResult cmd_sweep(const ExperimentConfig& config) {
  if (config.sweep_percentages.empty()) throw ConfigError("sweep needs at least one percentage");
  const LoadedData data = load_and_split(config);
  ExperimentConfig effective = config;
  if (!effective.field_spec) effective.field_spec = data.spec;

  SweepResult sweep;
  sweep.test_hash = record_hash(data.splits.test);
  for (double p : config.sweep_percentages) {
    RunResult result;
    result.command = "sweep";
    result.sub_training_percent = p;
    result.config = effective.to_json();
    result.config["sub_training_percent"] = p;
    result.total_records = data.total;
    try {
      const auto train = training_records(data, p, config.split);
      sweep.train_hashes.emplace_back(p, record_hash(train));
      TrainedRun run = run_experiment(effective, train, data.splits.val, data.splits.test);
      run.result.command = "sweep";
      run.result.sub_training_percent = p;
      run.result.config["sub_training_percent"] = p;
      run.result.total_records = data.total;
      result = std::move(run.result);
      sweep.rows.push_back({p, "xdboost", result.boosted.test.auc, result.boosted.test.log_loss, "ok"});
      sweep.rows.push_back({p, "base", result.base.test.auc, result.base.test.log_loss, "ok"});
    } catch (const std::exception& e) {
      result.status = std::string("failed (") + failure_kind(e) + "): " + e.what();
      sweep.rows.push_back({p, "xdboost", std::nullopt, std::nullopt, "failed"});
      sweep.rows.push_back({p, "base", std::nullopt, std::nullopt, "failed"});
    }
    write_json(config.output_dir / "sweep" / ("p" + format_percent(p)) / "result.json",
               result.to_json());
    sweep.runs.push_back(std::move(result));
  }
  write_sweep_csv(config.output_dir / "sweep.csv", sweep.rows);
  return sweep;
}

RunResult cmd_coldstart(const ExperimentConfig& config) {
  const auto start = Clock::now();
  const LoadedData data = load_and_split(config);
  ExperimentConfig effective = config;
  if (!effective.field_spec) effective.field_spec = data.spec;
  const auto train = training_records(data, config.sub_training_percent, config.split);
  const auto filtered =
      data::cold_start_filter(data.splits.test, train, effective.field_spec->item_index());

  RunResult result;
  if (filtered.empty()) {
    result.command = "coldstart";
    result.status = "no cold-start items";
    result.config = effective.to_json();
    result.sub_training_percent = config.sub_training_percent;
    result.total_records = data.total;
    result.train_records = train.size();
    result.val_records = data.splits.val.size();
    result.test_records = 0;
    result.original_test_records = data.splits.test.size();
    result.train_hash = record_hash(train);
    result.test_hash = record_hash(filtered);
  } else {
    TrainedRun run = run_experiment(effective, train, data.splits.val, filtered);
    result = std::move(run.result);
    result.command = "coldstart";
    result.sub_training_percent = config.sub_training_percent;
    result.total_records = data.total;
    result.original_test_records = data.splits.test.size();
  }
  result.timings["total"] = seconds_since(start);
  write_json(config.output_dir / "coldstart_result.json", result.to_json());
  return result;
}

void cmd_predict(const std::filesystem::path& bundle, const std::filesystem::path& input,
                 const std::filesystem::path& output) {
  const boosting::XDBoostModel model = boosting::XDBoostModel::load(bundle);
  const data::FeatureSchema& schema = model.schema();
  data::IngestOptions opts;
  opts.require_label = false;
  opts.require_timestamp = false;
  opts.keep_raw = true;

  std::ifstream in(input);
  if (!in) throw DataError("cannot open " + input.string());
  data::IngestResult ingested;
  try {
    ingested = data::ingest_csv(in, schema.spec, opts);
  } catch (const IngestError& e) {
    throw InputError(std::string("input does not match the bundled schema: ") + e.what());
  }

  const DesignMatrix x =
      append_placeholders(data::encode(ingested.records, schema.with_placeholders(0)),
                          model.iterations());
  const std::vector<double> probs = model.predict(x);

  if (output.has_parent_path()) std::filesystem::create_directories(output.parent_path());
  std::ofstream out(output);
  if (!out) throw DataError("cannot write " + output.string());
  out << ingested.header_line << ",probability\n";
  char buf[32];
  for (std::size_t r = 0; r < probs.size(); ++r) {
    std::snprintf(buf, sizeof(buf), "%.17g", probs[r]);
    out << ingested.raw_lines[r] << ',' << buf << '\n';
  }
}

void cmd_synth_gen(const SyntheticOptions& options, const std::filesystem::path& csv,
                   const std::filesystem::path& field_spec) {
  const SyntheticDataset ds = generate_synthetic(options);
  if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
  write_csv(csv, ds);
  write_json(field_spec, ds.spec.to_json());
}

}  // namespace xdboost::harness
