#pragma once

#include "xdboost/boost/xdboost.hpp"
#include "xdboost/data/schema.hpp"
#include "xdboost/data/split.hpp"
#include "xdboost/harness/config.hpp"
#include "xdboost/metrics.hpp"

#include "json.hpp"

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xdboost::harness {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitTraining = 4,
  kExitEvaluation = 5,
};

int exit_code_for(const std::exception& e);
const char* failure_kind(const std::exception& e);

// Order-sensitive FNV-1a fingerprint of a record sequence.
std::uint64_t record_hash(std::span<const data::InteractionRecord> records);
std::string hex(std::uint64_t v);

struct LoadedData {
  data::FieldSpec spec;
  data::Splits splits;
  std::size_t total = 0;
  std::size_t malformed = 0;
};

// Reads (or generates) the dataset and splits it chronologically.
LoadedData load_and_split(const ExperimentConfig& config);

// Sub-training records for `percent` (or the whole training region when unset).
std::vector<data::InteractionRecord> training_records(const LoadedData& data,
                                                      std::optional<double> percent,
                                                      const data::SplitSpec& split);

struct ModelMetrics {
  std::optional<metrics::MetricsReport> val;
  metrics::MetricsReport test;
};

struct RunResult {
  std::string command;
  nlohmann::ordered_json config;
  std::optional<double> sub_training_percent;
  std::size_t total_records = 0;
  std::size_t train_records = 0;
  std::size_t val_records = 0;
  std::size_t test_records = 0;
  nn::ClassWeights weights;
  std::uint64_t train_hash = 0;
  std::uint64_t test_hash = 0;
  ModelMetrics boosted;
  ModelMetrics base;
  nlohmann::ordered_json diagnostics;
  nlohmann::ordered_json timings;
  // Filled by the cold-start command.
  std::optional<std::size_t> original_test_records;
  std::string status = "ok";

  // Everything except timings; identical configs produce identical dumps.
  nlohmann::ordered_json metrics_json() const;
  nlohmann::ordered_json to_json() const;
};

// Models and encoded data of one completed run.
struct TrainedRun {
  data::FeatureSchema schema;  // without placeholders
  boosting::XDBoostModel boosted;
  model::BaseNet base;
  RunResult result;
};

// Encodes `train`, trains XDBoost and the unboosted baseline under the same
// seed, and evaluates both on `val` and `test`.
TrainedRun run_experiment(const ExperimentConfig& config,
                          std::span<const data::InteractionRecord> train,
                          std::span<const data::InteractionRecord> val,
                          std::span<const data::InteractionRecord> test);

// train: one run; writes result.json, bundle/, baseline.bin and encoded/ under output_dir.
RunResult cmd_train(const ExperimentConfig& config);

struct SweepRow {
  double percent = 0.0;
  std::string model;
  std::optional<double> auc;
  std::optional<double> log_loss;
  std::string status;
};

struct SweepResult {
  std::vector<RunResult> runs;
  std::vector<SweepRow> rows;
  // Per percentage: the sub-training record hash, and the error if the run failed.
  std::vector<std::pair<double, std::uint64_t>> train_hashes;
  std::uint64_t test_hash = 0;
};

// sweep: one run per percentage over a fixed val/test split. Failed runs are
// recorded and the sweep continues. Writes sweep/<p>/result.json and sweep.csv.
SweepResult cmd_sweep(const ExperimentConfig& config);
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows);

// coldstart: trains on the sub-training set and evaluates on the test rows
// whose item never occurs in it. Writes coldstart_result.json.
RunResult cmd_coldstart(const ExperimentConfig& config);

// predict: scores `input` with a saved bundle; output = input columns + "probability".
void cmd_predict(const std::filesystem::path& bundle, const std::filesystem::path& input,
                 const std::filesystem::path& output);

// synth-gen: writes the CSV and its field spec (fields.json) next to it.
void cmd_synth_gen(const SyntheticOptions& options, const std::filesystem::path& csv,
                   const std::filesystem::path& field_spec);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

}  // namespace xdboost::harness
