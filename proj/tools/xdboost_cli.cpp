// xdboost command-line harness: train, sweep, coldstart, predict, synth-gen.

#include "xdboost/error.hpp"
#include "xdboost/harness/experiment.hpp"
#include "xdboost/harness/synthetic.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace h = xdboost::harness;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool synthetic = false;
  std::optional<double> percent;
  std::vector<double> percentages;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config_path, "experiment config (JSON)");
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  cmd->add_option("-o,--out", f.out, "output directory (overrides the config)");
  cmd->add_flag("--synthetic", f.synthetic,
                "use the built-in synthetic click log when the config names no dataset");
}

h::ExperimentConfig resolve_config(const CommonFlags& f) {
  h::ExperimentConfig config;
  if (!f.config_path.empty()) {
    config = h::ExperimentConfig::load(f.config_path);
  } else if (!f.synthetic) {
    throw xdboost::ConfigError("either --config or --synthetic is required");
  }
  if (f.synthetic && !config.synthetic && config.dataset.empty()) {
    config.synthetic = h::SyntheticOptions{};
  }
  if (f.seed) config.model.seed = *f.seed;
  if (!f.out.empty()) config.output_dir = f.out;
  if (f.percent) config.sub_training_percent = *f.percent;
  if (!f.percentages.empty()) config.sweep_percentages = f.percentages;
  config.validate();
  return config;
}

void print_metrics(const char* label, const h::ModelMetrics& m) {
  std::printf("  %-8s test auc=%.6f logloss=%.6f", label, m.test.auc, m.test.log_loss);
  if (m.val) std::printf("  val auc=%.6f logloss=%.6f", m.val->auc, m.val->log_loss);
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"XDBoost: CTR classifier boosted with predicted-error features"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  auto* train = app.add_subcommand("train", "train XDBoost and its unboosted base, then evaluate");
  add_common(train, train_flags);
  train->add_option("-p,--percent", train_flags.percent, "sub-training percentage of the dataset");

  CommonFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "train and evaluate over several sub-training sizes");
  add_common(sweep, sweep_flags);
  sweep->add_option("--percentages", sweep_flags.percentages, "sub-training percentages")
      ->delimiter(',');

  CommonFlags cold_flags;
  auto* cold = app.add_subcommand("coldstart", "evaluate on test items unseen in training");
  add_common(cold, cold_flags);
  cold->add_option("-p,--percent", cold_flags.percent, "sub-training percentage of the dataset");

  std::string bundle, input, output;
  auto* predict = app.add_subcommand("predict", "score a CSV with a saved model bundle");
  predict->add_option("-m,--model", bundle, "bundle directory")->required();
  predict->add_option("-i,--input", input, "input CSV")->required();
  predict->add_option("-o,--output", output, "scored CSV")->required();

  h::SyntheticOptions synth;
  std::string synth_csv, synth_spec;
  auto* gen = app.add_subcommand("synth-gen", "write the synthetic click log and its field spec");
  gen->add_option("-o,--output", synth_csv, "CSV path")->required();
  gen->add_option("--field-spec", synth_spec, "field spec path (default: <output>.fields.json)");
  gen->add_option("--rows", synth.rows, "row count");
  gen->add_option("--categorical", synth.categorical_fields, "categorical fields");
  gen->add_option("--vocab", synth.vocab, "tokens per categorical field");
  gen->add_option("--continuous", synth.continuous_fields, "continuous fields");
  gen->add_option("--seed", synth.seed, "generator seed");
  gen->add_option("--cold-start-fraction", synth.cold_start_fraction,
                  "share of test rows with novel item ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : h::kExitConfig;
  }

  try {
    if (*train) {
      const auto r = h::cmd_train(resolve_config(train_flags));
      std::printf("train: %zu train / %zu val / %zu test rows\n", r.train_records, r.val_records,
                  r.test_records);
      print_metrics("xdboost", r.boosted);
      print_metrics("base", r.base);
    } else if (*sweep) {
      const auto config = resolve_config(sweep_flags);
      const auto s = h::cmd_sweep(config);
      for (const auto& row : s.rows) {
        if (row.auc) {
          std::printf("%6g%%  %-8s auc=%.6f logloss=%.6f\n", row.percent, row.model.c_str(),
                      *row.auc, *row.log_loss);
        } else {
          std::printf("%6g%%  %-8s %s\n", row.percent, row.model.c_str(), row.status.c_str());
        }
      }
      for (const auto& run : s.runs) {
        if (run.status != "ok") std::fprintf(stderr, "%s\n", run.status.c_str());
      }
    } else if (*cold) {
      const auto r = h::cmd_coldstart(resolve_config(cold_flags));
      if (r.test_records == 0) {
        std::printf("no cold-start items (test rows before filtering: %zu)\n",
                    r.original_test_records.value_or(0));
      } else {
        std::printf("coldstart: %zu of %zu test rows carry unseen items\n", r.test_records,
                    r.original_test_records.value_or(0));
        print_metrics("xdboost", r.boosted);
        print_metrics("base", r.base);
      }
    } else if (*predict) {
      h::cmd_predict(bundle, input, output);
    } else if (*gen) {
      if (synth_spec.empty()) synth_spec = synth_csv + ".fields.json";
      synth.validate();
      h::cmd_synth_gen(synth, synth_csv, synth_spec);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error (%s): %s\n", h::failure_kind(e), e.what());
    return h::exit_code_for(e);
  }
  return h::kExitOk;
}
