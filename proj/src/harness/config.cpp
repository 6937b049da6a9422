#include "xdboost/harness/config.hpp"

#include "xdboost/config_keys.hpp"
#include "xdboost/error.hpp"

#include <fstream>
#include <sstream>

namespace xdboost::harness {

void SyntheticOptions::validate() const {
  if (rows < 3) throw ConfigError("synthetic dataset needs at least 3 rows");
  if (categorical_fields < 2) {
    throw ConfigError("synthetic dataset needs at least 2 categorical fields (user and item)");
  }
  if (vocab < 2) throw ConfigError("synthetic vocab must be at least 2");
  if (!(cold_start_fraction >= 0.0 && cold_start_fraction <= 1.0)) {
    throw ConfigError("cold_start_fraction must lie in [0, 1]");
  }
}

nlohmann::ordered_json SyntheticOptions::to_json() const {
  return {{"rows", rows},
          {"categorical_fields", categorical_fields},
          {"vocab", vocab},
          {"continuous_fields", continuous_fields},
          {"seed", seed},
          {"cold_start_fraction", cold_start_fraction}};
}

SyntheticOptions SyntheticOptions::from_json(const nlohmann::json& j) {
  SyntheticOptions o;
  require_known_keys(j,
                     {"rows", "categorical_fields", "vocab", "continuous_fields", "seed",
                      "cold_start_fraction"},
                     "synthetic options");
  try {
    o.rows = j.value("rows", o.rows);
    o.categorical_fields = j.value("categorical_fields", o.categorical_fields);
    o.vocab = j.value("vocab", o.vocab);
    o.continuous_fields = j.value("continuous_fields", o.continuous_fields);
    o.seed = j.value("seed", o.seed);
    o.cold_start_fraction = j.value("cold_start_fraction", o.cold_start_fraction);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic options: ") + e.what());
  }
  return o;
}

void ExperimentConfig::validate() const {
  split.validate();
  model.validate();
  if (synthetic) {
    synthetic->validate();
  } else {
    if (dataset.empty()) throw ConfigError("config needs a dataset path or synthetic options");
    if (!field_spec) throw ConfigError("config needs a field_spec for the dataset");
    field_spec->validate();
  }
  const double limit = 100.0 * split.train;
  auto check_percent = [limit](double p) {
    if (!(p > 0.0) || p > limit + 1e-9) {
      throw ConfigError("sub-training percentage " + std::to_string(p) + " outside (0, " +
                        std::to_string(limit) + "]");
    }
  };
  if (sub_training_percent) check_percent(*sub_training_percent);
  for (double p : sweep_percentages) check_percent(p);
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  require_known_keys(j,
                     {"dataset", "field_spec", "synthetic", "split", "sub_training_percent",
                      "sweep_percentages", "model", "output_dir", "strict", "minmax_scale"},
                     "experiment config");
  try {
    if (j.contains("dataset")) c.dataset = resolve(j["dataset"].get<std::string>());
    if (j.contains("field_spec")) {
      const auto& fs = j["field_spec"];
      c.field_spec = fs.is_string() ? data::FieldSpec::load(resolve(fs.get<std::string>()))
                                    : data::FieldSpec::parse(fs.dump());
    }
    if (j.contains("synthetic") && !j["synthetic"].is_null()) {
      c.synthetic = SyntheticOptions::from_json(j["synthetic"]);
    }
    if (j.contains("split")) {
      const auto& s = j["split"];
      require_known_keys(s, {"train", "val", "test"}, "split");
      c.split.train = s.value("train", c.split.train);
      c.split.val = s.value("val", c.split.val);
      c.split.test = s.value("test", c.split.test);
    }
    if (j.contains("sub_training_percent") && !j["sub_training_percent"].is_null()) {
      c.sub_training_percent = j["sub_training_percent"].get<double>();
    }
    c.sweep_percentages = j.value("sweep_percentages", c.sweep_percentages);
    if (j.contains("model")) c.model = boosting::BoostingConfig::from_json(j["model"]);
    if (j.contains("output_dir")) c.output_dir = resolve(j["output_dir"].get<std::string>());
    c.strict = j.value("strict", c.strict);
    c.minmax_scale = j.value("minmax_scale", c.minmax_scale);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  if (synthetic) {
    j["synthetic"] = synthetic->to_json();
  } else {
    j["dataset"] = dataset.string();
  }
  if (field_spec) j["field_spec"] = field_spec->to_json();
  j["split"] = {{"train", split.train}, {"val", split.val}, {"test", split.test}};
  j["sub_training_percent"] =
      sub_training_percent ? nlohmann::ordered_json(*sub_training_percent) : nullptr;
  j["sweep_percentages"] = sweep_percentages;
  j["model"] = model.to_json();
  j["output_dir"] = output_dir.string();
  j["strict"] = strict;
  j["minmax_scale"] = minmax_scale;
  return j;
}

}  // namespace xdboost::harness
