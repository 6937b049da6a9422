#pragma once

#include "xdboost/boost/xdboost.hpp"
#include "xdboost/data/records.hpp"
#include "xdboost/data/split.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace xdboost::harness {

// Desk-scale click log generator settings (see synthetic.hpp).
struct SyntheticOptions {
  std::size_t rows = 20000;
  std::size_t categorical_fields = 6;
  std::size_t vocab = 50;
  std::size_t continuous_fields = 2;
  std::uint64_t seed = 1;
  // Fraction of the test region whose item id never occurs before it.
  double cold_start_fraction = 0.0;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static SyntheticOptions from_json(const nlohmann::json& j);
};

struct ExperimentConfig {
  // Exactly one of `dataset` (with `field_spec`) or `synthetic` is used.
  std::filesystem::path dataset;
  std::optional<data::FieldSpec> field_spec;
  std::optional<SyntheticOptions> synthetic;

  data::SplitSpec split;
  // Percent of the full dataset used by `train`/`coldstart`; unset = whole training region.
  std::optional<double> sub_training_percent;
  std::vector<double> sweep_percentages = {1, 5, 10, 20, 40, 60, 72};
  boosting::BoostingConfig model;
  std::filesystem::path output_dir = "xdboost_out";
  bool strict = true;
  bool minmax_scale = true;

  void validate() const;

  // Relative paths in the file resolve against `base_dir`. "field_spec" may be
  // an inline object or a path to a field spec file.
  static ExperimentConfig from_json(const nlohmann::json& j,
                                    const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
};

}  // namespace xdboost::harness
