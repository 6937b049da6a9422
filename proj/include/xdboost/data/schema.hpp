#pragma once

#include "xdboost/data/records.hpp"
#include "xdboost/design_matrix.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace xdboost::data {

struct CategoricalField {
  std::string name;
  // Tokens in index order; the OOV index is tokens.size().
  std::vector<std::string> tokens;
  std::unordered_map<std::string, std::int32_t> index;

  std::int32_t oov() const { return static_cast<std::int32_t>(tokens.size()); }
  std::size_t vocab_size() const { return tokens.size() + 1; }
  std::int32_t lookup(const std::string& token) const;
};

struct ContinuousField {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  // Raw training mean, used for missing values.
  double mean = 0.0;
  bool scale = true;

  double encode(std::optional<double> raw) const;
};

struct FeatureSchema {
  FieldSpec spec;
  std::vector<CategoricalField> categorical;
  std::vector<ContinuousField> continuous;
  std::size_t placeholders = 0;

  std::size_t field_count() const {
    return categorical.size() + continuous.size() + placeholders;
  }
  std::vector<std::size_t> vocab_sizes() const;

  FeatureSchema with_placeholders(std::size_t n) const;

  // FNV-1a over field names, types, vocabularies, scaling and placeholder count.
  std::uint64_t hash() const;

  nlohmann::ordered_json to_json() const;
  static FeatureSchema from_json(const nlohmann::ordered_json& j);
};

struct SchemaOptions {
  bool minmax_scale = true;
};

// Vocabularies come from `train` only, in first-seen order.
FeatureSchema build_schema(std::span<const InteractionRecord> train, const FieldSpec& spec,
                           const SchemaOptions& options = {});

// Categorical tokens unseen at schema time map to the field's OOV index.
DesignMatrix encode(std::span<const InteractionRecord> records, const FeatureSchema& schema);
std::vector<double> labels_of(std::span<const InteractionRecord> records);

// Encoded split file: one header line
//   # xdboost-encoded v1 rows=R categorical=C continuous=K placeholders=P
// a CSV column header (label, categorical names, continuous names), then one
// CSV row per instance with integer indices and %.17g reals.
void write_encoded(const std::filesystem::path& path, const FeatureSchema& schema,
                   const DesignMatrix& x, std::span<const double> labels);
std::pair<DesignMatrix, std::vector<double>> read_encoded(const std::filesystem::path& path);

}  // namespace xdboost::data
