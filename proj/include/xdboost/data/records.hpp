#pragma once

#include "json.hpp"

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace xdboost::data {

inline constexpr const char* kMissingToken = "<missing>";

// Column roles for a click log. `categorical` and `continuous` list the
// feature columns in model order; user and item columns must be among the
// categorical ones.
struct FieldSpec {
  std::string timestamp_column = "timestamp";
  std::string label_column = "label";
  std::string user_column = "user_id";
  std::string item_column = "item_id";
  std::vector<std::string> categorical;
  std::vector<std::string> continuous;

  // Throws SchemaError on a field declared with two types, a feature that
  // reuses the timestamp/label column, or a user/item column that is not categorical.
  void validate() const;
  std::size_t item_index() const;
  std::size_t user_index() const;

  // {"timestamp": .., "label": .., "user": .., "item": ..,
  //  "fields": {"<name>": "categorical" | "continuous", ...}}
  // Field order follows the file. A name repeated in "fields" is a SchemaError.
  static FieldSpec parse(const std::string& text);
  static FieldSpec load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
};

struct InteractionRecord {
  double timestamp = 0.0;
  std::vector<std::string> categorical;
  std::vector<std::optional<double>> continuous;
  double label = 0.0;
  // 1-based line in the source file (header is line 1); 0 for generated records.
  std::size_t line = 0;

  bool operator==(const InteractionRecord&) const = default;
};

struct IngestOptions {
  // Strict mode fails on the first malformed row; lenient mode skips and counts it.
  bool strict = true;
  // Scoring inputs may omit the label and timestamp columns.
  bool require_label = true;
  bool require_timestamp = true;
  // Keep each data row's raw text (used when echoing input columns).
  bool keep_raw = false;
};

struct IngestResult {
  std::vector<InteractionRecord> records;
  std::size_t malformed = 0;
  std::vector<std::string> header;
  std::string header_line;
  std::vector<std::string> raw_lines;
};

IngestResult ingest_csv(const std::filesystem::path& path, const FieldSpec& spec,
                        const IngestOptions& options = {});
IngestResult ingest_csv(std::istream& in, const FieldSpec& spec,
                        const IngestOptions& options = {});

// Splits one CSV line. Double-quoted cells may contain commas and "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace xdboost::data
