#include "xdboost/data/records.hpp"

#include "xdboost/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace xdboost::data {

namespace {

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string trim_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

void FieldSpec::validate() const {
  std::set<std::string> seen;
  for (const auto& name : categorical) {
    if (!seen.insert(name).second) {
      throw SchemaError("field '" + name + "' declared more than once");
    }
  }
  for (const auto& name : continuous) {
    if (!seen.insert(name).second) {
      throw SchemaError("field '" + name + "' declared as both categorical and continuous");
    }
  }
  for (const auto& name : seen) {
    if (name == timestamp_column || name == label_column) {
      throw SchemaError("feature field '" + name + "' reuses the timestamp or label column");
    }
  }
  auto is_categorical = [this](const std::string& n) {
    return std::find(categorical.begin(), categorical.end(), n) != categorical.end();
  };
  if (!user_column.empty() && !is_categorical(user_column)) {
    throw SchemaError("user column '" + user_column + "' must be a categorical field");
  }
  if (!item_column.empty() && !is_categorical(item_column)) {
    throw SchemaError("item column '" + item_column + "' must be a categorical field");
  }
}

std::size_t FieldSpec::item_index() const {
  auto it = std::find(categorical.begin(), categorical.end(), item_column);
  if (it == categorical.end()) throw SchemaError("no categorical item column '" + item_column + "'");
  return static_cast<std::size_t>(it - categorical.begin());
}

std::size_t FieldSpec::user_index() const {
  auto it = std::find(categorical.begin(), categorical.end(), user_column);
  if (it == categorical.end()) throw SchemaError("no categorical user column '" + user_column + "'");
  return static_cast<std::size_t>(it - categorical.begin());
}

FieldSpec FieldSpec::parse(const std::string& text) {
  // Duplicate keys inside "fields" are detected while parsing, since the
  // resulting object would silently keep only one of them.
  std::vector<std::string> duplicates;
  std::vector<std::set<std::string>> keys_at_depth;
  int depth = 0;
  auto callback = [&](int /*depth*/, nlohmann::ordered_json::parse_event_t event,
                      nlohmann::ordered_json& parsed) {
    using E = nlohmann::ordered_json::parse_event_t;
    if (event == E::object_start) {
      ++depth;
      keys_at_depth.resize(static_cast<std::size_t>(depth) + 1);
      keys_at_depth[static_cast<std::size_t>(depth)].clear();
    } else if (event == E::object_end) {
      --depth;
    } else if (event == E::key) {
      auto& keys = keys_at_depth[static_cast<std::size_t>(depth)];
      if (!keys.insert(parsed.get<std::string>()).second) {
        duplicates.push_back(parsed.get<std::string>());
      }
    }
    return true;
  };

  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text, callback);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("field spec is not valid JSON: ") + e.what());
  }
  if (!duplicates.empty()) {
    throw SchemaError("field '" + duplicates.front() +
                      "' declared more than once (mixed declared type?)");
  }

  FieldSpec spec;
  try {
    spec.timestamp_column = j.value("timestamp", spec.timestamp_column);
    spec.label_column = j.value("label", spec.label_column);
    spec.user_column = j.value("user", spec.user_column);
    spec.item_column = j.value("item", spec.item_column);
    if (!j.contains("fields") || !j["fields"].is_object()) {
      throw SchemaError("field spec needs a \"fields\" object mapping names to types");
    }
    for (const auto& [name, type] : j["fields"].items()) {
      const std::string t = type.get<std::string>();
      if (t == "categorical") {
        spec.categorical.push_back(name);
      } else if (t == "continuous") {
        spec.continuous.push_back(name);
      } else {
        throw SchemaError("field '" + name + "' has unknown type '" + t + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("field spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

FieldSpec FieldSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open field spec " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

nlohmann::ordered_json FieldSpec::to_json() const {
  nlohmann::ordered_json j;
  j["timestamp"] = timestamp_column;
  j["label"] = label_column;
  j["user"] = user_column;
  j["item"] = item_column;
  auto& fields = j["fields"] = nlohmann::ordered_json::object();
  for (const auto& n : categorical) fields[n] = "categorical";
  for (const auto& n : continuous) fields[n] = "continuous";
  return j;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

IngestResult ingest_csv(const std::filesystem::path& path, const FieldSpec& spec,
                        const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open data file " + path.string());
  return ingest_csv(in, spec, options);
}

IngestResult ingest_csv(std::istream& in, const FieldSpec& spec, const IngestOptions& options) {
  spec.validate();
  IngestResult result;
  std::string line;
  if (!std::getline(in, line)) throw IngestError("data file is empty (no header row)");
  result.header_line = trim_cr(line);
  result.header = split_csv_line(result.header_line);

  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < result.header.size(); ++c) column.emplace(result.header[c], c);
  auto locate = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    auto it = column.find(name);
    if (it == column.end()) {
      if (required) throw IngestError("missing required column '" + name + "'");
      return std::nullopt;
    }
    return it->second;
  };
  const auto ts_col = locate(spec.timestamp_column, options.require_timestamp);
  const auto label_col = locate(spec.label_column, options.require_label);
  std::vector<std::size_t> cat_cols;
  std::vector<std::size_t> cont_cols;
  for (const auto& n : spec.categorical) cat_cols.push_back(*locate(n, true));
  for (const auto& n : spec.continuous) cont_cols.push_back(*locate(n, true));

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);

    std::string problem;
    InteractionRecord rec;
    rec.line = line_no;
    if (cells.size() != result.header.size()) {
      problem = "expected " + std::to_string(result.header.size()) + " cells, found " +
                std::to_string(cells.size());
    }
    if (problem.empty() && ts_col) {
      const auto ts = parse_double(cells[*ts_col]);
      if (!ts) {
        problem = "timestamp '" + cells[*ts_col] + "' is not numeric";
      } else {
        rec.timestamp = *ts;
      }
    }
    if (problem.empty() && label_col) {
      const auto& raw = cells[*label_col];
      const auto label = parse_double(raw);
      if (!label || (*label != 0.0 && *label != 1.0)) {
        problem = "label '" + raw + "' is not 0 or 1";
      } else {
        rec.label = *label;
      }
    }
    if (problem.empty()) {
      for (std::size_t c : cat_cols) {
        rec.categorical.push_back(cells[c].empty() ? std::string(kMissingToken) : cells[c]);
      }
      for (std::size_t k = 0; k < cont_cols.size() && problem.empty(); ++k) {
        const auto& raw = cells[cont_cols[k]];
        if (raw.empty()) {
          rec.continuous.emplace_back(std::nullopt);
          continue;
        }
        const auto v = parse_double(raw);
        if (!v) {
          problem = "continuous field '" + spec.continuous[k] + "' value '" + raw +
                    "' is not numeric";
        } else {
          rec.continuous.emplace_back(*v);
        }
      }
    }

    if (!problem.empty()) {
      if (options.strict) {
        throw IngestError("line " + std::to_string(line_no) + ": " + problem);
      }
      ++result.malformed;
      continue;
    }
    result.records.push_back(std::move(rec));
    if (options.keep_raw) result.raw_lines.push_back(line);
  }
  return result;
}

}  // namespace xdboost::data
