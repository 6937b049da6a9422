#include "xdboost/data/schema.hpp"

#include "xdboost/error.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace xdboost::data {

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void str(const std::string& s) {
    const std::uint64_t n = s.size();
    bytes(&n, sizeof(n));
    bytes(s.data(), s.size());
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof(v)); }
  void f64(double v) { bytes(&v, sizeof(v)); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::int32_t CategoricalField::lookup(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? oov() : it->second;
}

double ContinuousField::encode(std::optional<double> raw) const {
  const double v = raw.value_or(mean);
  if (!scale) return v;
  if (max <= min) return 0.0;
  return std::clamp((v - min) / (max - min), 0.0, 1.0);
}

std::vector<std::size_t> FeatureSchema::vocab_sizes() const {
  std::vector<std::size_t> out;
  for (const auto& f : categorical) out.push_back(f.vocab_size());
  return out;
}

FeatureSchema FeatureSchema::with_placeholders(std::size_t n) const {
  FeatureSchema s = *this;
  s.placeholders = n;
  return s;
}

std::uint64_t FeatureSchema::hash() const {
  Fnv1a h;
  h.u64(categorical.size());
  for (const auto& f : categorical) {
    h.str(f.name);
    h.u64(f.tokens.size());
    for (const auto& t : f.tokens) h.str(t);
  }
  h.u64(continuous.size());
  for (const auto& f : continuous) {
    h.str(f.name);
    h.f64(f.min);
    h.f64(f.max);
    h.f64(f.mean);
    h.u64(f.scale ? 1 : 0);
  }
  h.u64(placeholders);
  return h.value();
}

nlohmann::ordered_json FeatureSchema::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "xdboost-schema";
  j["version"] = 1;
  j["field_spec"] = spec.to_json();
  auto& cats = j["categorical"] = nlohmann::ordered_json::array();
  for (const auto& f : categorical) {
    cats.push_back({{"name", f.name}, {"tokens", f.tokens}, {"oov_index", f.oov()}});
  }
  auto& conts = j["continuous"] = nlohmann::ordered_json::array();
  for (const auto& f : continuous) {
    conts.push_back(
        {{"name", f.name}, {"min", f.min}, {"max", f.max}, {"mean", f.mean}, {"scale", f.scale}});
  }
  j["placeholders"] = placeholders;
  j["hash"] = hash();
  return j;
}

FeatureSchema FeatureSchema::from_json(const nlohmann::ordered_json& j) {
  FeatureSchema s;
  try {
    s.spec = FieldSpec::parse(j.at("field_spec").dump());
    for (const auto& c : j.at("categorical")) {
      CategoricalField f;
      f.name = c.at("name").get<std::string>();
      f.tokens = c.at("tokens").get<std::vector<std::string>>();
      for (std::size_t k = 0; k < f.tokens.size(); ++k) {
        if (!f.index.emplace(f.tokens[k], static_cast<std::int32_t>(k)).second) {
          throw SchemaError("schema field '" + f.name + "' repeats token '" + f.tokens[k] + "'");
        }
      }
      s.categorical.push_back(std::move(f));
    }
    for (const auto& c : j.at("continuous")) {
      ContinuousField f;
      f.name = c.at("name").get<std::string>();
      f.min = c.at("min").get<double>();
      f.max = c.at("max").get<double>();
      f.mean = c.at("mean").get<double>();
      f.scale = c.at("scale").get<bool>();
      s.continuous.push_back(std::move(f));
    }
    s.placeholders = j.at("placeholders").get<std::size_t>();
    if (j.contains("hash") && j["hash"].get<std::uint64_t>() != s.hash()) {
      throw SchemaError("schema hash does not match its contents");
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("schema manifest: ") + e.what());
  }
  return s;
}

FeatureSchema build_schema(std::span<const InteractionRecord> train, const FieldSpec& spec,
                           const SchemaOptions& options) {
  spec.validate();
  if (train.empty()) throw SchemaError("cannot build a schema from an empty training split");
  FeatureSchema schema;
  schema.spec = spec;
  for (const auto& name : spec.categorical) schema.categorical.push_back({name, {}, {}});
  for (const auto& name : spec.continuous) schema.continuous.push_back({name});

  std::vector<double> sums(spec.continuous.size(), 0.0);
  std::vector<std::size_t> counts(spec.continuous.size(), 0);
  std::vector<bool> seen_any(spec.continuous.size(), false);
  for (const auto& rec : train) {
    if (rec.categorical.size() != spec.categorical.size() ||
        rec.continuous.size() != spec.continuous.size()) {
      throw SchemaError("record from line " + std::to_string(rec.line) +
                        " does not match the field spec");
    }
    for (std::size_t f = 0; f < spec.categorical.size(); ++f) {
      auto& field = schema.categorical[f];
      const auto& token = rec.categorical[f];
      if (field.index.emplace(token, static_cast<std::int32_t>(field.tokens.size())).second) {
        field.tokens.push_back(token);
      }
    }
    for (std::size_t g = 0; g < spec.continuous.size(); ++g) {
      const auto& v = rec.continuous[g];
      if (!v) continue;
      auto& field = schema.continuous[g];
      if (!seen_any[g]) {
        field.min = field.max = *v;
        seen_any[g] = true;
      }
      field.min = std::min(field.min, *v);
      field.max = std::max(field.max, *v);
      sums[g] += *v;
      ++counts[g];
    }
  }
  for (std::size_t g = 0; g < spec.continuous.size(); ++g) {
    auto& field = schema.continuous[g];
    field.mean = counts[g] > 0 ? sums[g] / static_cast<double>(counts[g]) : 0.0;
    field.scale = options.minmax_scale;
  }
  return schema;
}

DesignMatrix encode(std::span<const InteractionRecord> records, const FeatureSchema& schema) {
  DesignMatrix x(records.size(), schema.categorical.size(), schema.continuous.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.categorical.size() != schema.categorical.size() ||
        rec.continuous.size() != schema.continuous.size()) {
      throw SchemaError("record from line " + std::to_string(rec.line) +
                        " does not match the schema");
    }
    for (std::size_t f = 0; f < schema.categorical.size(); ++f) {
      x.cat(r, f) = schema.categorical[f].lookup(rec.categorical[f]);
    }
    for (std::size_t g = 0; g < schema.continuous.size(); ++g) {
      x.cont(r, g) = schema.continuous[g].encode(rec.continuous[g]);
    }
  }
  if (schema.placeholders > 0) return append_placeholders(x, schema.placeholders);
  return x;
}

std::vector<double> labels_of(std::span<const InteractionRecord> records) {
  std::vector<double> y;
  y.reserve(records.size());
  for (const auto& r : records) y.push_back(r.label);
  return y;
}

void write_encoded(const std::filesystem::path& path, const FeatureSchema& schema,
                   const DesignMatrix& x, std::span<const double> labels) {
  if (labels.size() != x.rows()) throw InputError("write_encoded: label count mismatch");
  if (x.categorical_cols() != schema.categorical.size() ||
      x.continuous_cols() != schema.continuous.size() + x.placeholders()) {
    throw InputError("write_encoded: matrix does not match schema");
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write encoded split " + path.string());
  out << "# xdboost-encoded v1 rows=" << x.rows() << " categorical=" << x.categorical_cols()
      << " continuous=" << schema.continuous.size() << " placeholders=" << x.placeholders()
      << "\n";
  out << "label";
  for (const auto& f : schema.categorical) out << ',' << f.name;
  for (const auto& f : schema.continuous) out << ',' << f.name;
  for (std::size_t i = 0; i < x.placeholders(); ++i) out << ",error_" << i;
  out << '\n';
  for (std::size_t r = 0; r < x.rows(); ++r) {
    out << format_real(labels[r]);
    for (std::size_t f = 0; f < x.categorical_cols(); ++f) out << ',' << x.cat(r, f);
    for (std::size_t g = 0; g < x.continuous_cols(); ++g) out << ',' << format_real(x.cont(r, g));
    out << '\n';
  }
  if (!out) throw InputError("failed writing encoded split " + path.string());
}

std::pair<DesignMatrix, std::vector<double>> read_encoded(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open encoded split " + path.string());
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0, n_cat = 0, n_cont = 0, n_ph = 0;
  if (std::sscanf(line.c_str(),
                  "# xdboost-encoded v1 rows=%zu categorical=%zu continuous=%zu placeholders=%zu",
                  &rows, &n_cat, &n_cont, &n_ph) != 4) {
    throw InputError(path.string() + " is not an xdboost encoded split");
  }
  std::getline(in, line);  // column names

  DesignMatrix base(rows, n_cat, n_cont);
  DesignMatrix x = n_ph > 0 ? append_placeholders(base, n_ph) : base;
  std::vector<double> labels(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw InputError(path.string() + ": truncated");
    const auto cells = split_csv_line(line);
    if (cells.size() != 1 + n_cat + n_cont + n_ph) {
      throw InputError(path.string() + ": row " + std::to_string(r) + " has wrong cell count");
    }
    labels[r] = std::stod(cells[0]);
    for (std::size_t f = 0; f < n_cat; ++f) x.cat(r, f) = std::stoi(cells[1 + f]);
    for (std::size_t g = 0; g < n_cont + n_ph; ++g) x.cont(r, g) = std::stod(cells[1 + n_cat + g]);
  }
  return {std::move(x), std::move(labels)};
}

}  // namespace xdboost::data
