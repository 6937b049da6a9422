#include "doctest.h"

#include "xdboost/data/records.hpp"
#include "xdboost/data/schema.hpp"
#include "xdboost/data/split.hpp"
#include "xdboost/error.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace xdboost;
using namespace xdboost::data;

namespace {

FieldSpec simple_spec() {
  return FieldSpec::parse(R"({"timestamp": "ts", "label": "click", "user": "user", "item": "item",
    "fields": {"user": "categorical", "item": "categorical", "price": "continuous"}})");
}

std::vector<InteractionRecord> numbered(std::size_t n) {
  std::vector<InteractionRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].timestamp = static_cast<double>(i);
    out[i].categorical = {"u" + std::to_string(i % 3), "i" + std::to_string(i)};
    out[i].continuous = {static_cast<double>(i)};
    out[i].label = static_cast<double>(i % 2);
  }
  return out;
}

IngestResult ingest_text(const std::string& text, const IngestOptions& opts = {}) {
  std::istringstream in(text);
  return ingest_csv(in, simple_spec(), opts);
}

}  // namespace

// ---- field spec ----

TEST_CASE("field spec parses roles and preserves field order") {
  const auto spec = simple_spec();
  CHECK(spec.categorical == std::vector<std::string>{"user", "item"});
  CHECK(spec.continuous == std::vector<std::string>{"price"});
  CHECK(spec.item_index() == 1);
  CHECK(spec.user_index() == 0);
  const auto again = FieldSpec::parse(spec.to_json().dump());
  CHECK(again.to_json() == spec.to_json());
}

TEST_CASE("field spec rejects a field declared twice with different types") {
  CHECK_THROWS_AS(FieldSpec::parse(R"({"user": "u", "item": "i",
      "fields": {"u": "categorical", "i": "categorical", "u": "continuous"}})"),
                  SchemaError);
  CHECK_THROWS_AS(FieldSpec::parse(R"({"user": "u", "item": "i",
      "fields": {"u": "categorical", "i": "continuous"}})"),
                  SchemaError);
  CHECK_THROWS_AS(FieldSpec::parse(R"({"user": "u", "item": "i",
      "fields": {"u": "categorical", "i": "categorical", "x": "ordinal"}})"),
                  SchemaError);
  CHECK_THROWS_AS(FieldSpec::parse("not json"), SchemaError);
}

// ---- ingestion ----

TEST_CASE("header-only file gives no records") {
  const auto r = ingest_text("ts,click,user,item,price\n");
  CHECK(r.records.empty());
  CHECK(r.malformed == 0);
}

TEST_CASE("well-formed rows are read in file order") {
  const auto r = ingest_text(
      "ts,click,user,item,price\n"
      "3,1,a,x,1.5\n"
      "1,0,b,y,2\n"
      "2,0,\"c,d\",z,\n");
  REQUIRE(r.records.size() == 3);
  CHECK(r.records[0].timestamp == 3.0);
  CHECK(r.records[0].label == 1.0);
  CHECK(r.records[0].categorical == std::vector<std::string>{"a", "x"});
  CHECK(r.records[1].continuous[0] == 2.0);
  CHECK(r.records[2].categorical[0] == "c,d");
  CHECK_FALSE(r.records[2].continuous[0].has_value());
  CHECK(r.records[2].line == 4);
}

TEST_CASE("column order in the file does not matter") {
  const auto r = ingest_text("price,item,user,click,ts\n7,x,a,1,10\n");
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].categorical == std::vector<std::string>{"a", "x"});
  CHECK(r.records[0].continuous[0] == 7.0);
  CHECK(r.records[0].timestamp == 10.0);
}

TEST_CASE("empty categorical cells become the missing token") {
  const auto r = ingest_text("ts,click,user,item,price\n1,0,,x,1\n");
  CHECK(r.records[0].categorical[0] == kMissingToken);
}

TEST_CASE("non-binary label in strict mode names the line") {
  try {
    ingest_text("ts,click,user,item,price\n1,0,a,x,1\n2,2,a,x,1\n");
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("lenient mode skips and counts malformed rows") {
  IngestOptions opts;
  opts.strict = false;
  const auto r = ingest_text(
      "ts,click,user,item,price\n1,0,a,x,1\n2,2,a,x,1\n3,1,a\n4,1,b,y,abc\n5,1,b,y,2\n", opts);
  CHECK(r.records.size() == 2);
  CHECK(r.malformed == 3);
}

TEST_CASE("missing required column and missing file are ingestion errors") {
  CHECK_THROWS_AS(ingest_text("ts,click,user,price\n1,0,a,1\n"), IngestError);
  CHECK_THROWS_AS(ingest_text("ts,user,item,price\n1,a,x,1\n"), IngestError);
  CHECK_THROWS_AS(ingest_csv("/nonexistent/file.csv", simple_spec()), IngestError);
  CHECK_THROWS_AS(ingest_text(""), IngestError);
}

TEST_CASE("scoring inputs may omit label and timestamp") {
  IngestOptions opts;
  opts.require_label = false;
  opts.require_timestamp = false;
  opts.keep_raw = true;
  const auto r = ingest_text("user,item,price\na,x,1\n", opts);
  REQUIRE(r.records.size() == 1);
  CHECK(r.raw_lines[0] == "a,x,1");
  CHECK(r.header_line == "user,item,price");
}

// ---- splitting ----

TEST_CASE("split sizes on 100 and 10 records") {
  auto s = chronological_split(numbered(100));
  CHECK(s.train.size() == 72);
  CHECK(s.val.size() == 8);
  CHECK(s.test.size() == 20);
  s = chronological_split(numbered(10));
  CHECK(s.train.size() == 8);
  CHECK(s.val.size() == 0);
  CHECK(s.test.size() == 2);
}

TEST_CASE("split is a chronological partition") {
  std::mt19937_64 rng(5);
  auto records = numbered(257);
  std::shuffle(records.begin(), records.end(), rng);
  const auto s = chronological_split(records);
  CHECK(s.train.size() + s.val.size() + s.test.size() == 257);
  CHECK(s.train.back().timestamp <= s.val.front().timestamp);
  CHECK(s.val.back().timestamp <= s.test.front().timestamp);
  for (std::size_t i = 1; i < s.train.size(); ++i) {
    CHECK(s.train[i - 1].timestamp <= s.train[i].timestamp);
  }
}

TEST_CASE("equal timestamps keep file order") {
  auto records = numbered(20);
  for (auto& r : records) r.timestamp = 1.0;
  const auto s = chronological_split(records);
  for (std::size_t i = 0; i < s.train.size(); ++i) CHECK(s.train[i].categorical[1] == "i" + std::to_string(i));
  CHECK(s.test.back().categorical[1] == "i19");
}

TEST_CASE("fewer than three records is a split error") {
  CHECK_THROWS_AS(chronological_split(numbered(2)), SplitError);
  SplitSpec bad{0.5, 0.3, 0.3};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("sub-training takes the most recent records of the training region") {
  const auto s = chronological_split(numbered(100));
  auto sub = sub_training(s.train, 100, 10);
  REQUIRE(sub.size() == 10);
  CHECK(sub.front().timestamp == 62.0);  // positions 63..72, 1-based
  CHECK(sub.back().timestamp == 71.0);
  CHECK(sub_training(s.train, 100, 72).size() == 72);
  sub = sub_training(s.train, 100, 1);
  REQUIRE(sub.size() == 1);
  CHECK(sub[0].timestamp == 71.0);
  CHECK_THROWS_AS(sub_training(s.train, 100, 73), ConfigError);
  CHECK_THROWS_AS(sub_training(s.train, 100, 0), ConfigError);
  CHECK_THROWS_AS(sub_training(s.train, 10, 5), ConfigError);  // floor gives 0 rows
}

TEST_CASE("sub-training sets are nested") {
  const auto s = chronological_split(numbered(1000));
  std::vector<double> pct{1, 5, 10, 20, 40, 60, 72};
  for (std::size_t k = 1; k < pct.size(); ++k) {
    const auto small = sub_training(s.train, 1000, pct[k - 1]);
    const auto large = sub_training(s.train, 1000, pct[k]);
    REQUIRE(small.size() <= large.size());
    const std::size_t off = large.size() - small.size();
    for (std::size_t i = 0; i < small.size(); ++i) CHECK(small[i] == large[off + i]);
  }
}

// ---- class weights ----

TEST_CASE("class weights follow the imbalance ratio rule") {
  std::vector<double> y(125, 0.0);
  for (std::size_t i = 0; i < 25; ++i) y[i] = 1.0;
  auto w = class_weights(y);
  CHECK(w.nonclick == 1.0);
  CHECK(w.click == 4.0);

  y.assign(100, 0.0);
  for (std::size_t i = 0; i < 50; ++i) y[i] = 1.0;
  w = class_weights(y);
  CHECK(w.click == 1.0);

  y.assign(1000, 0.0);
  for (std::size_t i = 0; i < 152; ++i) y[i] = 1.0;
  CHECK(class_weights(y).click == doctest::Approx(848.0 / 152.0).epsilon(1e-12));

  y.assign(10, 1.0);
  y[0] = 0.0;  // more clicks than non-clicks
  CHECK(class_weights(y).click == 1.0);

  CHECK_THROWS_AS(class_weights(std::vector<double>(5, 0.0)), WeightingError);
  CHECK_THROWS_AS(class_weights(std::vector<double>{0, 1, 2}), WeightingError);
}

// ---- cold start ----

TEST_CASE("cold-start filter keeps only unseen items") {
  auto make = [](std::vector<std::string> items) {
    std::vector<InteractionRecord> out;
    for (auto& it : items) {
      InteractionRecord r;
      r.categorical = {"u", it};
      out.push_back(r);
    }
    return out;
  };
  const auto test = make({"A", "B", "C", "A"});
  auto f = cold_start_filter(test, make({"B"}), 1);
  REQUIRE(f.size() == 3);
  CHECK(f[0].categorical[1] == "A");
  CHECK(f[1].categorical[1] == "C");
  CHECK(cold_start_filter(test, make({"Z"}), 1).size() == 4);
  CHECK(cold_start_filter(test, make({"A", "B", "C"}), 1).empty());
}

// ---- schema and encoding ----

TEST_CASE("schema is built from training tokens only, unseen tokens hit OOV") {
  std::vector<InteractionRecord> train(3), test(2);
  train[0].categorical = {"a", "x"};
  train[1].categorical = {"b", "x"};
  train[2].categorical = {"a", "y"};
  for (std::size_t i = 0; i < 3; ++i) train[i].continuous = {static_cast<double>(i) * 2.0};
  test[0].categorical = {"a", "q"};
  test[0].continuous = {10.0};
  test[1].categorical = {"c", "y"};
  test[1].continuous = {std::nullopt};

  const auto schema = build_schema(train, simple_spec());
  CHECK(schema.categorical[0].vocab_size() == 3);  // {a, b} + OOV
  CHECK(schema.vocab_sizes() == std::vector<std::size_t>{3, 3});
  const auto x = encode(test, schema);
  CHECK(x.cat(0, 0) == schema.categorical[0].lookup("a"));
  CHECK(x.cat(0, 1) == schema.categorical[1].oov());
  CHECK(x.cat(1, 0) == schema.categorical[0].oov());
  CHECK(x.cat(1, 1) == encode(train, schema).cat(2, 1));
  // min-max on train range [0, 4], clamped; missing -> train mean (2 -> 0.5)
  CHECK(x.cont(0, 0) == 1.0);
  CHECK(x.cont(1, 0) == 0.5);
  CHECK(encode(test, schema) == x);
}

TEST_CASE("constant continuous field encodes to zero, unscaled passes through") {
  std::vector<InteractionRecord> train(2);
  for (auto& r : train) {
    r.categorical = {"a", "x"};
    r.continuous = {3.0};
  }
  auto schema = build_schema(train, simple_spec());
  CHECK(encode(train, schema).cont(0, 0) == 0.0);
  schema = build_schema(train, simple_spec(), SchemaOptions{false});
  CHECK(encode(train, schema).cont(0, 0) == 3.0);
}

TEST_CASE("building a schema from no records is an error") {
  CHECK_THROWS_AS(build_schema(std::vector<InteractionRecord>{}, simple_spec()), SchemaError);
}

TEST_CASE("placeholders: appended as zero columns at the end") {
  const auto records = numbered(5);
  const auto schema = build_schema(records, simple_spec());
  const auto x = encode(records, schema);
  const auto y = append_placeholders(x, 2);
  CHECK(y.rows() == 5);
  CHECK(y.cols() == x.cols() + 2);
  CHECK(y.placeholders() == 2);
  CHECK(y.placeholders_zero());
  for (std::size_t r = 0; r < 5; ++r) {
    CHECK(y.cont(r, 0) == x.cont(r, 0));
    CHECK(y.placeholder(r, 0) == 0.0);
    CHECK(y.placeholder(r, 1) == 0.0);
  }
  CHECK(append_placeholders(x, 1).cols() == x.cols() + 1);
  CHECK_THROWS_AS(append_placeholders(y, 1), UsageError);
  CHECK_THROWS_AS(append_placeholders(x, 0), UsageError);

  const auto with = encode(records, schema.with_placeholders(3));
  CHECK(with.placeholders() == 3);
  CHECK(with.placeholders_zero());
}

TEST_CASE("schema JSON round-trip preserves the hash") {
  const auto schema = build_schema(numbered(30), simple_spec()).with_placeholders(2);
  const auto back = FeatureSchema::from_json(schema.to_json());
  CHECK(back.hash() == schema.hash());
  CHECK(back.to_json() == schema.to_json());
  auto j = schema.to_json();
  j["placeholders"] = 5;
  CHECK_THROWS_AS(FeatureSchema::from_json(j), SchemaError);
}

TEST_CASE("encoded split files round-trip") {
  const auto records = numbered(12);
  const auto schema = build_schema(records, simple_spec()).with_placeholders(1);
  const auto x = encode(records, schema);
  const auto y = labels_of(records);
  const auto path = std::filesystem::temp_directory_path() / "xdboost_encoded_test.csv";
  write_encoded(path, schema, x, y);
  const auto [x2, y2] = read_encoded(path);
  CHECK(x2 == x);
  CHECK(y2 == y);
  std::filesystem::remove(path);
}
