#pragma once

// Small encoded click-log problems for boosting tests.

#include "xdboost/boost/xdboost.hpp"
#include "xdboost/data/schema.hpp"
#include "xdboost/data/split.hpp"
#include "xdboost/harness/synthetic.hpp"

#include <vector>

namespace fixture {

struct Problem {
  xdboost::data::FeatureSchema schema;  // no placeholders
  xdboost::DesignMatrix x_train, x_val, x_test;
  std::vector<double> y_train, y_val, y_test;
  xdboost::nn::ClassWeights weights;
};

// Synthetic log of `rows` rows split 72/8/20, encoded with `placeholders` zero columns.
inline Problem synthetic_problem(std::size_t rows, std::size_t placeholders, std::uint64_t seed = 3) {
  using namespace xdboost;
  harness::SyntheticOptions opts;
  opts.rows = rows;
  opts.seed = seed;
  opts.vocab = 20;
  const auto ds = harness::generate_synthetic(opts);
  const auto splits = data::chronological_split(ds.records);
  Problem p;
  p.schema = data::build_schema(splits.train, ds.spec);
  const auto extended = p.schema.with_placeholders(placeholders);
  p.x_train = data::encode(splits.train, extended);
  p.x_val = data::encode(splits.val, extended);
  p.x_test = data::encode(splits.test, extended);
  p.y_train = data::labels_of(splits.train);
  p.y_val = data::labels_of(splits.val);
  p.y_test = data::labels_of(splits.test);
  p.weights = data::class_weights(p.y_train);
  return p;
}

inline xdboost::boosting::BoostingConfig small_boosting(std::size_t n, double error_lr) {
  xdboost::boosting::BoostingConfig c;
  c.iterations = n;
  c.error_lr = error_lr;
  c.seed = 11;
  c.net.embedding_dim = 4;
  c.net.hidden = {8, 8};
  c.net.batch_size = 64;
  c.net.epochs = 4;
  c.net.adam.learning_rate = 3e-3;
  return c;
}

}  // namespace fixture
