#include "xdboost/data/split.hpp"

#include "xdboost/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

namespace xdboost::data {

namespace {

// floor(fraction * n), tolerant of representation error such as 0.08 * 100.
std::size_t floor_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace

void SplitSpec::validate() const {
  if (train <= 0.0 || val < 0.0 || test <= 0.0) {
    throw ConfigError("split fractions must be positive (val may be zero)");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
}

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec) {
  SplitSizes s;
  s.test = floor_count(spec.test, n);
  s.val = floor_count(spec.val, n);
  s.train = n - s.val - s.test;
  return s;
}

Splits chronological_split(std::vector<InteractionRecord> records, const SplitSpec& spec) {
  spec.validate();
  if (records.size() < 3) {
    throw SplitError("need at least 3 records to split, got " + std::to_string(records.size()));
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const InteractionRecord& a, const InteractionRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
  const SplitSizes sizes = split_sizes(records.size(), spec);
  const std::size_t n_train = sizes.train;
  const std::size_t n_val = sizes.val;

  Splits out;
  auto begin = std::make_move_iterator(records.begin());
  out.train.assign(begin, begin + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(begin + static_cast<std::ptrdiff_t>(n_train),
                 begin + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(begin + static_cast<std::ptrdiff_t>(n_train + n_val),
                  std::make_move_iterator(records.end()));
  return out;
}

std::size_t sub_training_size(std::size_t total, double percent, const SplitSpec& spec) {
  const double limit = 100.0 * spec.train;
  if (!(percent > 0.0) || percent > limit + 1e-9) {
    throw ConfigError("sub-training percentage " + std::to_string(percent) +
                      " outside (0, " + std::to_string(limit) + "]");
  }
  return floor_count(percent / 100.0, total);
}

std::vector<InteractionRecord> sub_training(std::span<const InteractionRecord> train_region,
                                            std::size_t total, double percent,
                                            const SplitSpec& spec) {
  const std::size_t count = std::min(sub_training_size(total, percent, spec), train_region.size());
  if (count == 0) {
    throw ConfigError("sub-training set of " + std::to_string(percent) + "% of " +
                      std::to_string(total) + " records is empty");
  }
  return {train_region.end() - static_cast<std::ptrdiff_t>(count), train_region.end()};
}

nn::ClassWeights class_weights(std::span<const double> labels) {
  std::size_t clicks = 0;
  std::size_t nonclicks = 0;
  for (double y : labels) {
    if (y == 1.0) {
      ++clicks;
    } else if (y == 0.0) {
      ++nonclicks;
    } else {
      throw WeightingError("class_weights: label " + std::to_string(y) + " is not binary");
    }
  }
  if (clicks == 0) throw WeightingError("class_weights: no clicks in the training labels");
  const double ratio = static_cast<double>(nonclicks) / static_cast<double>(clicks);
  return nn::ClassWeights{1.0, ratio > 1.0 ? ratio : 1.0};
}

std::vector<InteractionRecord> cold_start_filter(std::span<const InteractionRecord> test,
                                                 std::span<const InteractionRecord> train,
                                                 std::size_t item_field) {
  std::unordered_set<std::string> seen;
  for (const auto& r : train) seen.insert(r.categorical.at(item_field));
  std::vector<InteractionRecord> out;
  for (const auto& r : test) {
    if (!seen.contains(r.categorical.at(item_field))) out.push_back(r);
  }
  return out;
}

}  // namespace xdboost::data
