#pragma once

#include "xdboost/data/records.hpp"
#include "xdboost/nn/loss.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace xdboost::data {

struct SplitSpec {
  double train = 0.72;
  double val = 0.08;
  double test = 0.20;

  void validate() const;
};

struct Splits {
  std::vector<InteractionRecord> train;
  std::vector<InteractionRecord> val;
  std::vector<InteractionRecord> test;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

// |test| = floor(test * n), |val| = floor(val * n); the remainder goes to train.
SplitSizes split_sizes(std::size_t n, const SplitSpec& spec = {});

// Stable sort by timestamp, then earliest -> train, next -> val, latest -> test.
// Sizes follow split_sizes().
Splits chronological_split(std::vector<InteractionRecord> records, const SplitSpec& spec = {});

// Number of records a sub-training set of `percent` % of `total` holds.
std::size_t sub_training_size(std::size_t total, double percent, const SplitSpec& spec = {});

// The chronologically last floor(percent/100 * total) records of the training
// region, where `total` counts the full dataset. `percent` must lie in
// (0, 100 * spec.train].
std::vector<InteractionRecord> sub_training(std::span<const InteractionRecord> train_region,
                                            std::size_t total, double percent,
                                            const SplitSpec& spec = {});

// Non-clicks weigh 1; clicks weigh non-clicks / clicks when that exceeds 1.
nn::ClassWeights class_weights(std::span<const double> labels);

// Drops test rows whose item (categorical field `item_field`) occurs in `train`.
std::vector<InteractionRecord> cold_start_filter(std::span<const InteractionRecord> test,
                                                 std::span<const InteractionRecord> train,
                                                 std::size_t item_field);

}  // namespace xdboost::data
