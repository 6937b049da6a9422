#pragma once

#include "xdboost/data/records.hpp"
#include "xdboost/data/split.hpp"
#include "xdboost/harness/config.hpp"

#include <filesystem>
#include <vector>

namespace xdboost::harness {

struct SyntheticDataset {
  std::vector<data::InteractionRecord> records;
  data::FieldSpec spec;
  // Test-region rows carrying an item id that never occurs earlier.
  std::size_t novel_item_rows = 0;
};

// Chronologically ordered click log. Fields: user_id, item_id, ctx_0.. (all
// categorical, Zipf-like token popularity) and num_0.. (continuous). The
// click logit is a sparse sum of low-rank pairwise interactions (user x item,
// item x ctx_0, ctx_1 x ctx_2), a segment bias keyed on the last categorical
// token modulo 6, and smooth continuous effects.
//
// With cold_start_fraction > 0 an evenly spread share of the test region gets
// fresh item ids, and the last `vocab` rows of the training region cycle
// through every regular item so any sub-training set of at least that many
// rows has seen them all.
SyntheticDataset generate_synthetic(const SyntheticOptions& options,
                                    const data::SplitSpec& split = {});

void write_csv(const std::filesystem::path& path, const SyntheticDataset& dataset);

}  // namespace xdboost::harness
