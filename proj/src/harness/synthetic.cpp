#include "xdboost/harness/synthetic.hpp"

#include "xdboost/error.hpp"
#include "xdboost/nn/tensor.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace xdboost::harness {

namespace {

constexpr std::size_t kRank = 4;
constexpr std::size_t kSegments = 6;
constexpr double kInteractionScale = 1.0;
constexpr double kSegmentScale = 3.0;
constexpr double kIntercept = -1.0;
constexpr double kLatentSd = 0.5;
constexpr double kZipf = 0.8;

using Latent = std::array<double, kRank>;

double dot(const Latent& a, const Latent& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < kRank; ++k) s += a[k] * b[k];
  return s;
}

std::string field_prefix(std::size_t f) {
  if (f == 0) return "u";
  if (f == 1) return "i";
  return "c" + std::to_string(f - 2) + "_";
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticOptions& options,
                                    const data::SplitSpec& split) {
  options.validate();
  split.validate();
  nn::Rng rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t n_cat = options.categorical_fields;
  const std::size_t vocab = options.vocab;

  SyntheticDataset out;
  out.spec.user_column = "user_id";
  out.spec.item_column = "item_id";
  out.spec.categorical = {"user_id", "item_id"};
  for (std::size_t f = 2; f < n_cat; ++f) out.spec.categorical.push_back("ctx_" + std::to_string(f - 2));
  for (std::size_t g = 0; g < options.continuous_fields; ++g) {
    out.spec.continuous.push_back("num_" + std::to_string(g));
  }

  // Token latents, one extra block for novel items.
  const double latent_sd = kLatentSd;
  auto draw_latent = [&] {
    Latent z;
    for (double& v : z) v = latent_sd * normal(rng);
    return z;
  };
  std::vector<std::vector<Latent>> latent(n_cat);
  for (auto& field : latent) {
    for (std::size_t k = 0; k < vocab; ++k) field.push_back(draw_latent());
  }
  constexpr std::size_t kNovelItems = 25;
  std::vector<Latent> novel_latent;
  for (std::size_t k = 0; k < kNovelItems; ++k) novel_latent.push_back(draw_latent());

  std::array<double, kSegments> segment_bias{};
  for (double& b : segment_bias) b = kSegmentScale * (2.0 * unit(rng) - 1.0);

  std::vector<double> popularity(vocab);
  for (std::size_t k = 0; k < vocab; ++k) popularity[k] = 1.0 / std::pow(static_cast<double>(k + 1), kZipf);
  std::discrete_distribution<std::size_t> token(popularity.begin(), popularity.end());

  // Pairs of categorical fields that interact.
  std::vector<std::pair<std::size_t, std::size_t>> pairs = {{0, 1}};
  if (n_cat > 2) pairs.emplace_back(1, 2);
  if (n_cat > 4) pairs.emplace_back(3, 4);
  const std::size_t segment_field = n_cat - 1;

  const data::SplitSizes sizes = data::split_sizes(options.rows, split);
  const std::size_t test_start = sizes.train + sizes.val;
  const bool cold = options.cold_start_fraction > 0.0;

  out.records.reserve(options.rows);
  for (std::size_t row = 0; row < options.rows; ++row) {
    data::InteractionRecord rec;
    rec.timestamp = static_cast<double>(row);
    std::vector<std::size_t> tok(n_cat);
    for (std::size_t f = 0; f < n_cat; ++f) tok[f] = token(rng);

    bool novel = false;
    if (cold && row >= sizes.train - std::min(sizes.train, vocab) && row < sizes.train) {
      tok[1] = row - (sizes.train - std::min(sizes.train, vocab));
    }
    if (cold && row >= test_start) {
      const std::size_t k = row - test_start;
      const double f = options.cold_start_fraction;
      novel = std::floor(static_cast<double>(k + 1) * f + 1e-9) >
              std::floor(static_cast<double>(k) * f + 1e-9);
    }

    double logit = kIntercept;
    for (const auto& [a, b] : pairs) {
      const Latent& za = (a == 1 && novel) ? novel_latent[tok[1] % kNovelItems] : latent[a][tok[a]];
      const Latent& zb = (b == 1 && novel) ? novel_latent[tok[1] % kNovelItems] : latent[b][tok[b]];
      logit += kInteractionScale * dot(za, zb);
    }
    logit += segment_bias[tok[segment_field] % kSegments];

    for (std::size_t g = 0; g < options.continuous_fields; ++g) {
      const double v = g % 2 == 0 ? unit(rng) : normal(rng);
      rec.continuous.emplace_back(v);
      logit += g % 2 == 0 ? 0.8 * (v - 0.5) : -0.4 * (v * v - 1.0);
    }

    for (std::size_t f = 0; f < n_cat; ++f) {
      if (f == 1 && novel) {
        rec.categorical.push_back("new" + std::to_string(tok[1] % kNovelItems));
      } else {
        rec.categorical.push_back(field_prefix(f) + std::to_string(tok[f]));
      }
    }
    const double p = 1.0 / (1.0 + std::exp(-logit));
    rec.label = unit(rng) < p ? 1.0 : 0.0;
    if (novel) ++out.novel_item_rows;
    out.records.push_back(std::move(rec));
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const SyntheticDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << dataset.spec.timestamp_column << ',' << dataset.spec.label_column;
  for (const auto& n : dataset.spec.categorical) out << ',' << n;
  for (const auto& n : dataset.spec.continuous) out << ',' << n;
  out << '\n';
  char buf[32];
  for (const auto& r : dataset.records) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.timestamp);
    out << buf << ',' << (r.label > 0.5 ? 1 : 0);
    for (const auto& t : r.categorical) out << ',' << t;
    for (const auto& v : r.continuous) {
      out << ',';
      if (v) {
        std::snprintf(buf, sizeof(buf), "%.17g", *v);
        out << buf;
      }
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace xdboost::harness
