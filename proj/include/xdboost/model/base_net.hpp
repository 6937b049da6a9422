#pragma once

#include "xdboost/data/schema.hpp"
#include "xdboost/design_matrix.hpp"
#include "xdboost/nn/adam.hpp"
#include "xdboost/nn/layers.hpp"
#include "xdboost/nn/loss.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xdboost::model {

enum class Head { sigmoid, tanh };
enum class LossKind { weighted_bce, mae };

std::string to_string(Head h);
std::string to_string(LossKind l);

struct BaseNetConfig {
  std::size_t embedding_dim = 64;
  std::vector<std::size_t> hidden = {128, 128, 128};
  Head head = Head::sigmoid;
  LossKind loss = LossKind::weighted_bce;
  nn::AdamConfig adam;
  std::size_t epochs = 20;
  // Epochs without validation improvement before stopping.
  std::size_t patience = 3;
  std::size_t batch_size = 1024;
  bool shuffle = false;

  // Same body with a tanh head trained on MAE.
  BaseNetConfig as_regressor() const;

  // Throws ConfigError on a head/loss mismatch or a zero-sized dimension.
  void validate() const;

  nlohmann::ordered_json to_json() const;
  static BaseNetConfig from_json(const nlohmann::json& j);
};

// Shapes the network is built for.
struct NetLayout {
  std::vector<std::size_t> vocab_sizes;
  std::size_t continuous = 0;  // including placeholders
  std::uint64_t schema_hash = 0;

  std::size_t fields() const { return vocab_sizes.size() + continuous; }
  bool operator==(const NetLayout&) const = default;
};

// Intermediate values of one batched forward evaluation.
struct ForwardPass {
  std::vector<nn::EmbeddingCache> embedding;
  std::vector<nn::EmbeddingCache> linear;
  std::vector<nn::DenseCache> dense;
  nn::Matrix field_vectors;  // batch x (fields * dim)
  nn::Matrix field_sum;      // batch x dim
  nn::Matrix continuous;     // batch x continuous
  std::vector<double> output;
  bool complete = false;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_loss;
};

struct FitReport {
  std::vector<EpochRecord> epochs;
  std::optional<double> initial_val_loss;
  // 0 means the starting parameters were kept.
  std::size_t best_epoch = 0;
  std::optional<double> best_val_loss;
  bool early_stopped = false;
  std::uint64_t optimizer_steps = 0;

  nlohmann::ordered_json to_json() const;
};

struct ValidationSet {
  const DesignMatrix* x = nullptr;
  std::span<const double> targets;
};

// DeepFM-style network: one embedding per categorical field and a learned
// vector per continuous field (scaled by the value) form the field vectors;
// the output is head(bias + linear term + FM pairwise term + MLP(field vectors)).
// The FM and deep parts share the field vectors.
class BaseNet {
 public:
  BaseNet(NetLayout layout, BaseNetConfig config, std::uint64_t seed);

  const BaseNetConfig& config() const { return config_; }
  const NetLayout& layout() const { return layout_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t embedding_tables() const { return embeddings_.size(); }

  // Outputs for `rows` of `x`. When `pass` is given it receives what backward needs.
  std::vector<double> forward(const DesignMatrix& x, std::span<const std::size_t> rows,
                              ForwardPass* pass = nullptr) const;
  double forward_row(const DesignMatrix& x, std::size_t row) const;

  // Accumulates parameter gradients given d loss / d output for the batch in `pass`.
  void backward(const ForwardPass& pass, std::span<const double> grad_output);
  void zero_grad();

  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;

  double loss(std::span<const double> output, std::span<const double> targets,
              const nn::ClassWeights& weights) const;
  std::vector<double> loss_grad(std::span<const double> output, std::span<const double> targets,
                                const nn::ClassWeights& weights) const;

  // Mini-batch Adam over `x` for config().epochs, with early stopping on the
  // validation loss when `val` is given (best parameters restored). Weights
  // only apply to the BCE loss.
  FitReport fit(const DesignMatrix& x, std::span<const double> targets,
                const nn::ClassWeights& weights = {},
                std::optional<ValidationSet> val = std::nullopt);

  std::vector<double> predict(const DesignMatrix& x) const;

  // Binary dump, see docs/model_format.md.
  void save(const std::filesystem::path& path) const;
  static BaseNet load(const std::filesystem::path& path);

  bool same_parameters(const BaseNet& other) const;

 private:
  struct Snapshot {
    std::vector<nn::Matrix> values;
    nn::AdamState adam;
  };

  void check_matrix(const DesignMatrix& x) const;
  void initialize();
  Snapshot snapshot() const;
  void restore(const Snapshot& s);

  BaseNetConfig config_;
  NetLayout layout_;
  std::uint64_t seed_ = 0;
  nn::Rng shuffle_rng_;

  std::vector<nn::EmbeddingTable> embeddings_;
  std::vector<nn::EmbeddingTable> linear_categorical_;
  nn::Parameter projections_;         // continuous x dim
  nn::Parameter linear_continuous_;   // 1 x continuous
  nn::Parameter bias_;                // 1 x 1
  std::vector<nn::DenseLayer> mlp_;   // hidden relu layers, then a 1-unit identity layer
  nn::AdamState adam_;
};

NetLayout layout_of(const data::FeatureSchema& schema);

// Throws ConfigError for a schema without fields or an invalid config.
BaseNet build_base_net(const data::FeatureSchema& schema, const BaseNetConfig& config,
                       std::uint64_t seed);

// Sum over unordered pairs i < j of <v_i, v_j>, via (|sum v|^2 - sum |v|^2) / 2.
double fm_pairwise(std::span<const std::vector<double>> field_vectors);

}  // namespace xdboost::model
