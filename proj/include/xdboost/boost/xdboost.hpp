#pragma once

#include "xdboost/data/schema.hpp"
#include "xdboost/design_matrix.hpp"
#include "xdboost/model/base_net.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace xdboost::boosting {

struct BoostingConfig {
  // Boosting iterations; equals the number of regressors and placeholder columns.
  std::size_t iterations = 3;
  // Multiplier applied to predicted errors before they enter the placeholders.
  double error_lr = 0.5;
  // Classifier network; regressors share the body with a tanh head and MAE loss.
  model::BaseNetConfig net;
  // Continue the classifier from its current parameters on every fit instead
  // of re-initializing it.
  bool warm_start = true;
  std::uint64_t seed = 42;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static BoostingConfig from_json(const nlohmann::json& j);

  std::uint64_t classifier_seed() const;
  std::uint64_t regressor_seed(std::size_t iteration) const;
};

enum class FitStage { fit, refit };
enum class WritePhase { train, validation, predict };

const char* to_string(FitStage s);
const char* to_string(WritePhase p);

// Hooks for instrumenting the boosting loop. Every callback sees the matrix
// exactly as the corresponding step sees it.
class BoostingObserver {
 public:
  virtual ~BoostingObserver() = default;
  virtual void on_classifier_fit(std::size_t /*iteration*/, FitStage /*stage*/,
                                 const DesignMatrix& /*x*/) {}
  virtual void on_regressor_fit(std::size_t /*iteration*/, const DesignMatrix& /*x*/,
                                std::span<const double> /*targets*/) {}
  // `raw` is the regressor output before scaling; `x` is the matrix before the write.
  virtual void on_placeholder_write(std::size_t /*iteration*/, std::size_t /*column*/,
                                    WritePhase /*phase*/, const DesignMatrix& /*x*/,
                                    std::span<const double> /*raw*/,
                                    std::span<const double> /*written*/) {}
};

struct IterationDiagnostics {
  std::size_t iteration = 0;
  model::FitReport classifier_fit;
  double classifier_train_loss = 0.0;
  double residual_mean_abs = 0.0;
  model::FitReport regressor_fit;
  double regressor_train_mae = 0.0;
  model::FitReport classifier_refit;
  double refit_train_loss = 0.0;

  nlohmann::ordered_json to_json() const;
};

struct TrainingReport {
  std::vector<IterationDiagnostics> iterations;
  nlohmann::ordered_json to_json() const;
};

struct LabeledMatrix {
  const DesignMatrix* x = nullptr;
  std::span<const double> labels;
};

class XDBoostModel {
 public:
  XDBoostModel(data::FeatureSchema schema, BoostingConfig config);

  std::size_t iterations() const { return config_.iterations; }
  double error_lr() const { return config_.error_lr; }
  const BoostingConfig& config() const { return config_; }
  // Schema including the placeholder columns.
  const data::FeatureSchema& schema() const { return schema_; }
  const model::BaseNet& classifier() const { return classifier_; }
  const std::vector<model::BaseNet>& regressors() const { return regressors_; }
  bool trained() const { return trained_; }

  // Runs the boosting loop. `x_train` (and `val->x`) must carry this model's
  // placeholder columns, all zero. For each iteration i: fit the classifier,
  // fit regressor i on y - y_hat, write error_lr * regressor output into
  // column i, refit the classifier.
  TrainingReport train(const DesignMatrix& x_train, std::span<const double> y_train,
                       std::optional<LabeledMatrix> val, const nn::ClassWeights& weights,
                       BoostingObserver* observer = nullptr);

  // Fills the placeholder columns with the regressors in order, then scores
  // with the classifier. `x` must carry zeroed placeholders.
  std::vector<double> predict(const DesignMatrix& x, BoostingObserver* observer = nullptr) const;

  // Writes columns 0..count-1 of `x` from regressors 0..count-1.
  void populate_placeholders(DesignMatrix& x, std::size_t count, WritePhase phase,
                             BoostingObserver* observer) const;

  // Bundle directory: manifest.json, schema.json, classifier.bin, regressor_<i>.bin.
  void save(const std::filesystem::path& dir) const;
  static XDBoostModel load(const std::filesystem::path& dir);

 private:
  void check_input(const DesignMatrix& x, const char* what) const;
  model::BaseNet fresh_classifier() const;
  void reset_regressors();

  data::FeatureSchema schema_;
  BoostingConfig config_;
  model::BaseNet classifier_;
  std::vector<model::BaseNet> regressors_;
  bool trained_ = false;
};

// One untrained classifier and `config.iterations` untrained regressors over
// `schema` extended by the placeholder block. Throws ConfigError for
// iterations == 0 or error_lr outside [0, 1].
XDBoostModel create_xdboost(const data::FeatureSchema& schema, const BoostingConfig& config);

// The unboosted reference: the same classifier (seed, config, placeholder
// columns held at zero) put through the same sequence of fits as in train().
model::BaseNet train_unboosted_baseline(const data::FeatureSchema& schema,
                                        const BoostingConfig& config,
                                        const DesignMatrix& x_train,
                                        std::span<const double> y_train,
                                        std::optional<LabeledMatrix> val,
                                        const nn::ClassWeights& weights,
                                        std::vector<model::FitReport>* fits = nullptr);

}  // namespace xdboost::boosting
