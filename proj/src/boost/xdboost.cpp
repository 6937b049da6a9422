#include "xdboost/boost/xdboost.hpp"

#include "xdboost/config_keys.hpp"
#include "xdboost/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace xdboost::boosting {

namespace {

constexpr int kBundleVersion = 1;

void require_finite(std::span<const double> v, std::size_t iteration, const char* stage) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw TrainingError("boosting iteration " + std::to_string(iteration) + ", stage '" +
                          stage + "': non-finite value");
    }
  }
}

// Runs one fit and tags any divergence with the boosting position.
model::FitReport tagged_fit(model::BaseNet& net, std::size_t iteration, const char* stage,
                            const DesignMatrix& x, std::span<const double> targets,
                            const nn::ClassWeights& weights,
                            std::optional<model::ValidationSet> val) {
  try {
    return net.fit(x, targets, weights, val);
  } catch (const TrainingError& e) {
    throw TrainingError("boosting iteration " + std::to_string(iteration) + ", stage '" + stage +
                        "': " + e.what());
  }
}

std::optional<model::ValidationSet> as_validation(const std::optional<LabeledMatrix>& val,
                                                  const DesignMatrix* x,
                                                  std::span<const double> targets) {
  if (!val) return std::nullopt;
  return model::ValidationSet{x, targets};
}

double mean_abs(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

const char* to_string(FitStage s) { return s == FitStage::fit ? "fit" : "refit"; }

const char* to_string(WritePhase p) {
  switch (p) {
    case WritePhase::train: return "train";
    case WritePhase::validation: return "validation";
    case WritePhase::predict: return "predict";
  }
  return "?";
}

void BoostingConfig::validate() const {
  if (iterations == 0) throw ConfigError("boosting needs at least one iteration");
  if (!(error_lr >= 0.0 && error_lr <= 1.0)) {
    throw ConfigError("error learning rate " + std::to_string(error_lr) + " outside [0, 1]");
  }
  if (net.head != model::Head::sigmoid) {
    throw ConfigError("the boosted classifier needs a sigmoid head");
  }
  net.validate();
}

std::uint64_t BoostingConfig::classifier_seed() const { return nn::derive_seed(seed, 0); }

std::uint64_t BoostingConfig::regressor_seed(std::size_t iteration) const {
  return nn::derive_seed(seed, iteration + 1);
}

nlohmann::ordered_json BoostingConfig::to_json() const {
  nlohmann::ordered_json j;
  j["iterations"] = iterations;
  j["error_lr"] = error_lr;
  j["warm_start"] = warm_start;
  j["seed"] = seed;
  j["net"] = net.to_json();
  return j;
}

BoostingConfig BoostingConfig::from_json(const nlohmann::json& j) {
  BoostingConfig c;
  require_known_keys(j, {"iterations", "error_lr", "warm_start", "seed", "net"}, "boosting config");
  try {
    c.iterations = j.value("iterations", c.iterations);
    c.error_lr = j.value("error_lr", c.error_lr);
    c.warm_start = j.value("warm_start", c.warm_start);
    c.seed = j.value("seed", c.seed);
    if (j.contains("net")) c.net = model::BaseNetConfig::from_json(j["net"]);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("boosting config: ") + e.what());
  }
  return c;
}

nlohmann::ordered_json IterationDiagnostics::to_json() const {
  nlohmann::ordered_json j;
  j["iteration"] = iteration;
  j["classifier_train_loss"] = classifier_train_loss;
  j["residual_mean_abs"] = residual_mean_abs;
  j["regressor_train_mae"] = regressor_train_mae;
  j["refit_train_loss"] = refit_train_loss;
  j["classifier_fit"] = classifier_fit.to_json();
  j["regressor_fit"] = regressor_fit.to_json();
  j["classifier_refit"] = classifier_refit.to_json();
  return j;
}

nlohmann::ordered_json TrainingReport::to_json() const {
  auto j = nlohmann::ordered_json::array();
  for (const auto& it : iterations) j.push_back(it.to_json());
  return j;
}

namespace {

data::FeatureSchema extended_schema(data::FeatureSchema schema, const BoostingConfig& config) {
  config.validate();
  if (schema.placeholders != 0 && schema.placeholders != config.iterations) {
    throw ConfigError("schema carries " + std::to_string(schema.placeholders) +
                      " placeholders for a model with " + std::to_string(config.iterations) +
                      " iterations");
  }
  schema.placeholders = config.iterations;
  return schema;
}

}  // namespace

XDBoostModel::XDBoostModel(data::FeatureSchema schema, BoostingConfig config)
    : schema_(extended_schema(std::move(schema), config)),
      config_(std::move(config)),
      classifier_(model::build_base_net(schema_, config_.net, config_.classifier_seed())) {
  reset_regressors();
}

void XDBoostModel::reset_regressors() {
  regressors_.clear();
  const model::BaseNetConfig regressor_config = config_.net.as_regressor();
  for (std::size_t i = 0; i < config_.iterations; ++i) {
    regressors_.push_back(
        model::build_base_net(schema_, regressor_config, config_.regressor_seed(i)));
  }
}

model::BaseNet XDBoostModel::fresh_classifier() const {
  return model::build_base_net(schema_, config_.net, config_.classifier_seed());
}

void XDBoostModel::check_input(const DesignMatrix& x, const char* what) const {
  if (x.placeholders() != config_.iterations) {
    throw UsageError(std::string(what) + ": expected " + std::to_string(config_.iterations) +
                     " placeholder columns, matrix has " + std::to_string(x.placeholders()));
  }
  if (!x.placeholders_zero()) {
    throw UsageError(std::string(what) + ": placeholder columns must start at zero");
  }
}

void XDBoostModel::populate_placeholders(DesignMatrix& x, std::size_t count, WritePhase phase,
                                         BoostingObserver* observer) const {
  for (std::size_t i = 0; i < count; ++i) {
    const std::vector<double> raw = regressors_[i].predict(x);
    std::vector<double> written(raw.size());
    for (std::size_t r = 0; r < raw.size(); ++r) written[r] = config_.error_lr * raw[r];
    if (observer != nullptr) {
      observer->on_placeholder_write(i, x.placeholder_col(i), phase, x, raw, written);
    }
    x.set_placeholder_column(i, written);
  }
}

TrainingReport XDBoostModel::train(const DesignMatrix& x_train, std::span<const double> y_train,
                                   std::optional<LabeledMatrix> val,
                                   const nn::ClassWeights& weights,
                                   BoostingObserver* observer) {
  check_input(x_train, "train");
  if (y_train.size() != x_train.rows()) throw InputError("train: label count mismatch");
  DesignMatrix x = x_train;
  DesignMatrix xv;
  std::vector<double> yv;
  if (val) {
    if (val->x == nullptr) throw InputError("train: validation matrix missing");
    check_input(*val->x, "train (validation)");
    xv = *val->x;
    yv.assign(val->labels.begin(), val->labels.end());
  }

  if (trained_) {
    classifier_ = fresh_classifier();
    reset_regressors();
    trained_ = false;
  }
  TrainingReport report;
  const std::size_t n = config_.iterations;
  for (std::size_t i = 0; i < n; ++i) {
    IterationDiagnostics diag;
    diag.iteration = i;

    // Stage 1: classifier on the current features.
    if (!config_.warm_start) classifier_ = fresh_classifier();
    if (observer != nullptr) observer->on_classifier_fit(i, FitStage::fit, x);
    diag.classifier_fit = tagged_fit(classifier_, i, "classifier fit", x, y_train, weights,
                                     as_validation(val, &xv, yv));
    const std::vector<double> y_hat = classifier_.predict(x);
    require_finite(y_hat, i, "classifier predict");
    diag.classifier_train_loss = classifier_.loss(y_hat, y_train, weights);

    // Stage 2: regressor i on the classifier's residuals.
    std::vector<double> residual(y_hat.size());
    for (std::size_t r = 0; r < residual.size(); ++r) residual[r] = y_train[r] - y_hat[r];
    diag.residual_mean_abs = mean_abs(residual);
    std::vector<double> val_residual;
    if (val) {
      const std::vector<double> v_hat = classifier_.predict(xv);
      val_residual.resize(v_hat.size());
      for (std::size_t r = 0; r < v_hat.size(); ++r) val_residual[r] = yv[r] - v_hat[r];
    }
    if (observer != nullptr) observer->on_regressor_fit(i, x, residual);
    model::BaseNet& regressor = regressors_[i];
    diag.regressor_fit = tagged_fit(regressor, i, "regressor fit", x, residual, {},
                                    as_validation(val, &xv, val_residual));

    // Stage 3: write the scaled error estimate into column i, then refit.
    const std::vector<double> raw = regressor.predict(x);
    require_finite(raw, i, "regressor predict");
    diag.regressor_train_mae = regressor.loss(raw, residual, {});
    std::vector<double> written(raw.size());
    for (std::size_t r = 0; r < raw.size(); ++r) written[r] = config_.error_lr * raw[r];
    if (observer != nullptr) {
      observer->on_placeholder_write(i, x.placeholder_col(i), WritePhase::train, x, raw, written);
    }
    x.set_placeholder_column(i, written);
    if (val) {
      const std::vector<double> v_raw = regressor.predict(xv);
      std::vector<double> v_written(v_raw.size());
      for (std::size_t r = 0; r < v_raw.size(); ++r) v_written[r] = config_.error_lr * v_raw[r];
      if (observer != nullptr) {
        observer->on_placeholder_write(i, xv.placeholder_col(i), WritePhase::validation, xv,
                                       v_raw, v_written);
      }
      xv.set_placeholder_column(i, v_written);
    }

    if (!config_.warm_start) classifier_ = fresh_classifier();
    if (observer != nullptr) observer->on_classifier_fit(i, FitStage::refit, x);
    diag.classifier_refit = tagged_fit(classifier_, i, "classifier refit", x, y_train, weights,
                                       as_validation(val, &xv, yv));
    diag.refit_train_loss = classifier_.loss(classifier_.predict(x), y_train, weights);
    report.iterations.push_back(std::move(diag));
  }
  trained_ = true;
  return report;
}

std::vector<double> XDBoostModel::predict(const DesignMatrix& x_test,
                                          BoostingObserver* observer) const {
  if (!trained_) throw UsageError("predict called on an untrained XDBoost model");
  check_input(x_test, "predict");
  DesignMatrix x = x_test;
  populate_placeholders(x, config_.iterations, WritePhase::predict, observer);
  return classifier_.predict(x);
}

void XDBoostModel::save(const std::filesystem::path& dir) const {
  if (!trained_) throw UsageError("refusing to save an untrained XDBoost model");
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = "xdboost-bundle";
  manifest["version"] = kBundleVersion;
  manifest["iterations"] = config_.iterations;
  manifest["error_lr"] = config_.error_lr;
  manifest["seed"] = config_.seed;
  manifest["classifier_seed"] = config_.classifier_seed();
  auto& seeds = manifest["regressor_seeds"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < config_.iterations; ++i) seeds.push_back(config_.regressor_seed(i));
  manifest["config"] = config_.to_json();
  manifest["schema_hash"] = schema_.hash();
  manifest["classifier"] = "classifier.bin";
  auto& files = manifest["regressors"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < config_.iterations; ++i) {
    files.push_back("regressor_" + std::to_string(i) + ".bin");
  }

  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  std::ofstream(dir / "schema.json") << schema_.to_json().dump(2) << '\n';
  classifier_.save(dir / "classifier.bin");
  for (std::size_t i = 0; i < config_.iterations; ++i) regressors_[i].save(dir / files[i].get<std::string>());
}

XDBoostModel XDBoostModel::load(const std::filesystem::path& dir) {
  auto read_json = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw InputError("cannot open " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      return nlohmann::ordered_json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
      throw InputError("corrupt bundle file " + p.string() + ": " + e.what());
    }
  };
  const auto manifest = read_json(dir / "manifest.json");
  if (manifest.value("format", "") != "xdboost-bundle" ||
      manifest.value("version", 0) != kBundleVersion) {
    throw InputError(dir.string() + " is not a supported XDBoost bundle");
  }
  const auto schema = data::FeatureSchema::from_json(read_json(dir / "schema.json"));
  XDBoostModel m(schema, BoostingConfig::from_json(manifest.at("config")));
  if (manifest.value("schema_hash", std::uint64_t{0}) != m.schema_.hash()) {
    throw InputError("bundle manifest does not match the bundled schema");
  }
  m.classifier_ = model::BaseNet::load(dir / manifest.at("classifier").get<std::string>());
  const auto& files = manifest.at("regressors");
  if (files.size() != m.config_.iterations) throw InputError("bundle regressor count mismatch");
  for (std::size_t i = 0; i < files.size(); ++i) {
    m.regressors_[i] = model::BaseNet::load(dir / files[i].get<std::string>());
  }
  const auto expected = model::layout_of(m.schema_);
  if (!(m.classifier_.layout() == expected)) {
    throw InputError("bundle classifier does not match the bundled schema");
  }
  for (const auto& r : m.regressors_) {
    if (!(r.layout() == expected)) throw InputError("bundle regressor does not match the schema");
  }
  m.trained_ = true;
  return m;
}

XDBoostModel create_xdboost(const data::FeatureSchema& schema, const BoostingConfig& config) {
  config.validate();
  return XDBoostModel(schema.with_placeholders(0), config);
}

model::BaseNet train_unboosted_baseline(const data::FeatureSchema& schema,
                                        const BoostingConfig& config,
                                        const DesignMatrix& x_train,
                                        std::span<const double> y_train,
                                        std::optional<LabeledMatrix> val,
                                        const nn::ClassWeights& weights,
                                        std::vector<model::FitReport>* fits) {
  config.validate();
  const data::FeatureSchema extended = schema.with_placeholders(config.iterations);
  if (x_train.placeholders() != config.iterations || !x_train.placeholders_zero()) {
    throw UsageError("baseline: training matrix needs zeroed placeholder columns");
  }
  if (val && (val->x->placeholders() != config.iterations || !val->x->placeholders_zero())) {
    throw UsageError("baseline: validation matrix needs zeroed placeholder columns");
  }
  auto fresh = [&] { return model::build_base_net(extended, config.net, config.classifier_seed()); };
  model::BaseNet net = fresh();
  const std::optional<model::ValidationSet> v =
      val ? std::optional<model::ValidationSet>(model::ValidationSet{val->x, val->labels})
          : std::nullopt;
  for (std::size_t i = 0; i < config.iterations; ++i) {
    for (const char* stage : {"classifier fit", "classifier refit"}) {
      if (!config.warm_start) net = fresh();
      auto report = tagged_fit(net, i, stage, x_train, y_train, weights, v);
      if (fits != nullptr) fits->push_back(std::move(report));
    }
  }
  return net;
}

}  // namespace xdboost::boosting
