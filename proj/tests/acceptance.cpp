// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "discipline.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

#include "xdboost/boost/xdboost.hpp"
#include "xdboost/data/schema.hpp"
#include "xdboost/data/split.hpp"
#include "xdboost/harness/config.hpp"
#include "xdboost/harness/experiment.hpp"
#include "xdboost/harness/synthetic.hpp"
#include "xdboost/metrics.hpp"

#include "CLI11.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace xdboost;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

harness::ExperimentConfig desk_config() {
  return harness::ExperimentConfig::load(fs::path(XDBOOST_SOURCE_DIR) / "configs" / "desk.json");
}

// Encoded sub-training / test matrices of one synthetic dataset.
struct Encoded {
  data::FeatureSchema schema;
  DesignMatrix x_train, x_val, x_test;
  std::vector<double> y_train, y_val, y_test;
  nn::ClassWeights weights;
};

Encoded encode_synthetic(const harness::ExperimentConfig& config, double percent, std::size_t n) {
  const auto loaded = harness::load_and_split(config);
  const auto train = harness::training_records(loaded, percent, config.split);
  Encoded e;
  e.schema = data::build_schema(train, loaded.spec);
  e.x_train = append_placeholders(data::encode(train, e.schema), n);
  e.x_val = append_placeholders(data::encode(loaded.splits.val, e.schema), n);
  e.x_test = append_placeholders(data::encode(loaded.splits.test, e.schema), n);
  e.y_train = data::labels_of(train);
  e.y_val = data::labels_of(loaded.splits.val);
  e.y_test = data::labels_of(loaded.splits.test);
  e.weights = data::class_weights(e.y_train);
  return e;
}

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  std::size_t entries = 0;
  for (int k = 0; k < 100; ++k) {
    const auto c = gradcheck::random_case(rng, k % 2 == 1);
    const auto r = gradcheck::check(c, 1e-5);
    worst = std::max(worst, r.relative_error);
    entries += r.checked;
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 30.0,
          "100 cases (50 BCE, 50 MAE), " + std::to_string(entries) + " entries, max rel err " +
              fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome auc_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const int n = std::uniform_int_distribution<int>(2, 64)(rng);
    // Coarse scores on even instances force ties.
    const int levels = k % 2 == 0 ? std::uniform_int_distribution<int>(1, 5)(rng) : 1000000;
    std::vector<double> scores(static_cast<std::size_t>(n)), labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      scores[i] = std::uniform_int_distribution<int>(0, levels)(rng) / static_cast<double>(levels);
      labels[i] = std::bernoulli_distribution(0.4)(rng) ? 1.0 : 0.0;
    }
    labels[0] = 1.0;
    labels[1] = 0.0;
    worst = std::max(worst, std::abs(metrics::auc(scores, labels) - oracle::brute_force_auc(scores, labels)));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 5.0,
          "200 instances, max |diff| " + fmt("%.3g", worst) + ", " + fmt("%.3f", secs) + " s"};
}

Outcome class_weight_formula() {
  std::mt19937_64 rng(99);
  double worst = 0.0;
  bool nonclick_ok = true;
  for (int k = 0; k < 50; ++k) {
    const auto n = std::uniform_int_distribution<std::uint64_t>(2, 5000)(rng);
    const auto clicks = std::uniform_int_distribution<std::uint64_t>(1, n - 1)(rng);
    std::vector<double> labels(n, 0.0);
    std::fill_n(labels.begin(), clicks, 1.0);
    std::shuffle(labels.begin(), labels.end(), rng);
    const auto w = data::class_weights(labels);
    const auto exact = oracle::click_weight(n - clicks, clicks);
    worst = std::max(worst, std::abs(w.click - exact.value()));
    nonclick_ok = nonclick_ok && w.nonclick == 1.0;
  }
  return {worst <= 1e-12 && nonclick_ok,
          "50 label multisets, max |diff| " + fmt("%.3g", worst)};
}

Outcome collapse() {
  auto config = desk_config();
  config.model.error_lr = 0.0;
  const auto e = encode_synthetic(config, 5, config.model.iterations);
  const boosting::LabeledMatrix val{&e.x_val, e.y_val};
  auto m = boosting::create_xdboost(e.schema, config.model);
  m.train(e.x_train, e.y_train, val, e.weights);
  const auto base =
      boosting::train_unboosted_baseline(e.schema, config.model, e.x_train, e.y_train, val, e.weights);
  const auto a = m.predict(e.x_test);
  const auto b = base.predict(e.x_test);
  double worst = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) worst = std::max(worst, std::abs(a[r] - b[r]));
  return {a.size() == b.size() && !a.empty() && worst <= 1e-12,
          std::to_string(a.size()) + " test rows, max |diff| " + fmt("%.3g", worst)};
}

Outcome placeholder_discipline() {
  auto config = desk_config();
  config.model.iterations = 3;
  const auto e = encode_synthetic(config, 5, 3);
  auto m = boosting::create_xdboost(e.schema, config.model);
  discipline::Auditor audit(config.model.error_lr);
  m.train(e.x_train, e.y_train, boosting::LabeledMatrix{&e.x_val, e.y_val}, e.weights, &audit);
  m.predict(e.x_test, &audit);
  const std::vector<std::size_t> once{0, 1, 2};
  std::size_t violations = audit.violations;
  if (audit.order(boosting::WritePhase::train) != once) ++violations;
  if (audit.order(boosting::WritePhase::predict) != once) ++violations;
  return {violations == 0, "N=3, " + std::to_string(audit.writes.size()) + " column writes, " +
                               std::to_string(violations) + " violations"};
}

Outcome boosting_lift() {
  const auto t0 = Clock::now();
  const auto base_config = desk_config();
  std::ostringstream detail;
  bool pass = true;
  for (double percent : {5.0, 10.0}) {
    std::vector<double> ll_gain, auc_gain;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto config = base_config;
      config.synthetic->seed = seed;
      config.model.seed = seed;
      const auto loaded = harness::load_and_split(config);
      config.field_spec = loaded.spec;
      const auto train = harness::training_records(loaded, percent, config.split);
      const auto run = harness::run_experiment(config, train, loaded.splits.val, loaded.splits.test);
      ll_gain.push_back(run.result.base.test.log_loss - run.result.boosted.test.log_loss);
      auc_gain.push_back(run.result.boosted.test.auc - run.result.base.test.auc);
    }
    const double ll = median(ll_gain), auc = median(auc_gain);
    pass = pass && ll > 0.0 && auc > 0.0;
    detail << percent << "%: median logloss gain " << fmt("%+.4f", ll) << ", median AUC gain "
           << fmt("%+.4f", auc) << "; ";
  }
  detail << fmt("%.1f", seconds_since(t0)) << " s";
  return {pass, detail.str()};
}

Outcome sweep_protocol(const fs::path& workdir) {
  auto config = desk_config();
  config.sweep_percentages = {1, 5, 10, 20, 40, 72};
  config.output_dir = workdir / "sweep";
  config.model.net.epochs = 2;
  const auto sweep = harness::cmd_sweep(config);

  // Independent reconstruction of the training region.
  const auto loaded = harness::load_and_split(config);
  const auto& region = loaded.splits.train;
  const auto test_hash = harness::record_hash(loaded.splits.test);
  bool pass = sweep.runs.size() == 6 && sweep.test_hash == test_hash;
  std::size_t previous = 0;
  for (const auto& run : sweep.runs) {
    pass = pass && run.status == "ok" && run.test_hash == test_hash;
    // Each set is the most recent suffix of the region, so sets nest.
    pass = pass && run.train_records > previous && run.train_records <= region.size();
    if (!pass) break;
    const std::span<const data::InteractionRecord> suffix(region.data() + region.size() - run.train_records,
                                                          run.train_records);
    pass = pass && run.train_hash == harness::record_hash(suffix);
    previous = run.train_records;
  }
  return {pass, std::to_string(sweep.runs.size()) + " runs, test hash " + harness::hex(test_hash) +
                    ", largest set " + std::to_string(previous) + " rows"};
}

Outcome coldstart_protocol(const fs::path& workdir) {
  auto config = desk_config();
  config.synthetic->cold_start_fraction = 0.3;
  config.sub_training_percent = 10;
  config.output_dir = workdir / "coldstart";
  const auto generated = harness::generate_synthetic(*config.synthetic, config.split);
  const auto result = harness::cmd_coldstart(config);

  const auto loaded = harness::load_and_split(config);
  const auto train = harness::training_records(loaded, 10, config.split);
  std::set<std::string> seen;
  for (const auto& r : train) seen.insert(r.categorical[1]);
  std::vector<data::InteractionRecord> unseen;
  for (const auto& r : loaded.splits.test) {
    if (!seen.count(r.categorical[1])) unseen.push_back(r);
  }
  const bool pass = result.status == "ok" && result.test_records == generated.novel_item_rows &&
                    unseen.size() == generated.novel_item_rows &&
                    result.test_hash == harness::record_hash(unseen) &&
                    result.original_test_records == loaded.splits.test.size();
  return {pass, "novel rows " + std::to_string(generated.novel_item_rows) + " of " +
                    std::to_string(loaded.splits.test.size()) + ", evaluated " +
                    std::to_string(result.test_records)};
}

Outcome determinism(const fs::path& workdir) {
  auto config = desk_config();
  config.output_dir = workdir / "train_a";
  const auto a = harness::cmd_train(config);
  config.output_dir = workdir / "train_b";
  const auto b = harness::cmd_train(config);
  const std::string da = a.metrics_json().dump(), db = b.metrics_json().dump();
  return {da == db, std::to_string(da.size()) + " bytes of metrics, " + (da == db ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"XDBoost acceptance gate"};
  fs::path workdir = fs::temp_directory_path() / "xdboost_acceptance";
  app.add_option("--workdir", workdir, "Scratch directory for run outputs");
  CLI11_PARSE(app, argc, argv);
  fs::remove_all(workdir);
  fs::create_directories(workdir);

  const auto start = Clock::now();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"AUC oracle equivalence", auc_oracle},
      {"class weight formula", class_weight_formula},
      {"E_LR=0 collapse", collapse},
      {"placeholder discipline", placeholder_discipline},
      {"desk-scale boosting lift", boosting_lift},
      {"sub-training protocol", [&] { return sweep_protocol(workdir); }},
      {"cold-start protocol", [&] { return coldstart_protocol(workdir); }},
      {"determinism", [&] { return determinism(workdir); }},
  };

  int failures = 0;
  int index = 1;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %s  %s: %s\n", index++, o.pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }

  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  const double peak_mb = static_cast<double>(usage.ru_maxrss) / 1024.0;
  const double total = seconds_since(start);
  const bool budget = total < 900.0 && peak_mb < 2048.0;
  if (!budget) ++failures;
  std::printf("criterion %2d %s  end-to-end budget: %.1f s (limit 900), peak RSS %.0f MB (limit 2048)\n",
              index, budget ? "PASS" : "FAIL", total, peak_mb);
  std::printf("%d of %d criteria failed\n", failures, index);
  return failures == 0 ? 0 : 1;
}
