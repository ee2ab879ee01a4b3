#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pcfnet/errors.hpp"
#include "pcfnet/features.hpp"
#include "pcfnet/filters.hpp"
#include "pcfnet/model_io.hpp"
#include "pcfnet/rng.hpp"

using namespace pcfnet;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pcfnet_features_test_" + name);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

double ref_logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Rows j0..j5 over four periods; payment 0 means "did not pay".
WindowSample worked_window() {
  return WindowSample(6, 4,
                      {
                          1.0, 1.0, 1.0, 1.0,  // pays every period
                          0.0, 1.0, 1.0, 1.0,  //
                          0.0, 0.0, 1.0, 1.0,  //
                          2.0, 0.0, 0.0, 1.0,  //
                          1.0, 1.0, 0.0, 0.0,  // stopped two periods ago
                          0.0, 0.0, 0.0, 0.0,  // never pays
                      },
                      1);
}

std::vector<WindowSample> toy_samples(std::uint64_t seed, int m, int s, int count) {
  Rng rng(derive_seed(seed, 42));
  std::vector<WindowSample> samples;
  std::vector<double> payments(static_cast<std::size_t>(m) * s);
  for (int i = 0; i < count; ++i) {
    const int label = rng.bernoulli(0.5) ? 1 : 0;
    for (std::size_t cell = 0; cell < payments.size(); ++cell) {
      const double pay_prob = label == 1 ? 0.85 : 0.2;
      payments[cell] = rng.bernoulli(pay_prob) ? rng.uniform(0.5, 3.0) : 0.0;
    }
    samples.emplace_back(m, s, payments, label);
  }
  return samples;
}

}  // namespace

TEST_CASE("features of a worked example window") {
  const WindowSample sample = worked_window();
  const FeatureVector fv = extract_features(sample);

  REQUIRE(fv.npc.size() == 6);
  CHECK(fv.npc[0] == 0.0);
  CHECK(fv.npc[1] == 0.0);
  CHECK(fv.npc[2] == 0.0);
  CHECK(fv.npc[3] == 0.0);
  CHECK(fv.npc[4] == 2.0);
  CHECK(fv.npc[5] == 4.0);
  // Current-period insurance count: j0..j3 pay in the newest period.
  CHECK(fv.ic == 4);
  // Period counts are 3,3,3,4, all above the default threshold of 2.
  CHECK(fv.pc == 4);

  CHECK(extract_features(sample, 3).pc == 1);  // only the newest count exceeds 3
  CHECK(extract_features(sample, 0).pc == 4);
  CHECK(extract_features(sample, 4).pc == 0);
  CHECK_THROWS_AS(extract_features(sample, -1), std::invalid_argument);
}

TEST_CASE("any positive payment counts as paying") {
  WindowSample sample = worked_window();
  sample.payments[5 * 4 + 3] = 0.001;  // j5 pays a token amount in the newest period
  const FeatureVector fv = extract_features(sample);
  CHECK(fv.npc[5] == 0.0);
  CHECK(fv.ic == 5);
  CHECK(fv.pc == 4);
}

TEST_CASE("npc matches the naive filter on the not-pay indicator") {
  Rng rng(derive_seed(99, 7));
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(5));
    const int s = 2 + static_cast<int>(rng.below(9));
    std::vector<double> payments(static_cast<std::size_t>(m) * s);
    for (double& p : payments) p = rng.bernoulli(0.5) ? rng.uniform(0.1, 9.0) : 0.0;
    const WindowSample sample(m, s, payments, 0);
    const FeatureVector fv = extract_features(sample);
    for (int j = 0; j < m; ++j) {
      std::vector<double> not_pay(s);
      for (int t = 0; t < s; ++t) not_pay[t] = sample.at(j, t) > 0.0 ? 0.0 : 1.0;
      CHECK(fv.npc[j] ==
            static_cast<double>(naive_persistent_change(TimeSeriesWindow(not_pay))));
    }
  }
}

TEST_CASE("feature rows follow the subset's canonical column order") {
  const FeatureVector fv = extract_features(worked_window());
  const std::vector<double> full = feature_row(fv, FeatureSubset::NpcIcPc);
  REQUIRE(full.size() == 8);
  for (int j = 0; j < 6; ++j) CHECK(full[j] == fv.npc[j]);
  CHECK(full[6] == 4.0);  // ic
  CHECK(full[7] == 4.0);  // pc

  CHECK(feature_row(fv, FeatureSubset::Npc) == std::vector<double>(fv.npc));
  CHECK(feature_row(fv, FeatureSubset::PcIc) == std::vector<double>{4.0, 4.0});
  CHECK(feature_row(fv, FeatureSubset::Pc) == std::vector<double>{4.0});
  CHECK(feature_row(fv, FeatureSubset::Ic) == std::vector<double>{4.0});
}

TEST_CASE("feature names mirror the row layout") {
  const std::vector<std::string> insurance{"a", "b"};
  CHECK(feature_names(FeatureSubset::NpcIcPc, insurance) ==
        std::vector<std::string>{"npc_a", "npc_b", "ic", "pc"});
  CHECK(feature_names(FeatureSubset::Npc, insurance) ==
        std::vector<std::string>{"npc_a", "npc_b"});
  CHECK(feature_names(FeatureSubset::PcIc, insurance) == std::vector<std::string>{"ic", "pc"});
  CHECK(feature_names(FeatureSubset::Pc, insurance) == std::vector<std::string>{"pc"});
  CHECK(feature_names(FeatureSubset::Ic, insurance) == std::vector<std::string>{"ic"});
}

TEST_CASE("subset ids and labels round-trip") {
  REQUIRE(all_subsets().size() == 5);
  CHECK(all_subsets()[0] == FeatureSubset::NpcIcPc);
  CHECK(all_subsets()[1] == FeatureSubset::Npc);
  CHECK(all_subsets()[2] == FeatureSubset::PcIc);
  CHECK(all_subsets()[3] == FeatureSubset::Pc);
  CHECK(all_subsets()[4] == FeatureSubset::Ic);

  for (FeatureSubset subset : all_subsets()) {
    CHECK(subset_from_id(subset_id(subset)) == subset);
  }
  CHECK(subset_id(FeatureSubset::NpcIcPc) == "npc_ic_pc");
  CHECK(subset_label(FeatureSubset::NpcIcPc) == "NPC, IC, PC");
  CHECK(subset_label(FeatureSubset::PcIc) == "PC, IC");
  CHECK_THROWS_AS(subset_from_id("npcicpc"), ConfigError);
  CHECK_THROWS_WITH_AS(subset_from_id("bogus"),
                       "unknown feature subset 'bogus' (expected npc_ic_pc, npc, pc_ic, pc or "
                       "ic)",
                       ConfigError);
}

TEST_CASE("feature csv export is byte-stable") {
  // Two small samples with hand-computed features.
  const WindowSample a(2, 3, {0.0, 0.0, 4.0, 1.0, 0.0, 0.0}, 1);
  const WindowSample b(2, 3, {0.0, 0.0, 0.0, 3.0, 3.0, 3.0}, 0);
  const std::vector<WindowSample> samples{a, b};
  const auto path = temp_path("features.csv");
  export_features_csv(path.string(), samples);
  CHECK(slurp(path) ==
        "npc_1,npc_2,ic,pc,label\n"
        "0,2,1,0,1\n"
        "3,0,1,0,0\n");
  std::filesystem::remove(path);

  CHECK_THROWS_AS(export_features_csv(temp_path("empty.csv").string(), {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(export_features_csv("/nonexistent_dir/out.csv", samples), ConfigError);
}

TEST_CASE("logistic prediction matches a hand computation") {
  LogisticModel model;
  model.m = 2;
  model.s = 3;
  model.subset = FeatureSubset::PcIc;
  model.feature_names = {"ic", "pc"};
  model.weights = {0.5, -1.0};
  model.intercept = 0.25;

  // Sample with ic = 1, pc = 0 at the default threshold.
  const WindowSample sample(2, 3, {0.0, 0.0, 4.0, 1.0, 0.0, 0.0}, 1);
  const double prob = baseline_predict(model, sample);
  CHECK(prob == doctest::Approx(ref_logistic(0.25 + 0.5 * 1.0)).epsilon(1e-12));

  model.weights = {0.5, -1.0, 3.0};
  CHECK_THROWS_AS(baseline_predict(model, sample), std::invalid_argument);
}

TEST_CASE("mlp prediction matches a hand computation") {
  MlpModel model;
  model.m = 2;
  model.s = 3;
  model.hidden = 2;
  model.subset = FeatureSubset::Ic;
  model.feature_names = {"ic"};
  model.w1 = {0.3, -0.2};  // 2 hidden x 1 feature
  model.b1 = {0.1, 0.0};
  model.w2 = {1.0, -2.0};
  model.b2 = 0.05;

  const WindowSample sample(2, 3, {0.0, 0.0, 4.0, 1.0, 0.0, 0.0}, 1);  // ic = 1
  const double h0 = ref_logistic(0.3 * 1.0 + 0.1);
  const double h1 = ref_logistic(-0.2 * 1.0);
  const double expected = ref_logistic(0.05 + 1.0 * h0 - 2.0 * h1);
  CHECK(baseline_predict(model, sample) == doctest::Approx(expected).epsilon(1e-12));

  model.w1 = {0.3, -0.2, 0.9};
  CHECK_THROWS_AS(baseline_predict(model, sample), std::invalid_argument);
}

TEST_CASE("baselines learn a separable toy problem deterministically") {
  const int m = 3, s = 4;
  const std::vector<WindowSample> train = toy_samples(31, m, s, 160);
  const std::vector<WindowSample> test = toy_samples(32, m, s, 80);
  const std::vector<std::string> names{"a", "b", "c"};

  TrainConfig config;
  config.epochs = 80;
  config.batch_size = 32;
  config.seed = 5;

  for (BaselineKind kind : {BaselineKind::Logistic, BaselineKind::Mlp}) {
    CAPTURE(kind == BaselineKind::Logistic ? "logistic" : "mlp");
    const BaselineFit fit =
        fit_baseline(kind, FeatureSubset::NpcIcPc, train, test, names, config);
    CHECK(fit.test_accuracy >= 0.9);
    REQUIRE(fit.history.size() == 80);
    CHECK(fit.history.front().epoch == 1);
    CHECK(fit.history.back().epoch == 80);
    CHECK(fit.test_accuracy == fit.history.back().test_accuracy);
    CHECK(fit.history.back().train_loss < fit.history.front().train_loss);

    // Refit reproduces the parameters bit for bit.
    const BaselineFit again =
        fit_baseline(kind, FeatureSubset::NpcIcPc, train, test, names, config);
    if (kind == BaselineKind::Logistic) {
      const auto& first = std::get<LogisticModel>(fit.model);
      const auto& second = std::get<LogisticModel>(again.model);
      CHECK(first.weights == second.weights);
      CHECK(first.intercept == second.intercept);
      CHECK(first.feature_names ==
            std::vector<std::string>{"npc_a", "npc_b", "npc_c", "ic", "pc"});
    } else {
      const auto& first = std::get<MlpModel>(fit.model);
      const auto& second = std::get<MlpModel>(again.model);
      CHECK(first.w1 == second.w1);
      CHECK(first.b1 == second.b1);
      CHECK(first.w2 == second.w2);
      CHECK(first.b2 == second.b2);
      CHECK(first.hidden == 16);
    }

    // evaluate_baseline agrees with the training loop's final test accuracy.
    const Metrics metrics = evaluate_baseline(fit.model, test);
    CHECK(metrics.accuracy == fit.test_accuracy);
    CHECK(metrics.n == test.size());

    // And with a manual tally over baseline_predict.
    long correct = 0;
    for (const WindowSample& sample : test) {
      const int yhat = baseline_predict(fit.model, sample) >= 0.5 ? 1 : 0;
      if (yhat == sample.label) ++correct;
    }
    CHECK(metrics.accuracy == static_cast<double>(correct) / test.size());
  }
}

TEST_CASE("baseline fitting validates its inputs") {
  const std::vector<WindowSample> samples = toy_samples(33, 2, 3, 10);
  const std::vector<std::string> names{"a", "b"};
  TrainConfig config;
  config.epochs = 1;
  CHECK_THROWS_AS(
      fit_baseline(BaselineKind::Logistic, FeatureSubset::Npc, {}, samples, names, config),
      ConfigError);
  CHECK_THROWS_AS(
      fit_baseline(BaselineKind::Logistic, FeatureSubset::Npc, samples, {}, names, config),
      ConfigError);
  CHECK_THROWS_AS(fit_baseline(BaselineKind::Logistic, FeatureSubset::Npc, samples, samples,
                               {"a", "b", "c"}, config),
                  ConfigError);
  CHECK_THROWS_AS(fit_baseline(BaselineKind::Mlp, FeatureSubset::Npc, samples, samples, names,
                               config, 2, 0),
                  std::invalid_argument);
}

TEST_CASE("comparison table formatting") {
  std::vector<ComparisonRow> rows{
      {"IntNN", "-", 0.97125},
      {"Logistic", "NPC, IC, PC", 0.9},
  };
  const std::string table = format_comparison_table(rows);
  CHECK(table ==
        " # Model     Inputs       Accuracy\n"
        " 1 IntNN     -            0.97125\n"
        " 2 Logistic  NPC, IC, PC  0.90000\n");

  const std::string with_footnote = format_comparison_table(rows, "note");
  CHECK(with_footnote.substr(with_footnote.size() - 5) == "note\n");

  CHECK_THROWS_AS(format_comparison_table({}), std::invalid_argument);
  rows[0].accuracy = std::nan("");
  CHECK_THROWS_AS(format_comparison_table(rows), ConfigError);
  rows[0].accuracy = 1.5;
  CHECK_THROWS_AS(format_comparison_table(rows), ConfigError);
}

TEST_CASE("logistic model files round-trip exactly") {
  LogisticModel model;
  model.m = 3;
  model.s = 4;
  model.ic_threshold = 1;
  model.subset = FeatureSubset::PcIc;
  model.feature_names = {"ic", "pc"};
  model.weights = {0.1 + 0.2, -0.0};  // awkward doubles on purpose
  model.intercept = 1e-300;

  const auto path = temp_path("logistic.model");
  save_baseline_model(model, path.string());
  CHECK(peek_model_kind(path.string()) == ModelKind::Logistic);

  const BaselineModel loaded = load_baseline_model(path.string());
  const auto& back = std::get<LogisticModel>(loaded);
  CHECK(back.m == 3);
  CHECK(back.s == 4);
  CHECK(back.ic_threshold == 1);
  CHECK(back.subset == FeatureSubset::PcIc);
  CHECK(back.feature_names == model.feature_names);
  REQUIRE(back.weights.size() == 2);
  CHECK(back.weights[0] == 0.1 + 0.2);
  CHECK(std::signbit(back.weights[1]));
  CHECK(back.intercept == 1e-300);

  // A baseline file is not a network file.
  CHECK_THROWS_AS(load_network_model(path.string()), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("mlp model files round-trip exactly") {
  MlpModel model;
  model.m = 2;
  model.s = 5;
  model.ic_threshold = 2;
  model.hidden = 3;
  model.subset = FeatureSubset::Npc;
  model.feature_names = {"npc_a", "npc_b"};
  model.w1 = {0.1, -0.25, 1.0 / 3.0, 2.5, -1e-12, 7.0};
  model.b1 = {0.5, 0.0, -0.125};
  model.w2 = {1.5, -2.5, 0.75};
  model.b2 = -0.3;

  const auto path = temp_path("mlp.model");
  save_baseline_model(model, path.string());
  CHECK(peek_model_kind(path.string()) == ModelKind::Mlp);

  const BaselineModel loaded = load_baseline_model(path.string());
  const auto& back = std::get<MlpModel>(loaded);
  CHECK(back.m == 2);
  CHECK(back.s == 5);
  CHECK(back.hidden == 3);
  CHECK(back.subset == FeatureSubset::Npc);
  CHECK(back.feature_names == model.feature_names);
  CHECK(back.w1 == model.w1);
  CHECK(back.b1 == model.b1);
  CHECK(back.w2 == model.w2);
  CHECK(back.b2 == model.b2);

  // Loaded and original models predict identically.
  const std::vector<WindowSample> samples = toy_samples(44, 2, 5, 10);
  for (const WindowSample& sample : samples) {
    CHECK(baseline_predict(loaded, sample) == baseline_predict(BaselineModel(model), sample));
  }
  std::filesystem::remove(path);
}

TEST_CASE("malformed baseline files are rejected") {
  const auto path = temp_path("bad.model");

  auto write_file = [&](const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
  };

  write_file("logistic_version 2\nm 2\n");
  CHECK_THROWS_AS(load_baseline_model(path.string()), DataError);

  write_file("logistic_version 1\nm 2\ns 3\nic_threshold 2\nsubset bogus\n");
  CHECK_THROWS_AS(load_baseline_model(path.string()), ConfigError);

  // Weight count disagrees with the declared subset width.
  write_file(
      "logistic_version 1\nm 2\ns 3\nic_threshold 2\nsubset pc_ic\n"
      "features ic pc\nweights 0.5\nintercept 0\n");
  CHECK_THROWS_AS(load_baseline_model(path.string()), DataError);

  // Truncated mid-file.
  write_file("mlp_version 1\nm 2\ns 3\n");
  CHECK_THROWS_AS(load_baseline_model(path.string()), DataError);

  CHECK_THROWS_AS(load_baseline_model("/nonexistent/never.model"), ConfigError);
  std::filesystem::remove(path);
}
