#include "pcfnet/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "pcfnet/config.hpp"
#include "pcfnet/data.hpp"
#include "pcfnet/errors.hpp"
#include "pcfnet/experiments.hpp"
#include "pcfnet/features.hpp"
#include "pcfnet/filters.hpp"
#include "pcfnet/model_io.hpp"
#include "pcfnet/network.hpp"
#include "pcfnet/rng.hpp"
#include "pcfnet/textio.hpp"
#include "pcfnet/training.hpp"

namespace pcfnet {
namespace {

AppConfig load_config_or_default(const std::string& path) {
  if (path.empty()) {
    AppConfig config;
    config.validate();
    return config;
  }
  return load_config(path);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ConfigError("failed while writing '" + path + "'");
}

void write_metrics_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::string text = "epoch,train_loss,train_acc,test_acc\n";
  for (const EpochStats& row : history) {
    text += std::to_string(row.epoch) + "," + format_double(row.train_loss) + "," +
            format_double(row.train_accuracy) + "," + format_double(row.test_accuracy) + "\n";
  }
  write_text_file(path, text);
}

std::vector<std::string> names_or_default(const std::string& names_csv, int m) {
  std::vector<std::string> names;
  if (names_csv.empty()) {
    if (m == 7) return default_insurance_names();
    for (int j = 1; j <= m; ++j) names.push_back("pay_" + std::to_string(j));
    return names;
  }
  for (const std::string& piece : split_on(names_csv, ',')) names.push_back(trim(piece));
  if (names.size() != static_cast<std::size_t>(m)) {
    throw ConfigError("--names lists " + std::to_string(names.size()) + " names but the model has " +
                      std::to_string(m) + " insurances");
  }
  return names;
}

void print_metrics(const Metrics& metrics) {
  std::cout << "samples " << metrics.n << "\n";
  std::cout << "accuracy " << format_double(metrics.accuracy) << "\n";
  std::cout << "mean_loss " << format_double(metrics.mean_loss) << "\n";
  std::cout << "confusion actual=0: " << metrics.confusion[0][0] << " " << metrics.confusion[0][1]
            << "\n";
  std::cout << "confusion actual=1: " << metrics.confusion[1][0] << " " << metrics.confusion[1][1]
            << "\n";
}

// Shared train/test preparation: window the panel, draw the balanced split,
// move payments onto the training scale.
SampleSplit prepare_split(const PanelDataset& dataset, const AppConfig& config) {
  std::vector<WindowSample> samples = windowize(dataset, config.s);
  SampleSplit split = balanced_split(samples, config.n_per_class, config.train.seed);
  scale_payments(split.train, config.train.payment_scale);
  scale_payments(split.test, config.train.payment_scale);
  return split;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string config_path, out_path, teacher_path;
  std::optional<std::uint64_t> seed;
};

void cmd_generate(const GenerateArgs& args) {
  AppConfig config = load_config_or_default(args.config_path);
  if (args.seed) {
    config.generator.seed = *args.seed;
    config.train.seed = *args.seed;
  }
  PanelDataset dataset;
  if (args.teacher_path.empty()) {
    dataset = generate_synthetic(config.generator);
  } else {
    const NetworkParams teacher = load_network_model(args.teacher_path);
    dataset = generate_teacher_labeled(config.generator, teacher);
  }
  save_csv(dataset, args.out_path);
  std::cout << "wrote " << dataset.records.size() << " records (" << config.generator.n_units
            << " units x " << config.generator.n_periods << " periods) to " << args.out_path
            << "\n";
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data_path, model_kind, features_id = "npc_ic_pc", config_path, out_path,
              metrics_path;
};

void cmd_train(const TrainArgs& args) {
  const AppConfig config = load_config_or_default(args.config_path);
  const PanelDataset dataset = load_csv(args.data_path);
  const SampleSplit split = prepare_split(dataset, config);
  const std::string metrics_path =
      args.metrics_path.empty() ? args.out_path + ".metrics.csv" : args.metrics_path;

  std::vector<EpochStats> history;
  double test_accuracy = 0.0;
  if (args.model_kind == "intnn") {
    NetworkFit fitted = train_network(split.train, split.test, config.channels, config.train);
    save_network_model(fitted.params, args.out_path);
    history = std::move(fitted.history);
    test_accuracy = fitted.test_accuracy;
  } else {
    const BaselineKind kind =
        args.model_kind == "logistic" ? BaselineKind::Logistic : BaselineKind::Mlp;
    BaselineFit fitted =
        fit_baseline(kind, subset_from_id(args.features_id), split.train, split.test,
                     dataset.insurance_names, config.train, config.ic_threshold,
                     config.mlp_hidden);
    save_baseline_model(fitted.model, args.out_path);
    history = std::move(fitted.history);
    test_accuracy = fitted.test_accuracy;
  }
  write_metrics_csv(metrics_path, history);
  std::cout << "model " << args.model_kind << " written to " << args.out_path << "\n";
  std::cout << "test accuracy " << format_double(test_accuracy) << "\n";
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string model_path, data_path, config_path;
};

void cmd_evaluate(const EvaluateArgs& args) {
  const AppConfig config = load_config_or_default(args.config_path);
  const PanelDataset dataset = load_csv(args.data_path);
  if (peek_model_kind(args.model_path) == ModelKind::Network) {
    const NetworkParams params = load_network_model(args.model_path);
    if (params.m != dataset.m) {
      throw ConfigError("model expects m=" + std::to_string(params.m) + " but dataset has m=" +
                        std::to_string(dataset.m));
    }
    std::vector<WindowSample> samples = windowize(dataset, params.s);
    if (samples.empty()) throw DataError("dataset has no labeled windows of length s");
    scale_payments(samples, config.train.payment_scale);
    const NetworkObjective objective(std::move(samples), params.m, params.s,
                                     params.channel_count(), 0.0);
    print_metrics(evaluate(objective, NetworkObjective::pack(params)));
  } else {
    const BaselineModel model = load_baseline_model(args.model_path);
    const int model_m = std::visit([](const auto& m) { return m.m; }, model);
    const int model_s = std::visit([](const auto& m) { return m.s; }, model);
    if (model_m != dataset.m) {
      throw ConfigError("model expects m=" + std::to_string(model_m) + " but dataset has m=" +
                        std::to_string(dataset.m));
    }
    const std::vector<WindowSample> samples = windowize(dataset, model_s);
    if (samples.empty()) throw DataError("dataset has no labeled windows of length s");
    print_metrics(evaluate_baseline(model, samples));
  }
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string data_path, config_path, out_path;
};

void cmd_compare(const CompareArgs& args) {
  const AppConfig config = load_config_or_default(args.config_path);
  const PanelDataset dataset = load_csv(args.data_path);
  const ComparisonResult result = run_comparison(dataset, config);
  write_text_file(args.out_path, result.table);
  std::cout << result.table;
}

// ---------------------------------------------------------------------------
// interpret
// ---------------------------------------------------------------------------

struct InterpretArgs {
  std::string model_path, names_csv, logistic_path;
};

void cmd_interpret(const InterpretArgs& args) {
  if (peek_model_kind(args.model_path) != ModelKind::Network) {
    throw ConfigError("'" + args.model_path +
                      "' is a baseline model; interpret needs the interpretable network");
  }
  const NetworkParams params = load_network_model(args.model_path);
  const std::vector<std::string> names = names_or_default(args.names_csv, params.m);
  std::cout << format_interpretation(interpret(params, names));
  if (!args.logistic_path.empty()) {
    const BaselineModel baseline = load_baseline_model(args.logistic_path);
    const LogisticModel* logistic = std::get_if<LogisticModel>(&baseline);
    if (logistic == nullptr) {
      throw ConfigError("--logistic must point to a logistic model file");
    }
    if (logistic->m != params.m) {
      throw ConfigError("logistic model covers m=" + std::to_string(logistic->m) +
                        " insurances, the network has m=" + std::to_string(params.m));
    }
    if (logistic->subset != FeatureSubset::NpcIcPc && logistic->subset != FeatureSubset::Npc) {
      throw ConfigError("the sign comparison needs a logistic model fitted on the NPC block "
                        "(subset npc_ic_pc or npc)");
    }
    const std::vector<double> coefficients(logistic->weights.begin(),
                                           logistic->weights.begin() + params.m);
    std::cout << "\n" << format_sign_comparison(compare_interpretations(params, names,
                                                                        coefficients));
  }
}

// ---------------------------------------------------------------------------
// filter-demo
// ---------------------------------------------------------------------------

struct FilterDemoArgs {
  std::string mode, k_csv = "0.25,0.5,0.75,1.0", out_path;
  int T = 1000;
  double noise = 0.05;
  std::uint64_t seed = 1;
};

void cmd_filter_demo(const FilterDemoArgs& args) {
  if (args.T <= 0) throw ConfigError("--T must be > 0");
  if (!(args.noise >= 0.0 && args.noise <= 1.0)) throw ConfigError("--noise must lie in [0,1]");
  std::vector<double> ks;
  for (const std::string& piece : split_on(args.k_csv, ',')) {
    ks.push_back(parse_double(trim(piece), "--k"));
  }
  if (ks.empty()) throw ConfigError("--k must list at least one smoothing value");

  const int T = args.T;
  const int step = std::max(1, T / 20);
  std::string csv = "t0,k,value\n";
  for (int t0 = 0; t0 < T; t0 += step) {
    // Step series: zeros, then ones for the last t0 periods.
    std::vector<double> series(T, 0.0);
    for (int t = T - t0; t < T; ++t) series[t] = 1.0;
    if (args.mode == "example2") {
      // A random `noise` fraction of the post-change points are damaged to
      // 0.9. One stream per t0 so every k sees the same damaged series.
      Rng rng(derive_seed(args.seed, 2000 + static_cast<std::uint64_t>(t0)));
      for (int t = T - t0; t < T; ++t) {
        if (rng.bernoulli(args.noise)) series[t] = 0.9;
      }
    }
    const TimeSeriesWindow window(series);
    for (double k : ks) {
      const double value = smooth_persistent_change(window, SmoothingParam(k));
      csv += std::to_string(t0) + "," + format_double(k) + "," + format_double(value) + "\n";
    }
  }
  write_text_file(args.out_path, csv);
  std::cout << "wrote " << args.mode << " curves for " << ks.size() << " k values to "
            << args.out_path << "\n";
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

struct GradCheckArgs {
  std::string model_kind = "network";
  std::uint64_t seed = 1;
  std::size_t perturb_coordinate = 0;
  double perturb_bias = 0.0;

  std::optional<GradPerturbation> perturbation() const {
    if (perturb_bias == 0.0) return std::nullopt;
    return GradPerturbation{perturb_coordinate, perturb_bias};
  }
};

// Relative error scale used by the shared checker: |a-fd|/max(1,|a|,|fd|).
double rel_error(double analytic, double fd) {
  return std::abs(analytic - fd) / std::max({1.0, std::abs(analytic), std::abs(fd)});
}

double filter_fd_max_error(const GradCheckArgs& args) {
  const double h = 1e-5;
  double max_err = 0.0;
  for (int instance = 0; instance < 25; ++instance) {
    Rng rng(derive_seed(args.seed, 100 + static_cast<std::uint64_t>(instance)));
    const std::size_t T = 2 + static_cast<std::size_t>(rng.below(28));
    std::vector<double> x(T);
    for (double& v : x) v = rng.uniform(0.01, 0.99);
    const double k = rng.uniform(0.05, 0.95);
    const double upstream = rng.uniform(-2.0, 2.0);

    FilterGradient grad =
        smooth_filter_gradient(TimeSeriesWindow(x), SmoothingParam(k), upstream);
    if (const std::optional<GradPerturbation> perturb = args.perturbation()) {
      const std::size_t coord = perturb->coordinate % (T + 1);
      if (coord < T) {
        grad.wrt_input[coord] += perturb->bias;
      } else {
        grad.wrt_k += perturb->bias;
      }
    }
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<double> plus = x, minus = x;
      plus[t] += h;
      minus[t] -= h;
      const double fd = upstream *
                        (smooth_persistent_change(TimeSeriesWindow(plus), SmoothingParam(k)) -
                         smooth_persistent_change(TimeSeriesWindow(minus), SmoothingParam(k))) /
                        (2.0 * h);
      max_err = std::max(max_err, rel_error(grad.wrt_input[t], fd));
    }
    const TimeSeriesWindow window(x);
    const double fd_k = upstream *
                        (smooth_persistent_change(window, SmoothingParam(k + h)) -
                         smooth_persistent_change(window, SmoothingParam(k - h))) /
                        (2.0 * h);
    max_err = std::max(max_err, rel_error(grad.wrt_k, fd_k));
  }
  return max_err;
}

// Small seeded windows exercising zeros and positive payments alike.
std::vector<WindowSample> gradcheck_samples(std::uint64_t seed, int m, int s, int count) {
  Rng rng(derive_seed(seed, 500));
  std::vector<WindowSample> samples;
  std::vector<double> payments(static_cast<std::size_t>(m) * s);
  for (int i = 0; i < count; ++i) {
    for (double& p : payments) p = rng.bernoulli(0.4) ? 0.0 : rng.uniform(0.1, 2.5);
    samples.emplace_back(m, s, payments, rng.bernoulli(0.5) ? 1 : 0);
  }
  return samples;
}

int cmd_gradcheck(const GradCheckArgs& args) {
  double max_err = 0.0;
  double threshold = 0.0;
  if (args.model_kind == "quadratic") {
    Rng rng(derive_seed(args.seed, 400));
    std::vector<double> targets(5), params(5);
    for (double& t : targets) t = rng.uniform(-2.0, 2.0);
    for (double& p : params) p = rng.uniform(-2.0, 2.0);
    const QuadraticObjective objective(targets);
    const std::vector<std::size_t> batch{0};
    // A quadratic has no third derivative, so a wide step leaves only
    // rounding error in the central difference.
    const GradCheckReport report = gradient_check(objective, params, batch, 1e-3,
                                                  args.perturbation());
    max_err = report.max_rel_error;
    threshold = 1e-10;
  } else if (args.model_kind == "filter") {
    max_err = filter_fd_max_error(args);
    threshold = 1e-5;
  } else {
    const int m = 3, s = 5, channels = 2;
    const NetworkObjective objective(gradcheck_samples(args.seed, m, s, 8), m, s, channels, 0.0);
    const std::vector<double> params = objective.initial_params(args.seed);
    std::vector<std::size_t> batch(objective.sample_count());
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
    const GradCheckReport report = gradient_check(objective, params, batch, 1e-5,
                                                  args.perturbation());
    for (const GradCheckGroup& group : report.groups) {
      std::cout << "  " << group.name << ": max relative error "
                << format_double(group.max_rel_error) << "\n";
    }
    max_err = report.max_rel_error;
    threshold = 1e-4;
  }
  const bool pass = max_err <= threshold;
  std::cout << "gradcheck " << args.model_kind << ": " << (pass ? "PASS" : "FAIL")
            << " (max relative error " << format_double(max_err) << ", threshold "
            << format_double(threshold) << ")\n";
  return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// robustness
// ---------------------------------------------------------------------------

struct RobustnessArgs {
  std::string data_path, config_path, out_dir;
  double rate = 0.1;
};

void cmd_robustness(const RobustnessArgs& args) {
  const AppConfig config = load_config_or_default(args.config_path);
  const PanelDataset dataset = load_csv(args.data_path);
  const RobustnessResult result = run_robustness(dataset, args.rate, config);

  std::filesystem::create_directories(args.out_dir);
  const std::filesystem::path dir(args.out_dir);
  write_text_file((dir / "clean_table.txt").string(), result.clean.table);
  write_text_file((dir / "corrupted_table.txt").string(), result.corrupted.table);
  write_text_file((dir / "parameter_diff.txt").string(), result.parameter_diff);

  std::cout << "clean accuracies:\n" << result.clean.table << "\n";
  std::cout << "corrupted accuracies (rate " << format_double(args.rate) << "):\n"
            << result.corrupted.table << "\n";
  std::cout << "fitted smoothing:\n" << result.parameter_diff;
  std::cout << "tables written to " << args.out_dir << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"interpretable persistent-change network over payment panels"};
  app.require_subcommand(1);
  int exit_code = 0;

  GenerateArgs generate_args;
  CLI::App* generate = app.add_subcommand("generate", "generate a synthetic payment panel CSV");
  generate->add_option("--config", generate_args.config_path, "key=value config file");
  generate->add_option("--out", generate_args.out_path, "output CSV path")->required();
  generate->add_option("--teacher", generate_args.teacher_path,
                       "network model file; labels drawn from its predictions");
  generate->add_option("--seed", generate_args.seed, "override the config seed");
  generate->callback([&] { cmd_generate(generate_args); });

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train one model on a panel CSV");
  train->add_option("--data", train_args.data_path, "panel CSV")->required();
  train->add_option("--model", train_args.model_kind, "model family")
      ->required()
      ->check(CLI::IsMember({"intnn", "logistic", "mlp"}));
  train->add_option("--features", train_args.features_id,
                    "baseline feature subset (npc_ic_pc, npc, pc_ic, pc, ic)");
  train->add_option("--config", train_args.config_path, "key=value config file");
  train->add_option("--out", train_args.out_path, "model file to write")->required();
  train->add_option("--metrics", train_args.metrics_path,
                    "metrics CSV (default: <out>.metrics.csv)");
  train->callback([&] { cmd_train(train_args); });

  EvaluateArgs evaluate_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "score a saved model on a panel CSV");
  evaluate->add_option("--model", evaluate_args.model_path, "model file")->required();
  evaluate->add_option("--data", evaluate_args.data_path, "panel CSV")->required();
  evaluate->add_option("--config", evaluate_args.config_path, "key=value config file");
  evaluate->callback([&] { cmd_evaluate(evaluate_args); });

  CompareArgs compare_args;
  CLI::App* compare = app.add_subcommand("compare", "accuracy table across all model families");
  compare->add_option("--data", compare_args.data_path, "panel CSV")->required();
  compare->add_option("--config", compare_args.config_path, "key=value config file");
  compare->add_option("--out", compare_args.out_path, "table file to write")->required();
  compare->callback([&] { cmd_compare(compare_args); });

  InterpretArgs interpret_args;
  CLI::App* interpret = app.add_subcommand("interpret", "print the fitted-model reading");
  interpret->add_option("--model", interpret_args.model_path, "network model file")->required();
  interpret->add_option("--names", interpret_args.names_csv,
                        "comma-separated insurance names (default: built-in names)");
  interpret->add_option("--logistic", interpret_args.logistic_path,
                        "logistic model file for the sign-comparison table");
  interpret->callback([&] { cmd_interpret(interpret_args); });

  FilterDemoArgs filter_demo_args;
  CLI::App* filter_demo =
      app.add_subcommand("filter-demo", "filter response curves on step series (CSV)");
  filter_demo->add_option("--mode", filter_demo_args.mode, "example1 (clean) or example2 (noisy)")
      ->required()
      ->check(CLI::IsMember({"example1", "example2"}));
  filter_demo->add_option("--T", filter_demo_args.T, "series length");
  filter_demo->add_option("--k", filter_demo_args.k_csv, "comma-separated smoothing values");
  filter_demo->add_option("--noise", filter_demo_args.noise,
                          "fraction of post-change points damaged to 0.9 (example2)");
  filter_demo->add_option("--seed", filter_demo_args.seed, "noise seed");
  filter_demo->add_option("--out", filter_demo_args.out_path, "output CSV path")->required();
  filter_demo->callback([&] { cmd_filter_demo(filter_demo_args); });

  GradCheckArgs gradcheck_args;
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "compare analytic gradients to finite differences");
  gradcheck->add_option("--model-kind", gradcheck_args.model_kind, "what to differentiate")
      ->check(CLI::IsMember({"quadratic", "filter", "network"}));
  gradcheck->add_option("--seed", gradcheck_args.seed, "instance seed");
  gradcheck->add_option("--perturb-coordinate", gradcheck_args.perturb_coordinate,
                        "test hook: coordinate to bias");
  gradcheck->add_option("--perturb-bias", gradcheck_args.perturb_bias,
                        "test hook: bias added to the analytic gradient");
  gradcheck->callback([&] { exit_code = cmd_gradcheck(gradcheck_args); });

  RobustnessArgs robustness_args;
  CLI::App* robustness =
      app.add_subcommand("robustness", "clean-vs-corrupted comparison and fitted smoothing");
  robustness->add_option("--data", robustness_args.data_path, "panel CSV")->required();
  robustness->add_option("--rate", robustness_args.rate, "fraction of payment cells zeroed");
  robustness->add_option("--config", robustness_args.config_path, "key=value config file");
  robustness->add_option("--out", robustness_args.out_dir, "output directory")->required();
  robustness->callback([&] { cmd_robustness(robustness_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}

}  // namespace pcfnet
