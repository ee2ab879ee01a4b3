#include "pcfnet/experiments.hpp"

#include <sstream>

#include "pcfnet/errors.hpp"
#include "pcfnet/textio.hpp"

namespace pcfnet {
namespace {

const char* kMlpFootnote =
    "MLP rows stand in for the original random-forest baseline (no tree "
    "library in this artifact).";

}  // namespace

ComparisonResult run_comparison(const PanelDataset& dataset, const AppConfig& config) {
  config.validate();

  std::vector<WindowSample> samples = windowize(dataset, config.s);
  SampleSplit split = balanced_split(samples, config.n_per_class, config.train.seed);
  scale_payments(split.train, config.train.payment_scale);
  scale_payments(split.test, config.train.payment_scale);

  ComparisonResult result;
  result.network = train_network(split.train, split.test, config.channels, config.train);
  result.rows.push_back({"IntNN", "-", result.network.test_accuracy});

  for (BaselineKind kind : {BaselineKind::Logistic, BaselineKind::Mlp}) {
    for (FeatureSubset subset : all_subsets()) {
      BaselineFit fitted =
          fit_baseline(kind, subset, split.train, split.test, dataset.insurance_names,
                       config.train, config.ic_threshold, config.mlp_hidden);
      result.rows.push_back({kind == BaselineKind::Logistic ? "Logistic" : "MLP",
                             subset_label(subset), fitted.test_accuracy});
    }
  }

  result.table = format_comparison_table(result.rows, kMlpFootnote);
  return result;
}

RobustnessResult run_robustness(const PanelDataset& dataset, double rate,
                                const AppConfig& config) {
  RobustnessResult result;
  result.clean = run_comparison(dataset, config);
  const PanelDataset corrupted = corrupt_missing(dataset, rate, config.generator.seed);
  result.corrupted = run_comparison(corrupted, config);

  const NetworkParams& clean_params = result.clean.network.params;
  const NetworkParams& corrupt_params = result.corrupted.network.params;
  for (int f = 0; f < clean_params.channel_count(); ++f) {
    result.k_clean.push_back(clean_params.smoothing(f));
    result.k_corrupt.push_back(corrupt_params.smoothing(f));
  }

  std::ostringstream diff;
  diff << "channel k_clean k_corrupt\n";
  for (std::size_t f = 0; f < result.k_clean.size(); ++f) {
    diff << (f + 1) << " " << format_double(result.k_clean[f]) << " "
         << format_double(result.k_corrupt[f]) << "\n";
  }
  result.parameter_diff = diff.str();
  return result;
}

}  // namespace pcfnet
