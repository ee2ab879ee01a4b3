// Multi-model experiment drivers: the accuracy-comparison table (the
// interpretable network against logistic and MLP baselines over five feature
// subsets) and the missing-data robustness study that reruns everything on a
// corrupted copy of the panel.
#pragma once

#include <string>
#include <vector>

#include "pcfnet/config.hpp"
#include "pcfnet/data.hpp"
#include "pcfnet/features.hpp"
#include "pcfnet/training.hpp"

namespace pcfnet {

struct ComparisonResult {
  std::vector<ComparisonRow> rows;  // network row first, then 5 logistic + 5 MLP
  NetworkFit network;               // the fitted interpretable network
  std::string table;                // aligned text table with the MLP footnote
};

// Windows the panel, draws a balanced train/test split, trains the
// interpretable network plus each baseline/feature-subset pair on that same
// split, and collects their test accuracies. Deterministic per config seed.
ComparisonResult run_comparison(const PanelDataset& dataset, const AppConfig& config);

struct RobustnessResult {
  ComparisonResult clean;
  ComparisonResult corrupted;
  std::vector<double> k_clean;    // fitted smoothing per channel, clean panel
  std::vector<double> k_corrupt;  // same channels, corrupted panel
  std::string parameter_diff;     // side-by-side text report of the two
};

// Clean run, then an identical run (same config and seed) on a copy of the
// panel with `rate` of all payment cells zeroed out.
RobustnessResult run_robustness(const PanelDataset& dataset, double rate,
                                const AppConfig& config);

}  // namespace pcfnet
