#pragma once
// Handcrafted panel features and the baseline models fitted on them:
//
//   NPC_j  terminal run of periods with NO payment of insurance j (D0 on the
//          not-pay indicator, oldest-to-newest) — counts not paying, so its
//          coefficients carry the opposite sign of the network's w
//   IC     number of insurance types with a positive payment in the current
//          (newest) period
//   PC     terminal run of periods whose insurance count exceeds a threshold
//          (2 by default), taken literally without the not-flip
//
// Baselines: logistic regression and a one-hidden-layer MLP with logistic
// activations, each over five feature subsets.

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pcfnet/training.hpp"
#include "pcfnet/window_sample.hpp"

namespace pcfnet {

struct FeatureVector {
  std::vector<double> npc;  // length m
  int ic = 0;
  int pc = 0;
};

FeatureVector extract_features(const WindowSample& sample, int ic_threshold = 2);

enum class FeatureSubset { NpcIcPc, Npc, PcIc, Pc, Ic };

// Dense row in the subset's canonical column order (NPC block, then IC, then
// PC, dropping whatever the subset excludes).
std::vector<double> feature_row(const FeatureVector& features, FeatureSubset subset);

std::vector<std::string> feature_names(FeatureSubset subset,
                                       const std::vector<std::string>& insurance_names);

std::string subset_id(FeatureSubset subset);          // e.g. "npc_ic_pc"
std::string subset_label(FeatureSubset subset);       // e.g. "NPC, IC, PC"
FeatureSubset subset_from_id(const std::string& id);  // ConfigError on unknown id

// All five subsets in the comparison-table row order.
std::span<const FeatureSubset> all_subsets();

// Writes one row per sample: npc_1..npc_m, ic, pc, label.
void export_features_csv(const std::string& path, std::span<const WindowSample> samples,
                         int ic_threshold = 2);

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

enum class BaselineKind { Logistic, Mlp };

struct LogisticModel {
  int m = 0, s = 0, ic_threshold = 2;
  FeatureSubset subset = FeatureSubset::NpcIcPc;
  std::vector<std::string> feature_names;
  std::vector<double> weights;
  double intercept = 0.0;
};

struct MlpModel {
  int m = 0, s = 0, ic_threshold = 2, hidden = 16;
  FeatureSubset subset = FeatureSubset::NpcIcPc;
  std::vector<std::string> feature_names;
  std::vector<double> w1;  // hidden x n_features, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;
};

using BaselineModel = std::variant<LogisticModel, MlpModel>;

double baseline_predict(const BaselineModel& model, const WindowSample& sample);

struct BaselineFit {
  BaselineModel model;
  std::vector<EpochStats> history;
  double test_accuracy = 0.0;
};

// Fits the baseline with the shared Adam loop (unpenalized; the L1 penalty
// belongs to the network head). insurance_names sizes the NPC feature names.
BaselineFit fit_baseline(BaselineKind kind, FeatureSubset subset,
                         std::span<const WindowSample> train_samples,
                         std::span<const WindowSample> test_samples,
                         const std::vector<std::string>& insurance_names,
                         const TrainConfig& config, int ic_threshold = 2, int mlp_hidden = 16);

Metrics evaluate_baseline(const BaselineModel& model, std::span<const WindowSample> samples);

// ---------------------------------------------------------------------------
// Comparison table
// ---------------------------------------------------------------------------

struct ComparisonRow {
  std::string model;   // "IntNN", "Logistic", "MLP"
  std::string inputs;  // "-", "NPC, IC, PC", ...
  double accuracy = 0.0;
};

// Aligned plain-text table; rejects non-finite or out-of-range accuracies
// (an empty accuracy cell is a bug, not a formatting problem).
std::string format_comparison_table(std::span<const ComparisonRow> rows,
                                    const std::string& footnote = "");

}  // namespace pcfnet
