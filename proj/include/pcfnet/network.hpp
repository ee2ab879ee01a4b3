#pragma once
// The four-layer interpretable network for payment panels:
//
//   g1  splitting layer: sigmoid(c*x + d) per payment cell, shared c and d —
//       a differentiable threshold indicator with split point -d/c
//   g2  dimension reduction: per period, per channel, sigmoid(w.x + b)
//   g3  persistent change filter over the s periods with k = logistic(kappa)
//   g4  head: sigmoid(sum_f u_f * D_f + v), with an L1 penalty on u
//
// Forward output is exactly invariant under channel permutation (head
// contributions are summed in sorted order) and under the per-channel sign
// flip (w,b,u) -> (-w,-b,-u) (the g2 sigmoid pair and the two filter
// accumulators swap bit for bit).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcfnet/window_sample.hpp"

namespace pcfnet {

struct ChannelParams {
  std::vector<double> w;  // per-insurance mixing weights, length m
  double b = 0.0;         // period-level offset
  double kappa = 2.0;     // unconstrained; smoothing k = logistic(kappa)
};

struct NetworkParams {
  int m = 0;  // insurance types per period
  int s = 0;  // periods per window
  double c = 1.0;
  double d = 0.0;
  std::vector<ChannelParams> channels;
  std::vector<double> u;  // head weight per channel
  double v = 0.0;         // head intercept

  int channel_count() const { return static_cast<int>(channels.size()); }
  double smoothing(int f) const;  // k_f = logistic(kappa_f)
  void validate() const;          // shape consistency, throws on mismatch

  // A zero-filled parameter set with the same shapes (gradients reuse this
  // struct: a gradient is shaped exactly like the parameters).
  static NetworkParams zeros_like(const NetworkParams& p);
};

// Numerically stable logistic, and the exact pair (logistic(a), logistic(-a))
// computed from a single exp so that sigmoid_pair(-a) swaps the two fields
// bit for bit.
double logistic(double a);
struct SigmoidPair {
  double pos;  // logistic(a)
  double neg;  // logistic(-a)
};
SigmoidPair sigmoid_pair(double a);

// Probability that the sample's unit is in the positive state.
double forward(const NetworkParams& params, const WindowSample& sample);

// Probabilities are clamped into [kProbClamp, 1-kProbClamp] before the log so
// the loss stays finite for every finite parameter setting.
constexpr double kProbClamp = 1e-12;

// Mean clamped cross-entropy over the batch plus lambda * ||u||_1.
double loss(const NetworkParams& params, std::span<const WindowSample> batch, double lambda);

// Exact reverse-mode gradient of loss(). The L1 term contributes
// lambda * sign(u_f) with subgradient 0 at u_f == 0.
NetworkParams gradient(const NetworkParams& params, std::span<const WindowSample> batch,
                       double lambda);

// One-pass variant used by the trainer: returns the loss value and fills
// grad_out (which must already have the shape of params, zeroed or not —
// it is overwritten).
double loss_and_gradient(const NetworkParams& params, std::span<const WindowSample> batch,
                         double lambda, NetworkParams& grad_out);

// Hard labels at the given probability threshold (label 1 iff p >= threshold).
std::vector<int> predict_batch(const NetworkParams& params,
                               std::span<const WindowSample> samples, double threshold = 0.5);

// ---------------------------------------------------------------------------
// Interpretation reports
// ---------------------------------------------------------------------------

struct WeightEntry {
  std::string name;
  double weight;
};

struct ChannelReport {
  int index = 0;                      // 1-based channel number
  std::vector<WeightEntry> weights;   // sorted by |weight| descending
  double b = 0.0;
  double k = 0.0;                     // logistic(kappa)
  double u = 0.0;
};

struct InterpretationReport {
  double c = 0.0, d = 0.0;
  std::optional<double> split_threshold;  // -d/c; absent when c == 0
  std::vector<ChannelReport> channels;
  double v = 0.0;
  std::vector<int> active_channels;  // 1-based, |u_f| > tolerance, by |u| desc
  double active_tolerance = 0.0;
};

// insurance_names must have exactly m entries.
InterpretationReport interpret(const NetworkParams& params,
                               const std::vector<std::string>& insurance_names,
                               double active_tolerance = 1e-6);

std::string format_interpretation(const InterpretationReport& report);

// ---------------------------------------------------------------------------
// Sign comparison against a logistic baseline fitted on the per-insurance
// not-pay-run features. Those features count NOT paying, so a good network
// weight and a good logistic coefficient carry OPPOSITE signs: opposite sign
// counts as agreement.
// ---------------------------------------------------------------------------

struct SignComparisonRow {
  std::string name;
  double network_weight = 0.0;  // oriented by the sign of the channel's u
  double logistic_coefficient = 0.0;
  bool opposite = false;
};

struct SignComparison {
  int channel = 0;  // 1-based channel the network weights came from (max |u|)
  std::vector<SignComparisonRow> rows;
  int agreements = 0;  // rows with strictly opposite signs
};

SignComparison compare_interpretations(const NetworkParams& params,
                                       const std::vector<std::string>& insurance_names,
                                       const std::vector<double>& logistic_coefficients);

std::string format_sign_comparison(const SignComparison& cmp);

}  // namespace pcfnet
