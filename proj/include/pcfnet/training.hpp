#pragma once
// Adam training loop, evaluation metrics and finite-difference gradient
// checking over a generic objective on indexed samples. Objectives expose a
// flat parameter vector so one optimizer and one checker serve the network,
// the baselines and the self-test problems alike.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcfnet/network.hpp"
#include "pcfnet/window_sample.hpp"

namespace pcfnet {

struct TrainConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  int epochs = 200;
  int batch_size = 256;
  // L1 weight on the head. When unset, defaults to 0 with one channel (the
  // penalty is inert up to scale there) and 1e-3 with several.
  std::optional<double> lambda;
  std::uint64_t seed = 1;
  // Divisor applied to raw payments before the splitting layer. The init
  // ranges for c and d are written for payments on this divided scale.
  double payment_scale = 1.0;

  double resolved_lambda(int channel_count) const;
  void validate() const;
};

struct ParamGroup {
  std::string name;
  std::size_t begin = 0, end = 0;  // [begin, end) into the flat vector
};

// A differentiable objective over an indexed sample set.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dim() const = 0;
  virtual std::size_t sample_count() const = 0;
  virtual int label(std::size_t i) const = 0;
  // Probability for sample i under the given flat parameters.
  virtual double predict(std::span<const double> params, std::size_t i) const = 0;
  // Mean data loss over the index batch plus any penalty. When grad is
  // non-empty (size dim()) it is overwritten with the exact gradient.
  virtual double loss(std::span<const double> params, std::span<const std::size_t> batch,
                      std::span<double> grad) const = 0;
  // Penalty part alone (0 for unpenalized objectives).
  virtual double penalty(std::span<const double> /*params*/) const { return 0.0; }
  virtual std::vector<ParamGroup> param_groups() const { return {{"all", 0, dim()}}; }
};

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
  std::vector<double> m, v;
  explicit AdamState(std::size_t dim) : m(dim, 0.0), v(dim, 0.0) {}
};

// Standard bias-corrected Adam update; step_index starts at 1.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               const TrainConfig& config, long step_index);

// ---------------------------------------------------------------------------
// Metrics and the training loop
// ---------------------------------------------------------------------------

struct Metrics {
  double accuracy = 0.0;
  double mean_loss = 0.0;     // mean clamped cross-entropy, no penalty
  long confusion[2][2] = {};  // [actual][predicted]
  std::size_t n = 0;
};

Metrics evaluate(const Objective& objective, std::span<const double> params);

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;  // data loss + penalty, full training set
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct FitResult {
  std::vector<double> params;
  std::vector<EpochStats> history;
};

// Minibatch Adam with a freshly seeded Fisher-Yates shuffle every epoch
// (stream kEpochShuffleBase + epoch). Deterministic: the same seed, config
// and data reproduce the parameter trajectory bit for bit.
FitResult fit(const Objective& train_objective, const Objective& test_objective,
              std::vector<double> init, const TrainConfig& config);

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

struct GradCheckGroup {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<GradCheckGroup> groups;
};

// Central finite differences over every coordinate, relative error
// |a - fd| / max(1, |a|, |fd|). The optional perturbation adds a bias to one
// analytic coordinate — a test hook proving the checker detects wrong
// gradients.
struct GradPerturbation {
  std::size_t coordinate = 0;
  double bias = 0.0;
};
GradCheckReport gradient_check(const Objective& objective, std::span<const double> params,
                               std::span<const std::size_t> batch, double fd_step = 1e-5,
                               std::optional<GradPerturbation> perturb = std::nullopt);

// ---------------------------------------------------------------------------
// The interpretable network as an Objective
// ---------------------------------------------------------------------------

class NetworkObjective : public Objective {
 public:
  NetworkObjective(std::vector<WindowSample> samples, int m, int s, int channels,
                   double lambda);

  std::size_t dim() const override;
  std::size_t sample_count() const override { return samples_.size(); }
  int label(std::size_t i) const override { return samples_[i].label; }
  double predict(std::span<const double> params, std::size_t i) const override;
  double loss(std::span<const double> params, std::span<const std::size_t> batch,
              std::span<double> grad) const override;
  double penalty(std::span<const double> params) const override;
  std::vector<ParamGroup> param_groups() const override;

  // Flat layout: [c, d, w (C*m, channel-major), b (C), kappa (C), u (C), v].
  static std::vector<double> pack(const NetworkParams& p);
  NetworkParams unpack(std::span<const double> flat) const;

  // Seeded init: c ~ U(0.5,1.5), d ~ U(-1,1) on the payment_scale-divided
  // scale, w,u ~ U(-0.5,0.5), b = 0, kappa = 2 (k ~ 0.88), v = 0; draws in
  // that order from the kInit stream of the seed.
  std::vector<double> initial_params(std::uint64_t seed) const;

  const std::vector<WindowSample>& samples() const { return samples_; }
  int channels() const { return channels_; }

 private:
  std::vector<WindowSample> samples_;
  int m_, s_, channels_;
  double lambda_;
};

struct NetworkFit {
  NetworkParams params;
  std::vector<EpochStats> history;
  double test_accuracy = 0.0;
};

// Convenience wrapper: objectives over the two sample sets, seeded init, fit.
NetworkFit train_network(std::vector<WindowSample> train_samples,
                         std::vector<WindowSample> test_samples, int channels,
                         const TrainConfig& config);

// ---------------------------------------------------------------------------
// Self-test objective: f(theta) = sum (theta_i - target_i)^2
// ---------------------------------------------------------------------------

class QuadraticObjective : public Objective {
 public:
  explicit QuadraticObjective(std::vector<double> targets) : targets_(std::move(targets)) {}
  std::size_t dim() const override { return targets_.size(); }
  std::size_t sample_count() const override { return 1; }
  int label(std::size_t) const override { return 0; }
  double predict(std::span<const double>, std::size_t) const override { return 0.5; }
  double loss(std::span<const double> params, std::span<const std::size_t>,
              std::span<double> grad) const override;

 private:
  std::vector<double> targets_;
};

}  // namespace pcfnet
