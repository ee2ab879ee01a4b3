#include "pcfnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pcfnet/errors.hpp"
#include "pcfnet/rng.hpp"

namespace pcfnet {

double TrainConfig::resolved_lambda(int channel_count) const {
  if (lambda) return *lambda;
  return channel_count > 1 ? 1e-3 : 0.0;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0,1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0,1)");
  if (!(eps_adam > 0.0)) throw ConfigError("eps_adam must be > 0");
  if (epochs <= 0) throw ConfigError("epochs must be > 0");
  if (batch_size <= 0) throw ConfigError("batch_size must be > 0");
  if (lambda && !(*lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(payment_scale > 0.0)) throw ConfigError("payment_scale must be > 0");
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               const TrainConfig& config, long step_index) {
  if (step_index < 1) throw std::invalid_argument("adam step_index starts at 1");
  if (state.m.size() != params.size() || state.v.size() != params.size() ||
      grad.size() != params.size()) {
    throw std::invalid_argument("adam state/param/grad sizes disagree");
  }
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_index));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_index));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * (grad[i] * grad[i]);
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.eps_adam);
  }
}

Metrics evaluate(const Objective& objective, std::span<const double> params) {
  if (params.size() != objective.dim()) {
    throw std::invalid_argument("parameter vector does not match objective dimension");
  }
  Metrics metrics;
  metrics.n = objective.sample_count();
  if (metrics.n == 0) throw std::invalid_argument("evaluate needs at least one sample");
  double total = 0.0;
  long correct = 0;
  for (std::size_t i = 0; i < metrics.n; ++i) {
    const double prob = objective.predict(params, i);
    const int y = objective.label(i);
    const int yhat = prob >= 0.5 ? 1 : 0;
    metrics.confusion[y][yhat] += 1;
    if (y == yhat) ++correct;
    const double pc = std::min(std::max(prob, kProbClamp), 1.0 - kProbClamp);
    total += y == 1 ? -std::log(pc) : -std::log(1.0 - pc);
  }
  metrics.accuracy = static_cast<double>(correct) / static_cast<double>(metrics.n);
  metrics.mean_loss = total / static_cast<double>(metrics.n);
  return metrics;
}

FitResult fit(const Objective& train_objective, const Objective& test_objective,
              std::vector<double> init, const TrainConfig& config) {
  config.validate();
  if (init.size() != train_objective.dim()) {
    throw ConfigError("initial parameter vector does not match objective dimension");
  }
  if (test_objective.dim() != train_objective.dim()) {
    throw ConfigError("train and test objectives disagree on dimension");
  }
  const std::size_t n = train_objective.sample_count();
  if (n == 0) throw ConfigError("training set is empty");

  FitResult result;
  result.params = std::move(init);
  AdamState state(result.params.size());
  std::vector<double> grad(result.params.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  long step_index = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(config.seed,
                                seed_stream::kEpochShuffleBase +
                                    static_cast<std::uint64_t>(epoch - 1)));
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      std::span<const std::size_t> batch(order.data() + start, stop - start);
      train_objective.loss(result.params, batch, grad);
      ++step_index;
      adam_step(state, result.params, grad, config, step_index);
    }
    const Metrics train_metrics = evaluate(train_objective, result.params);
    const Metrics test_metrics = evaluate(test_objective, result.params);
    result.history.push_back({epoch,
                              train_metrics.mean_loss + train_objective.penalty(result.params),
                              train_metrics.accuracy, test_metrics.accuracy});
  }
  return result;
}

GradCheckReport gradient_check(const Objective& objective, std::span<const double> params,
                               std::span<const std::size_t> batch, double fd_step,
                               std::optional<GradPerturbation> perturb) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
  if (params.size() != objective.dim()) {
    throw std::invalid_argument("parameter vector does not match objective dimension");
  }
  std::vector<double> analytic(objective.dim());
  objective.loss(params, batch, analytic);
  if (perturb) analytic[perturb->coordinate] += perturb->bias;

  std::vector<double> theta(params.begin(), params.end());
  GradCheckReport report;
  for (const ParamGroup& group : objective.param_groups()) {
    GradCheckGroup out{group.name, 0.0};
    for (std::size_t i = group.begin; i < group.end; ++i) {
      const double saved = theta[i];
      theta[i] = saved + fd_step;
      const double up = objective.loss(theta, batch, {});
      theta[i] = saved - fd_step;
      const double down = objective.loss(theta, batch, {});
      theta[i] = saved;
      const double fd = (up - down) / (2.0 * fd_step);
      const double rel = std::abs(analytic[i] - fd) /
                         std::max({1.0, std::abs(analytic[i]), std::abs(fd)});
      out.max_rel_error = std::max(out.max_rel_error, rel);
    }
    report.max_rel_error = std::max(report.max_rel_error, out.max_rel_error);
    report.groups.push_back(std::move(out));
  }
  return report;
}

// ---------------------------------------------------------------------------
// NetworkObjective
// ---------------------------------------------------------------------------

NetworkObjective::NetworkObjective(std::vector<WindowSample> samples, int m, int s,
                                   int channels, double lambda)
    : samples_(std::move(samples)), m_(m), s_(s), channels_(channels), lambda_(lambda) {
  if (m_ <= 0 || s_ <= 0 || channels_ <= 0) {
    throw std::invalid_argument("network objective needs m, s, channels > 0");
  }
  if (!(lambda_ >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  for (const WindowSample& sample : samples_) {
    if (sample.m != m_ || sample.s != s_) {
      throw std::invalid_argument("sample shape does not match objective shape");
    }
  }
}

std::size_t NetworkObjective::dim() const {
  const std::size_t C = static_cast<std::size_t>(channels_);
  return 2 + C * static_cast<std::size_t>(m_) + 3 * C + 1;
}

std::vector<double> NetworkObjective::pack(const NetworkParams& p) {
  std::vector<double> flat;
  flat.reserve(2 + p.channels.size() * (p.channels.empty() ? 0 : p.channels[0].w.size()) +
               3 * p.channels.size() + 1);
  flat.push_back(p.c);
  flat.push_back(p.d);
  for (const ChannelParams& ch : p.channels) {
    flat.insert(flat.end(), ch.w.begin(), ch.w.end());
  }
  for (const ChannelParams& ch : p.channels) flat.push_back(ch.b);
  for (const ChannelParams& ch : p.channels) flat.push_back(ch.kappa);
  flat.insert(flat.end(), p.u.begin(), p.u.end());
  flat.push_back(p.v);
  return flat;
}

NetworkParams NetworkObjective::unpack(std::span<const double> flat) const {
  if (flat.size() != dim()) throw std::invalid_argument("flat parameter vector has wrong size");
  NetworkParams p;
  p.m = m_;
  p.s = s_;
  std::size_t i = 0;
  p.c = flat[i++];
  p.d = flat[i++];
  p.channels.resize(channels_);
  for (int f = 0; f < channels_; ++f) {
    p.channels[f].w.assign(flat.begin() + i, flat.begin() + i + m_);
    i += m_;
  }
  for (int f = 0; f < channels_; ++f) p.channels[f].b = flat[i++];
  for (int f = 0; f < channels_; ++f) p.channels[f].kappa = flat[i++];
  p.u.assign(flat.begin() + i, flat.begin() + i + channels_);
  i += channels_;
  p.v = flat[i++];
  return p;
}

std::vector<ParamGroup> NetworkObjective::param_groups() const {
  const std::size_t C = static_cast<std::size_t>(channels_);
  const std::size_t M = static_cast<std::size_t>(m_);
  std::vector<ParamGroup> groups;
  groups.push_back({"c", 0, 1});
  groups.push_back({"d", 1, 2});
  groups.push_back({"w", 2, 2 + C * M});
  groups.push_back({"b", 2 + C * M, 2 + C * M + C});
  groups.push_back({"kappa", 2 + C * M + C, 2 + C * M + 2 * C});
  groups.push_back({"u", 2 + C * M + 2 * C, 2 + C * M + 3 * C});
  groups.push_back({"v", 2 + C * M + 3 * C, 2 + C * M + 3 * C + 1});
  return groups;
}

double NetworkObjective::predict(std::span<const double> params, std::size_t i) const {
  return forward(unpack(params), samples_[i]);
}

double NetworkObjective::loss(std::span<const double> params,
                              std::span<const std::size_t> batch,
                              std::span<double> grad) const {
  const NetworkParams p = unpack(params);
  std::vector<WindowSample> subset;
  subset.reserve(batch.size());
  for (std::size_t idx : batch) subset.push_back(samples_[idx]);
  if (grad.empty()) {
    return pcfnet::loss(p, subset, lambda_);
  }
  NetworkParams g;
  const double value = loss_and_gradient(p, subset, lambda_, g);
  const std::vector<double> flat = pack(g);
  std::copy(flat.begin(), flat.end(), grad.begin());
  return value;
}

double NetworkObjective::penalty(std::span<const double> params) const {
  const NetworkParams p = unpack(params);
  double total = 0.0;
  for (double uf : p.u) total += std::abs(uf);
  return lambda_ * total;
}

std::vector<double> NetworkObjective::initial_params(std::uint64_t seed) const {
  Rng rng(derive_seed(seed, seed_stream::kInit));
  NetworkParams p;
  p.m = m_;
  p.s = s_;
  p.c = rng.uniform(0.5, 1.5);
  p.d = rng.uniform(-1.0, 1.0);
  p.channels.resize(channels_);
  for (int f = 0; f < channels_; ++f) {
    p.channels[f].w.resize(m_);
    for (int j = 0; j < m_; ++j) p.channels[f].w[j] = rng.uniform(-0.5, 0.5);
    p.channels[f].b = 0.0;
    p.channels[f].kappa = 2.0;
  }
  p.u.resize(channels_);
  for (int f = 0; f < channels_; ++f) p.u[f] = rng.uniform(-0.5, 0.5);
  p.v = 0.0;
  return pack(p);
}

NetworkFit train_network(std::vector<WindowSample> train_samples,
                         std::vector<WindowSample> test_samples, int channels,
                         const TrainConfig& config) {
  if (train_samples.empty() || test_samples.empty()) {
    throw ConfigError("network training needs non-empty train and test sets");
  }
  const int m = train_samples[0].m;
  const int s = train_samples[0].s;
  const double lambda = config.resolved_lambda(channels);
  NetworkObjective train_obj(std::move(train_samples), m, s, channels, lambda);
  NetworkObjective test_obj(std::move(test_samples), m, s, channels, lambda);
  FitResult fitted = fit(train_obj, test_obj, train_obj.initial_params(config.seed), config);
  NetworkFit out;
  out.params = train_obj.unpack(fitted.params);
  out.history = std::move(fitted.history);
  out.test_accuracy = out.history.empty() ? 0.0 : out.history.back().test_accuracy;
  return out;
}

double QuadraticObjective::loss(std::span<const double> params, std::span<const std::size_t>,
                                std::span<double> grad) const {
  if (params.size() != targets_.size()) {
    throw std::invalid_argument("quadratic objective dimension mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double diff = params[i] - targets_[i];
    total += diff * diff;
    if (!grad.empty()) grad[i] = 2.0 * diff;
  }
  return total;
}

}  // namespace pcfnet
