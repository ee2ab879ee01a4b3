#include "pcfnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "pcfnet/filters.hpp"
#include "pcfnet/textio.hpp"

namespace pcfnet {

double logistic(double a) { return sigmoid_pair(a).pos; }

SigmoidPair sigmoid_pair(double a) {
  const double t = std::exp(-std::abs(a));
  const double denom = 1.0 + t;
  const double big = 1.0 / denom;    // logistic(|a|)
  const double small = t / denom;    // logistic(-|a|)
  if (a >= 0.0) return {big, small};
  return {small, big};
}

double NetworkParams::smoothing(int f) const { return logistic(channels[f].kappa); }

void NetworkParams::validate() const {
  if (m <= 0 || s <= 0) throw std::invalid_argument("network needs m > 0 and s > 0");
  if (channels.empty()) throw std::invalid_argument("network needs at least one channel");
  if (u.size() != channels.size()) {
    throw std::invalid_argument("head weight count " + std::to_string(u.size()) +
                                " does not match channel count " +
                                std::to_string(channels.size()));
  }
  for (std::size_t f = 0; f < channels.size(); ++f) {
    if (channels[f].w.size() != static_cast<std::size_t>(m)) {
      throw std::invalid_argument("channel " + std::to_string(f + 1) + " has " +
                                  std::to_string(channels[f].w.size()) +
                                  " weights, expected m=" + std::to_string(m));
    }
  }
}

NetworkParams NetworkParams::zeros_like(const NetworkParams& p) {
  NetworkParams z;
  z.m = p.m;
  z.s = p.s;
  z.c = 0.0;
  z.d = 0.0;
  z.channels.resize(p.channels.size());
  for (std::size_t f = 0; f < p.channels.size(); ++f) {
    z.channels[f].w.assign(p.channels[f].w.size(), 0.0);
    z.channels[f].b = 0.0;
    z.channels[f].kappa = 0.0;
  }
  z.u.assign(p.u.size(), 0.0);
  z.v = 0.0;
  return z;
}

namespace {

// Everything the reverse pass needs from one forward evaluation. Buffers are
// reused across the samples of a batch.
struct ForwardWorkspace {
  std::vector<double> split_pos, split_neg;  // m*s splitting sigmoid pair
  std::vector<double> x2, x2c;               // C*s reduction sigmoid pair
  std::vector<double> p, q;                  // C*s filter accumulator traces
  std::vector<double> D;                     // C filter outputs
  std::vector<double> contrib;               // C head contributions (scratch)
  double z = 0.0;
  double prob = 0.0;

  void resize(int m, int s, int C) {
    split_pos.resize(static_cast<std::size_t>(m) * s);
    split_neg.resize(static_cast<std::size_t>(m) * s);
    x2.resize(static_cast<std::size_t>(C) * s);
    x2c.resize(static_cast<std::size_t>(C) * s);
    p.resize(static_cast<std::size_t>(C) * s);
    q.resize(static_cast<std::size_t>(C) * s);
    D.resize(C);
    contrib.resize(C);
  }
};

void check_sample_shape(const NetworkParams& params, const WindowSample& sample) {
  if (sample.m != params.m || sample.s != params.s) {
    throw std::invalid_argument("sample shape " + std::to_string(sample.m) + "x" +
                                std::to_string(sample.s) + " does not match network " +
                                std::to_string(params.m) + "x" + std::to_string(params.s));
  }
}

double forward_into(const NetworkParams& params, const WindowSample& sample,
                    ForwardWorkspace& ws) {
  const int m = params.m, s = params.s, C = params.channel_count();

  // g1: splitting sigmoid per payment cell, shared slope and offset.
  const std::size_t cells = static_cast<std::size_t>(m) * s;
  for (std::size_t i = 0; i < cells; ++i) {
    const SigmoidPair sp = sigmoid_pair(params.c * sample.payments[i] + params.d);
    ws.split_pos[i] = sp.pos;
    ws.split_neg[i] = sp.neg;
  }

  // g2 + g3 per channel: per-period sigmoid pair, then the persistent change
  // filter over the s periods. The pair keeps the sign-flip gauge exact.
  for (int f = 0; f < C; ++f) {
    const ChannelParams& ch = params.channels[f];
    double* x2 = ws.x2.data() + static_cast<std::size_t>(f) * s;
    double* x2c = ws.x2c.data() + static_cast<std::size_t>(f) * s;
    for (int t = 0; t < s; ++t) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j) {
        acc += ch.w[j] * ws.split_pos[static_cast<std::size_t>(j) * s + t];
      }
      const SigmoidPair sp = sigmoid_pair(acc + ch.b);
      x2[t] = sp.pos;
      x2c[t] = sp.neg;
    }
    const double k = logistic(ch.kappa);
    std::span<double> pt(ws.p.data() + static_cast<std::size_t>(f) * s, s);
    std::span<double> qt(ws.q.data() + static_cast<std::size_t>(f) * s, s);
    ws.D[f] = detail::pcf_forward({x2, static_cast<std::size_t>(s)},
                                  {x2c, static_cast<std::size_t>(s)}, k, pt, qt);
  }

  // g4: head. Contributions are summed in sorted order so the result is
  // exactly invariant under channel permutation.
  for (int f = 0; f < C; ++f) ws.contrib[f] = params.u[f] * ws.D[f];
  std::sort(ws.contrib.begin(), ws.contrib.end());
  double z = 0.0;
  for (double cf : ws.contrib) z += cf;
  z += params.v;
  ws.z = z;
  ws.prob = logistic(z);
  return ws.prob;
}

void scale_params(NetworkParams& g, double factor) {
  g.c *= factor;
  g.d *= factor;
  for (auto& ch : g.channels) {
    for (double& w : ch.w) w *= factor;
    ch.b *= factor;
    ch.kappa *= factor;
  }
  for (double& uf : g.u) uf *= factor;
  g.v *= factor;
}

double clamped_bce(double prob, int label) {
  const double pc = std::min(std::max(prob, kProbClamp), 1.0 - kProbClamp);
  return label == 1 ? -std::log(pc) : -std::log(1.0 - pc);
}

}  // namespace

double forward(const NetworkParams& params, const WindowSample& sample) {
  params.validate();
  check_sample_shape(params, sample);
  ForwardWorkspace ws;
  ws.resize(params.m, params.s, params.channel_count());
  return forward_into(params, sample, ws);
}

double loss(const NetworkParams& params, std::span<const WindowSample> batch, double lambda) {
  params.validate();
  if (batch.empty()) throw std::invalid_argument("loss needs a non-empty batch");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  ForwardWorkspace ws;
  ws.resize(params.m, params.s, params.channel_count());
  double total = 0.0;
  for (const WindowSample& sample : batch) {
    check_sample_shape(params, sample);
    total += clamped_bce(forward_into(params, sample, ws), sample.label);
  }
  double penalty = 0.0;
  for (double uf : params.u) penalty += std::abs(uf);
  return total / static_cast<double>(batch.size()) + lambda * penalty;
}

double loss_and_gradient(const NetworkParams& params, std::span<const WindowSample> batch,
                         double lambda, NetworkParams& grad_out) {
  params.validate();
  if (batch.empty()) throw std::invalid_argument("gradient needs a non-empty batch");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  const int m = params.m, s = params.s, C = params.channel_count();

  grad_out = NetworkParams::zeros_like(params);
  ForwardWorkspace ws;
  ws.resize(m, s, C);
  std::vector<double> gx2(static_cast<std::size_t>(s));
  std::vector<double> gx2c(static_cast<std::size_t>(s));
  std::vector<double> gsplit(static_cast<std::size_t>(m) * s);

  double total = 0.0;
  for (const WindowSample& sample : batch) {
    check_sample_shape(params, sample);
    const double prob = forward_into(params, sample, ws);
    total += clamped_bce(prob, sample.label);

    // d(mean BCE)/dz before the 1/n scaling. In the clamped region the loss
    // is locally constant in the probability, so the derivative there is 0 —
    // this matches what a finite difference of the actual loss sees.
    double gz = 0.0;
    if (prob > kProbClamp && prob < 1.0 - kProbClamp) {
      gz = prob - static_cast<double>(sample.label);
    }
    if (gz == 0.0) continue;

    grad_out.v += gz;
    std::fill(gsplit.begin(), gsplit.end(), 0.0);
    for (int f = 0; f < C; ++f) {
      const ChannelParams& ch = params.channels[f];
      ChannelParams& gch = grad_out.channels[f];
      grad_out.u[f] += gz * ws.D[f];
      const double gD = gz * params.u[f];

      const double* x2 = ws.x2.data() + static_cast<std::size_t>(f) * s;
      const double* x2c = ws.x2c.data() + static_cast<std::size_t>(f) * s;
      const double* pt = ws.p.data() + static_cast<std::size_t>(f) * s;
      const double* qt = ws.q.data() + static_cast<std::size_t>(f) * s;
      const double k = logistic(ch.kappa);
      const double gk = detail::pcf_backward(
          {x2, static_cast<std::size_t>(s)}, {x2c, static_cast<std::size_t>(s)}, k,
          {pt, static_cast<std::size_t>(s)}, {qt, static_cast<std::size_t>(s)}, gD, gx2, gx2c);
      // Chain through k = logistic(kappa).
      const SigmoidPair kp = sigmoid_pair(ch.kappa);
      gch.kappa += gk * (kp.pos * kp.neg);

      for (int t = 0; t < s; ++t) {
        // Both sigmoid pair halves feed the filter; their derivative against
        // the shared preactivation is (gx - gxc) * logistic'(a).
        const double ga = (gx2[t] - gx2c[t]) * (x2[t] * x2c[t]);
        gch.b += ga;
        for (int j = 0; j < m; ++j) {
          const std::size_t cell = static_cast<std::size_t>(j) * s + t;
          gch.w[j] += ga * ws.split_pos[cell];
          gsplit[cell] += ga * ch.w[j];
        }
      }
    }
    for (std::size_t i = 0; i < gsplit.size(); ++i) {
      const double gs = gsplit[i] * (ws.split_pos[i] * ws.split_neg[i]);
      grad_out.c += gs * sample.payments[i];
      grad_out.d += gs;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  scale_params(grad_out, inv_n);

  double penalty = 0.0;
  for (int f = 0; f < C; ++f) {
    penalty += std::abs(params.u[f]);
    if (params.u[f] > 0.0) {
      grad_out.u[f] += lambda;
    } else if (params.u[f] < 0.0) {
      grad_out.u[f] -= lambda;
    }
    // subgradient 0 at u_f == 0
  }
  return total * inv_n + lambda * penalty;
}

NetworkParams gradient(const NetworkParams& params, std::span<const WindowSample> batch,
                       double lambda) {
  NetworkParams g;
  loss_and_gradient(params, batch, lambda, g);
  return g;
}

std::vector<int> predict_batch(const NetworkParams& params, std::span<const WindowSample> samples,
                               double threshold) {
  params.validate();
  ForwardWorkspace ws;
  ws.resize(params.m, params.s, params.channel_count());
  std::vector<int> labels(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    check_sample_shape(params, samples[i]);
    labels[i] = forward_into(params, samples[i], ws) >= threshold ? 1 : 0;
  }
  return labels;
}

InterpretationReport interpret(const NetworkParams& params,
                               const std::vector<std::string>& insurance_names,
                               double active_tolerance) {
  params.validate();
  if (insurance_names.size() != static_cast<std::size_t>(params.m)) {
    throw std::invalid_argument("got " + std::to_string(insurance_names.size()) +
                                " insurance names for m=" + std::to_string(params.m));
  }
  InterpretationReport report;
  report.c = params.c;
  report.d = params.d;
  if (params.c != 0.0) report.split_threshold = -params.d / params.c;
  report.v = params.v;
  report.active_tolerance = active_tolerance;

  const int C = params.channel_count();
  for (int f = 0; f < C; ++f) {
    ChannelReport ch;
    ch.index = f + 1;
    ch.b = params.channels[f].b;
    ch.k = params.smoothing(f);
    ch.u = params.u[f];
    for (int j = 0; j < params.m; ++j) {
      ch.weights.push_back({insurance_names[j], params.channels[f].w[j]});
    }
    std::stable_sort(ch.weights.begin(), ch.weights.end(),
                     [](const WeightEntry& a, const WeightEntry& b) {
                       return std::abs(a.weight) > std::abs(b.weight);
                     });
    report.channels.push_back(std::move(ch));
  }

  std::vector<int> order(C);
  for (int f = 0; f < C; ++f) order[f] = f;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(params.u[a]) > std::abs(params.u[b]);
  });
  for (int f : order) {
    if (std::abs(params.u[f]) > active_tolerance) report.active_channels.push_back(f + 1);
  }
  return report;
}

std::string format_interpretation(const InterpretationReport& report) {
  std::string out;
  out += "interpretable network: " + std::to_string(report.channels.size()) +
         " channel(s)\n";
  out += "splitting layer: c=" + format_double(report.c) + ", d=" + format_double(report.d);
  if (report.split_threshold) {
    out += ", payment split point -d/c = " + format_double(*report.split_threshold);
  } else {
    out += ", payment split point undefined (c = 0)";
  }
  out += "\n";

  std::size_t name_width = 0;
  for (const auto& ch : report.channels) {
    for (const auto& we : ch.weights) name_width = std::max(name_width, we.name.size());
  }
  for (const auto& ch : report.channels) {
    out += "channel " + std::to_string(ch.index) + ": u=" + format_double(ch.u) +
           ", k=" + format_double(ch.k) + ", b=" + format_double(ch.b) + "\n";
    out += "  weights by |magnitude|:\n";
    for (const auto& we : ch.weights) {
      out += "    " + we.name + std::string(name_width + 2 - we.name.size(), ' ') +
             format_double(we.weight) + "\n";
    }
  }
  out += "head intercept v=" + format_double(report.v) + "\n";
  out += "active channels (|u| > " + format_double(report.active_tolerance) + "):";
  if (report.active_channels.empty()) {
    out += " none";
  } else {
    for (int f : report.active_channels) out += " " + std::to_string(f);
  }
  out += "\n";
  return out;
}

SignComparison compare_interpretations(const NetworkParams& params,
                                       const std::vector<std::string>& insurance_names,
                                       const std::vector<double>& logistic_coefficients) {
  params.validate();
  if (insurance_names.size() != static_cast<std::size_t>(params.m) ||
      logistic_coefficients.size() != static_cast<std::size_t>(params.m)) {
    throw std::invalid_argument("sign comparison needs exactly m names and m coefficients");
  }
  // Compare against the dominant channel (largest |u|; ties keep the first).
  int best = 0;
  for (int f = 1; f < params.channel_count(); ++f) {
    if (std::abs(params.u[f]) > std::abs(params.u[best])) best = f;
  }
  // Orient the channel by the sign of its head weight: the network is
  // invariant under (w,b,u) -> (-w,-b,-u), so only sign(u)*w carries the
  // per-insurance direction. With a positive head this is w unchanged.
  const double orientation = params.u[best] < 0.0 ? -1.0 : 1.0;
  SignComparison cmp;
  cmp.channel = best + 1;
  for (int j = 0; j < params.m; ++j) {
    SignComparisonRow row;
    row.name = insurance_names[j];
    row.network_weight = orientation * params.channels[best].w[j];
    row.logistic_coefficient = logistic_coefficients[j];
    row.opposite = row.network_weight * row.logistic_coefficient < 0.0;
    if (row.opposite) ++cmp.agreements;
    cmp.rows.push_back(std::move(row));
  }
  return cmp;
}

std::string format_sign_comparison(const SignComparison& cmp) {
  std::string out;
  out += "sign comparison vs logistic not-pay-run coefficients (channel " +
         std::to_string(cmp.channel) + "; opposite sign = agreement)\n";
  std::size_t name_width = 9;  // "insurance"
  for (const auto& row : cmp.rows) name_width = std::max(name_width, row.name.size());
  auto pad = [](const std::string& text, std::size_t width) {
    return text + std::string(width > text.size() ? width - text.size() : 1, ' ');
  };
  out += "  " + pad("insurance", name_width + 2) + pad("network", 14) + pad("logistic", 14) +
         "opposite\n";
  for (const auto& row : cmp.rows) {
    out += "  " + pad(row.name, name_width + 2) + pad(format_double(row.network_weight), 14) +
           pad(format_double(row.logistic_coefficient), 14) + (row.opposite ? "yes" : "no") +
           "\n";
  }
  out += "agreements (opposite signs): " + std::to_string(cmp.agreements) + "/" +
         std::to_string(cmp.rows.size()) + "\n";
  return out;
}

}  // namespace pcfnet
