#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pcfnet/errors.hpp"
#include "pcfnet/model_io.hpp"
#include "pcfnet/network.hpp"
#include "pcfnet/rng.hpp"

using namespace pcfnet;

namespace {

// A fully wired two-channel instance with hand-picked parameters.
NetworkParams small_params() {
  NetworkParams p;
  p.m = 2;
  p.s = 3;
  p.c = 1.5;
  p.d = -0.75;
  p.channels.resize(2);
  p.channels[0].w = {0.8, -1.1};
  p.channels[0].b = 0.2;
  p.channels[0].kappa = 1.0;
  p.channels[1].w = {-0.4, 0.9};
  p.channels[1].b = -0.3;
  p.channels[1].kappa = -0.5;
  p.u = {1.3, -0.7};
  p.v = 0.25;
  return p;
}

WindowSample small_sample(int label = 1) {
  // payments row-major (insurance x period), oldest period first
  return WindowSample(2, 3, {0.0, 1.4, 0.6, 2.0, 0.0, 0.5}, label);
}

double ref_sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// Straight transcription of the layer definitions, shapes hard-coded.
double ref_forward(const NetworkParams& p, const WindowSample& sample) {
  double head = p.v;
  std::vector<double> contributions;
  for (int f = 0; f < p.channel_count(); ++f) {
    const double k = ref_sigmoid(p.channels[f].kappa);
    double pj = 0.0, qj = 0.0;
    for (int t = 0; t < p.s; ++t) {
      double acc = p.channels[f].b;
      for (int j = 0; j < p.m; ++j) {
        acc += p.channels[f].w[j] * ref_sigmoid(p.c * sample.at(j, t) + p.d);
      }
      const double x2 = ref_sigmoid(acc);
      const double x2c = 1.0 - x2;
      if (t == 0) {
        pj = x2;
        qj = x2c;
      } else {
        pj = x2 + k * (x2 * pj) + (1.0 - k) * pj;
        qj = x2c + k * (x2c * qj) + (1.0 - k) * qj;
      }
    }
    contributions.push_back(p.u[f] * (pj - qj));
  }
  for (double contribution : contributions) head += contribution;
  return ref_sigmoid(head);
}

Rng make_rng(std::uint64_t seed) { return Rng(derive_seed(seed, 77)); }

WindowSample random_sample(Rng& rng, int m, int s) {
  std::vector<double> payments(static_cast<std::size_t>(m) * s);
  for (double& p : payments) p = rng.bernoulli(0.35) ? 0.0 : rng.uniform(0.05, 3.0);
  return WindowSample(m, s, payments, rng.bernoulli(0.5) ? 1 : 0);
}

NetworkParams random_params(Rng& rng, int m, int s, int channels) {
  NetworkParams p;
  p.m = m;
  p.s = s;
  p.c = rng.uniform(0.5, 2.0);
  p.d = rng.uniform(-1.5, 1.5);
  p.channels.resize(channels);
  for (ChannelParams& ch : p.channels) {
    ch.w.resize(m);
    for (double& w : ch.w) w = rng.uniform(-1.5, 1.5);
    ch.b = rng.uniform(-1.0, 1.0);
    ch.kappa = rng.uniform(-2.0, 3.0);
  }
  p.u.resize(channels);
  for (double& u : p.u) u = rng.uniform(-1.5, 1.5);
  p.v = rng.uniform(-1.0, 1.0);
  return p;
}

// A hand-pinned fitted model used by the interpretation tests.
NetworkParams fitted_params() {
  NetworkParams p;
  p.m = 7;
  p.s = 6;
  p.c = 2.60;
  p.d = -41.46;
  p.channels.resize(1);
  p.channels[0].w = {-1.73, 1.84, -4.0, 0.64, 0.62, -0.66, 4.19};
  p.channels[0].b = 3.67;
  p.channels[0].kappa = std::log(0.999999 / (1.0 - 0.999999));  // k = 0.999999
  p.u = {1.06};
  p.v = -2.18;
  return p;
}

std::vector<std::string> default_names() {
  return {"endowment",  "working_medical",    "unemployment", "injury",
          "maternity",  "nonworking_medical", "hpf"};
}

const std::vector<std::string> kNames = default_names();

}  // namespace

TEST_CASE("parameter validation") {
  NetworkParams p = small_params();
  CHECK_NOTHROW(p.validate());

  NetworkParams bad = p;
  bad.channels[0].w.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = p;
  bad.u.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = p;
  bad.m = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = p;
  bad.channels.clear();
  bad.u.clear();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  // Mismatched sample shape is rejected by forward.
  CHECK_THROWS_AS(forward(p, WindowSample(2, 2, {0, 0, 0, 0}, 0)), std::invalid_argument);
}

TEST_CASE("sigmoid pair is an exact swap") {
  Rng rng = make_rng(1);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(-40.0, 40.0);
    const SigmoidPair pair = sigmoid_pair(a);
    const SigmoidPair mirrored = sigmoid_pair(-a);
    CHECK(pair.pos == logistic(a));
    CHECK(mirrored.pos == pair.neg);
    CHECK(mirrored.neg == pair.pos);
    CHECK(pair.pos + pair.neg == doctest::Approx(1.0).epsilon(1e-15));
  }
  // Strictly interior while exp(-|a|) stays above double epsilon...
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform(-30.0, 30.0);
    const SigmoidPair pair = sigmoid_pair(a);
    CHECK(pair.pos > 0.0);
    CHECK(pair.pos < 1.0);
    CHECK(pair.neg > 0.0);
    CHECK(pair.neg < 1.0);
  }
  CHECK(logistic(0.0) == 0.5);
  // ...and saturating exactly in the far tails (the clamped loss handles it).
  CHECK(logistic(800.0) == 1.0);
  CHECK(logistic(-800.0) == 0.0);
}

TEST_CASE("forward matches a hand-unrolled reference") {
  const NetworkParams p = small_params();
  const WindowSample sample = small_sample();
  CHECK(forward(p, sample) == doctest::Approx(ref_forward(p, sample)).epsilon(1e-12));

  Rng rng = make_rng(2);
  for (int i = 0; i < 50; ++i) {
    const int m = 1 + static_cast<int>(rng.below(3));
    const int s = 1 + static_cast<int>(rng.below(4));
    const int channels = 1 + static_cast<int>(rng.below(3));
    const NetworkParams q = random_params(rng, m, s, channels);
    const WindowSample w = random_sample(rng, m, s);
    CHECK(forward(q, w) == doctest::Approx(ref_forward(q, w)).epsilon(1e-12));
  }
}

TEST_CASE("forward stays inside (0,1)") {
  Rng rng = make_rng(3);
  for (int i = 0; i < 100; ++i) {
    const NetworkParams p = random_params(rng, 2, 4, 2);
    const WindowSample w = random_sample(rng, 2, 4);
    const double prob = forward(p, w);
    CHECK(prob > 0.0);
    CHECK(prob < 1.0);
  }
}

TEST_CASE("forward is exactly invariant under channel permutation") {
  Rng rng = make_rng(4);
  for (int i = 0; i < 100; ++i) {
    const int channels = 2 + static_cast<int>(rng.below(3));
    NetworkParams p = random_params(rng, 2, 3, channels);
    const WindowSample w = random_sample(rng, 2, 3);
    const double base = forward(p, w);

    // Rotate the channels (and their head weights) one slot.
    std::rotate(p.channels.begin(), p.channels.begin() + 1, p.channels.end());
    std::rotate(p.u.begin(), p.u.begin() + 1, p.u.end());
    CHECK(forward(p, w) == base);
  }
}

TEST_CASE("forward is exactly invariant under the per-channel sign flip") {
  Rng rng = make_rng(5);
  for (int i = 0; i < 100; ++i) {
    const int channels = 1 + static_cast<int>(rng.below(3));
    NetworkParams p = random_params(rng, 2, 3, channels);
    const WindowSample w = random_sample(rng, 2, 3);
    const double base = forward(p, w);

    const std::size_t f = rng.below(channels);
    for (double& wj : p.channels[f].w) wj = -wj;
    p.channels[f].b = -p.channels[f].b;
    p.u[f] = -p.u[f];
    CHECK(forward(p, w) == base);
  }
}

TEST_CASE("loss equals the straight-line cross entropy plus the L1 term") {
  Rng rng = make_rng(6);
  const NetworkParams p = random_params(rng, 2, 3, 2);
  std::vector<WindowSample> batch;
  for (int i = 0; i < 9; ++i) batch.push_back(random_sample(rng, 2, 3));

  for (double lambda : {0.0, 0.05, 1.0}) {
    double expected = 0.0;
    for (const WindowSample& w : batch) {
      const double prob = forward(p, w);
      expected += w.label == 1 ? -std::log(prob) : -std::log(1.0 - prob);
    }
    expected /= static_cast<double>(batch.size());
    for (double u : p.u) expected += lambda * std::abs(u);
    CHECK(loss(p, batch, lambda) == doctest::Approx(expected).epsilon(1e-12));
  }

  CHECK_THROWS_AS(loss(p, std::vector<WindowSample>{}, 0.0), std::invalid_argument);
}

TEST_CASE("an uninformative head scores log 2") {
  NetworkParams p = small_params();
  p.u = {0.0, 0.0};
  p.v = 0.0;
  const std::vector<WindowSample> batch{small_sample(1), small_sample(0)};
  CHECK(loss(p, batch, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("saturated predictions clamp the loss and zero the gradient") {
  NetworkParams p = small_params();
  p.u = {0.0, 0.0};
  p.v = 60.0;  // sigmoid(60) rounds to 1.0
  const std::vector<WindowSample> batch{small_sample(0)};
  CHECK(loss(p, batch, 0.0) == doctest::Approx(-std::log(kProbClamp)).epsilon(1e-4));

  const NetworkParams grad = gradient(p, batch, 0.0);
  CHECK(grad.c == 0.0);
  CHECK(grad.d == 0.0);
  CHECK(grad.v == 0.0);
  for (int f = 0; f < 2; ++f) {
    CHECK(grad.u[f] == 0.0);
    CHECK(grad.channels[f].b == 0.0);
    CHECK(grad.channels[f].kappa == 0.0);
    for (double w : grad.channels[f].w) CHECK(w == 0.0);
  }
}

TEST_CASE("analytic gradient matches finite differences") {
  Rng rng = make_rng(7);
  const double h = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 15; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(3));
    const int s = 2 + static_cast<int>(rng.below(3));
    const int channels = 1 + static_cast<int>(rng.below(2));
    const NetworkParams p = random_params(rng, m, s, channels);
    std::vector<WindowSample> batch;
    for (int i = 0; i < 6; ++i) batch.push_back(random_sample(rng, m, s));
    const double lambda = trial % 3 == 0 ? 0.0 : 0.01;

    const NetworkParams grad = gradient(p, batch, lambda);

    // Flattened central differences over every coordinate.
    auto probe = [&](auto&& get) {
      NetworkParams plus = p, minus = p;
      get(plus) += h;
      get(minus) -= h;
      return (loss(plus, batch, lambda) - loss(minus, batch, lambda)) / (2 * h);
    };
    auto rel = [](double a, double fd) {
      return std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
    };
    worst = std::max(worst, rel(grad.c, probe([](NetworkParams& q) -> double& { return q.c; })));
    worst = std::max(worst, rel(grad.d, probe([](NetworkParams& q) -> double& { return q.d; })));
    worst = std::max(worst, rel(grad.v, probe([](NetworkParams& q) -> double& { return q.v; })));
    for (int f = 0; f < channels; ++f) {
      for (int j = 0; j < m; ++j) {
        worst = std::max(
            worst, rel(grad.channels[f].w[j], probe([f, j](NetworkParams& q) -> double& {
                         return q.channels[f].w[j];
                       })));
      }
      worst = std::max(worst, rel(grad.channels[f].b, probe([f](NetworkParams& q) -> double& {
                                    return q.channels[f].b;
                                  })));
      worst = std::max(worst, rel(grad.channels[f].kappa, probe([f](NetworkParams& q) -> double& {
                                    return q.channels[f].kappa;
                                  })));
      worst = std::max(worst, rel(grad.u[f], probe([f](NetworkParams& q) -> double& {
                                    return q.u[f];
                                  })));
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("L1 term uses the zero subgradient at u == 0") {
  NetworkParams p = small_params();
  p.u = {0.0, 0.4};
  const std::vector<WindowSample> batch{small_sample(1)};
  const double lambda = 0.3;
  const NetworkParams with = gradient(p, batch, lambda);
  const NetworkParams without = gradient(p, batch, 0.0);
  CHECK(with.u[0] == without.u[0]);                    // no lambda at u == 0
  CHECK(with.u[1] == doctest::Approx(without.u[1] + lambda).epsilon(1e-12));

  p.u = {0.0, -0.4};
  const NetworkParams flipped = gradient(p, batch, lambda);
  const NetworkParams flipped0 = gradient(p, batch, 0.0);
  CHECK(flipped.u[1] == doctest::Approx(flipped0.u[1] - lambda).epsilon(1e-12));
}

TEST_CASE("loss_and_gradient agrees with the two separate calls") {
  Rng rng = make_rng(8);
  const NetworkParams p = random_params(rng, 2, 3, 2);
  std::vector<WindowSample> batch;
  for (int i = 0; i < 5; ++i) batch.push_back(random_sample(rng, 2, 3));

  NetworkParams grad_out = NetworkParams::zeros_like(p);
  const double value = loss_and_gradient(p, batch, 0.02, grad_out);
  CHECK(value == loss(p, batch, 0.02));
  const NetworkParams grad = gradient(p, batch, 0.02);
  CHECK(grad_out.c == grad.c);
  CHECK(grad_out.d == grad.d);
  CHECK(grad_out.v == grad.v);
  for (int f = 0; f < 2; ++f) {
    CHECK(grad_out.u[f] == grad.u[f]);
    CHECK(grad_out.channels[f].b == grad.channels[f].b);
    CHECK(grad_out.channels[f].kappa == grad.channels[f].kappa);
    for (int j = 0; j < 2; ++j) CHECK(grad_out.channels[f].w[j] == grad.channels[f].w[j]);
  }
}

TEST_CASE("predict_batch thresholds the forward probability") {
  Rng rng = make_rng(9);
  const NetworkParams p = random_params(rng, 2, 3, 1);
  std::vector<WindowSample> samples;
  for (int i = 0; i < 40; ++i) samples.push_back(random_sample(rng, 2, 3));

  const std::vector<int> labels = predict_batch(p, samples);
  REQUIRE(labels.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(labels[i] == (forward(p, samples[i]) >= 0.5 ? 1 : 0));
  }
  // An extreme threshold flips everything to 1.
  for (int label : predict_batch(p, samples, 0.0)) CHECK(label == 1);
}

TEST_CASE("interpretation of the fitted model") {
  const NetworkParams p = fitted_params();
  const InterpretationReport report = interpret(p, kNames);

  REQUIRE(report.split_threshold.has_value());
  CHECK(*report.split_threshold == doctest::Approx(15.9462).epsilon(1e-4));
  CHECK(report.c == 2.60);
  CHECK(report.v == -2.18);

  REQUIRE(report.channels.size() == 1);
  const ChannelReport& ch = report.channels[0];
  CHECK(ch.k == doctest::Approx(0.999999).epsilon(1e-9));
  CHECK(ch.u == 1.06);

  // Weights come out ordered by |weight| descending.
  REQUIRE(ch.weights.size() == 7);
  CHECK(ch.weights[0].name == "hpf");
  CHECK(ch.weights[0].weight == 4.19);
  CHECK(ch.weights[1].name == "unemployment");
  CHECK(ch.weights[1].weight == -4.0);
  CHECK(ch.weights[2].name == "working_medical");
  CHECK(ch.weights[3].name == "endowment");
  CHECK(ch.weights[4].name == "nonworking_medical");
  CHECK(ch.weights[5].name == "injury");
  CHECK(ch.weights[6].name == "maternity");

  // Insurances whose payment raises the channel: positive weights.
  std::vector<std::string> positive;
  for (const WeightEntry& e : ch.weights) {
    if (e.weight > 0.0) positive.push_back(e.name);
  }
  CHECK(positive == std::vector<std::string>{"hpf", "working_medical", "injury", "maternity"});

  CHECK(report.active_channels == std::vector<int>{1});

  // The formatted report contains the load-bearing numbers.
  const std::string text = format_interpretation(report);
  CHECK(text.find("hpf") != std::string::npos);
  CHECK(text.find("4.19") != std::string::npos);
  CHECK(text.find("-d/c") != std::string::npos);

  SUBCASE("name-count mismatch is rejected") {
    CHECK_THROWS_AS(interpret(p, {"just_one"}), std::invalid_argument);
  }
  SUBCASE("c == 0 leaves the split point undefined") {
    NetworkParams flat = p;
    flat.c = 0.0;
    CHECK_FALSE(interpret(flat, kNames).split_threshold.has_value());
  }
  SUBCASE("a zeroed head leaves no active channels") {
    NetworkParams inert = p;
    inert.u = {0.0};
    CHECK(interpret(inert, kNames).active_channels.empty());
  }
}

TEST_CASE("sign comparison against the published logistic coefficients") {
  const NetworkParams p = fitted_params();
  const std::vector<double> coeffs{2.02, -0.61, 0.32, -0.52, -1.16, 1.53, -0.12};

  const SignComparison cmp = compare_interpretations(p, kNames, coeffs);
  CHECK(cmp.channel == 1);
  CHECK(cmp.agreements == 7);
  for (const SignComparisonRow& row : cmp.rows) CHECK(row.opposite);

  // A coefficient vector with the same signs as w scores zero agreements.
  const SignComparison same =
      compare_interpretations(p, kNames, p.channels[0].w);
  CHECK(same.agreements == 0);

  // The u < 0 gauge flips the reported weights, not the agreements.
  NetworkParams flipped = p;
  for (double& w : flipped.channels[0].w) w = -w;
  flipped.channels[0].b = -flipped.channels[0].b;
  flipped.u[0] = -flipped.u[0];
  const SignComparison gauge = compare_interpretations(flipped, kNames, coeffs);
  CHECK(gauge.agreements == 7);
  for (std::size_t j = 0; j < gauge.rows.size(); ++j) {
    CHECK(gauge.rows[j].network_weight == cmp.rows[j].network_weight);
  }

  const std::string text = format_sign_comparison(cmp);
  CHECK(text.find("7/7") != std::string::npos);

  CHECK_THROWS_AS(compare_interpretations(p, kNames, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("network model files round-trip exactly") {
  Rng rng = make_rng(10);
  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "pcfnet_network_roundtrip.model";

  for (int i = 0; i < 10; ++i) {
    NetworkParams p = random_params(rng, 1 + static_cast<int>(rng.below(4)),
                                    1 + static_cast<int>(rng.below(5)),
                                    1 + static_cast<int>(rng.below(3)));
    // Exercise awkward but legal values.
    if (i == 0) p.c = 0.1 + 0.2;  // not exactly 0.3
    if (i == 1) p.v = -0.0;
    save_network_model(p, path.string());
    const NetworkParams q = load_network_model(path.string());
    CHECK(q.m == p.m);
    CHECK(q.s == p.s);
    CHECK(q.c == p.c);
    CHECK(q.d == p.d);
    CHECK(q.v == p.v);
    REQUIRE(q.channel_count() == p.channel_count());
    for (int f = 0; f < p.channel_count(); ++f) {
      CHECK(q.channels[f].w == p.channels[f].w);
      CHECK(q.channels[f].b == p.channels[f].b);
      CHECK(q.channels[f].kappa == p.channels[f].kappa);
      CHECK(q.u[f] == p.u[f]);
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("model loader rejects broken files") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path();
  const std::string path = (dir / "pcfnet_broken.model").string();

  CHECK_THROWS_AS(load_network_model((dir / "pcfnet_does_not_exist.model").string()),
                  ConfigError);

  auto write = [&](const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
  };

  write("");
  CHECK_THROWS_AS(load_network_model(path), DataError);

  write("version 2\nm 1\ns 1\nC 1\nc 1\nd 0\nw1 1\nb1 0\nkappa1 2\nu 1\nv 0\n");
  CHECK_THROWS_AS(load_network_model(path), DataError);  // unsupported version

  write("version 1\nm 1\ns 1\nC 1\nc 1\nd 0\nw1 1 2\nb1 0\nkappa1 2\nu 1\nv 0\n");
  CHECK_THROWS_AS(load_network_model(path), DataError);  // w length != m

  write("version 1\nm 1\ns 1\nC 1\nc 1\nd 0\n");
  CHECK_THROWS_AS(load_network_model(path), DataError);  // truncated

  write("version 1\nm 1\ns 1\nC 1\nc one\nd 0\nw1 1\nb1 0\nkappa1 2\nu 1\nv 0\n");
  CHECK_THROWS_AS(load_network_model(path), DataError);  // non-numeric

  write("version 1\nm 1\ns 1\nC 1\nc 1\nd 0\nw1 1\nb1 0\nkappa1 2\nu 1\nv 0\nextra 1\n");
  CHECK_THROWS_AS(load_network_model(path), DataError);  // trailing field

  write("unknown_kind 1\n");
  CHECK_THROWS_AS(peek_model_kind(path), DataError);

  write("version 1\nm 1\ns 1\nC 1\nc 1\nd 0\nw1 1\nb1 0\nkappa1 2\nu 1\nv 0\n");
  CHECK(peek_model_kind(path) == ModelKind::Network);
  CHECK_THROWS_AS(load_baseline_model(path), DataError);  // wrong family

  std::filesystem::remove(path);
}
