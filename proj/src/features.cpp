#include "pcfnet/features.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "pcfnet/errors.hpp"
#include "pcfnet/rng.hpp"
#include "pcfnet/textio.hpp"

namespace pcfnet {

FeatureVector extract_features(const WindowSample& sample, int ic_threshold) {
  if (ic_threshold < 0) throw std::invalid_argument("ic_threshold must be >= 0");
  const int m = sample.m, s = sample.s;
  FeatureVector out;
  out.npc.resize(m);
  // NPC_j: terminal run of not-pay periods (payment exactly 0 is not paying).
  for (int j = 0; j < m; ++j) {
    int run = 0;
    for (int t = s - 1; t >= 0; --t) {
      if (sample.at(j, t) > 0.0) break;
      ++run;
    }
    out.npc[j] = static_cast<double>(run);
  }
  // IC: insurance types paid in the current (newest) period.
  for (int j = 0; j < m; ++j) {
    if (sample.at(j, s - 1) > 0.0) ++out.ic;
  }
  // PC: terminal run of periods whose insurance count exceeds the threshold.
  for (int t = s - 1; t >= 0; --t) {
    int count = 0;
    for (int j = 0; j < m; ++j) {
      if (sample.at(j, t) > 0.0) ++count;
    }
    if (count <= ic_threshold) break;
    ++out.pc;
  }
  return out;
}

std::vector<double> feature_row(const FeatureVector& features, FeatureSubset subset) {
  std::vector<double> row;
  const bool npc = subset == FeatureSubset::NpcIcPc || subset == FeatureSubset::Npc;
  const bool ic = subset == FeatureSubset::NpcIcPc || subset == FeatureSubset::PcIc ||
                  subset == FeatureSubset::Ic;
  const bool pc = subset == FeatureSubset::NpcIcPc || subset == FeatureSubset::PcIc ||
                  subset == FeatureSubset::Pc;
  if (npc) row.insert(row.end(), features.npc.begin(), features.npc.end());
  if (ic) row.push_back(static_cast<double>(features.ic));
  if (pc) row.push_back(static_cast<double>(features.pc));
  return row;
}

std::vector<std::string> feature_names(FeatureSubset subset,
                                       const std::vector<std::string>& insurance_names) {
  std::vector<std::string> names;
  const bool npc = subset == FeatureSubset::NpcIcPc || subset == FeatureSubset::Npc;
  const bool ic = subset == FeatureSubset::NpcIcPc || subset == FeatureSubset::PcIc ||
                  subset == FeatureSubset::Ic;
  const bool pc = subset == FeatureSubset::NpcIcPc || subset == FeatureSubset::PcIc ||
                  subset == FeatureSubset::Pc;
  if (npc) {
    for (const std::string& name : insurance_names) names.push_back("npc_" + name);
  }
  if (ic) names.push_back("ic");
  if (pc) names.push_back("pc");
  return names;
}

std::string subset_id(FeatureSubset subset) {
  switch (subset) {
    case FeatureSubset::NpcIcPc: return "npc_ic_pc";
    case FeatureSubset::Npc: return "npc";
    case FeatureSubset::PcIc: return "pc_ic";
    case FeatureSubset::Pc: return "pc";
    case FeatureSubset::Ic: return "ic";
  }
  throw std::invalid_argument("unknown feature subset");
}

std::string subset_label(FeatureSubset subset) {
  switch (subset) {
    case FeatureSubset::NpcIcPc: return "NPC, IC, PC";
    case FeatureSubset::Npc: return "NPC";
    case FeatureSubset::PcIc: return "PC, IC";
    case FeatureSubset::Pc: return "PC";
    case FeatureSubset::Ic: return "IC";
  }
  throw std::invalid_argument("unknown feature subset");
}

FeatureSubset subset_from_id(const std::string& id) {
  for (FeatureSubset subset : all_subsets()) {
    if (subset_id(subset) == id) return subset;
  }
  throw ConfigError("unknown feature subset '" + id +
                    "' (expected npc_ic_pc, npc, pc_ic, pc or ic)");
}

std::span<const FeatureSubset> all_subsets() {
  static const std::array<FeatureSubset, 5> subsets = {
      FeatureSubset::NpcIcPc, FeatureSubset::Npc, FeatureSubset::PcIc, FeatureSubset::Pc,
      FeatureSubset::Ic};
  return subsets;
}

void export_features_csv(const std::string& path, std::span<const WindowSample> samples,
                         int ic_threshold) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  if (samples.empty()) throw std::invalid_argument("feature export needs samples");
  const int m = samples[0].m;
  for (int j = 1; j <= m; ++j) out << "npc_" << j << ",";
  out << "ic,pc,label\n";
  for (const WindowSample& sample : samples) {
    const FeatureVector fv = extract_features(sample, ic_threshold);
    for (double x : fv.npc) out << format_double(x) << ",";
    out << fv.ic << "," << fv.pc << "," << sample.label << "\n";
  }
}

// ---------------------------------------------------------------------------
// Baseline objectives (internal)
// ---------------------------------------------------------------------------

namespace {

// Dense feature matrix built once per fit.
struct FeatureTable {
  std::vector<double> rows;  // n x width, row-major
  std::vector<int> labels;
  std::size_t width = 0;
  std::size_t n = 0;

  std::span<const double> row(std::size_t i) const {
    return {rows.data() + i * width, width};
  }
};

FeatureTable build_table(std::span<const WindowSample> samples, FeatureSubset subset,
                         int ic_threshold) {
  FeatureTable table;
  table.n = samples.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::vector<double> row =
        feature_row(extract_features(samples[i], ic_threshold), subset);
    if (i == 0) table.width = row.size();
    table.rows.insert(table.rows.end(), row.begin(), row.end());
    table.labels.push_back(samples[i].label);
  }
  return table;
}

double clamped_bce(double prob, int label) {
  const double pc = std::min(std::max(prob, kProbClamp), 1.0 - kProbClamp);
  return label == 1 ? -std::log(pc) : -std::log(1.0 - pc);
}

// Logistic regression: params = [weights..., intercept].
class LogisticObjective : public Objective {
 public:
  explicit LogisticObjective(FeatureTable table) : table_(std::move(table)) {}

  std::size_t dim() const override { return table_.width + 1; }
  std::size_t sample_count() const override { return table_.n; }
  int label(std::size_t i) const override { return table_.labels[i]; }

  double predict(std::span<const double> params, std::size_t i) const override {
    auto row = table_.row(i);
    double z = 0.0;
    for (std::size_t j = 0; j < table_.width; ++j) z += params[j] * row[j];
    return logistic(z + params[table_.width]);
  }

  double loss(std::span<const double> params, std::span<const std::size_t> batch,
              std::span<double> grad) const override {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    double total = 0.0;
    for (std::size_t idx : batch) {
      const double prob = predict(params, idx);
      const int y = table_.labels[idx];
      total += clamped_bce(prob, y);
      if (!grad.empty() && prob > kProbClamp && prob < 1.0 - kProbClamp) {
        const double gz = prob - static_cast<double>(y);
        auto row = table_.row(idx);
        for (std::size_t j = 0; j < table_.width; ++j) grad[j] += gz * row[j];
        grad[table_.width] += gz;
      }
    }
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    if (!grad.empty()) {
      for (double& g : grad) g *= inv_n;
    }
    return total * inv_n;
  }

  std::vector<ParamGroup> param_groups() const override {
    return {{"weights", 0, table_.width}, {"intercept", table_.width, table_.width + 1}};
  }

 private:
  FeatureTable table_;
};

// One hidden layer of logistic units, logistic output.
// params = [w1 (h x width, row-major), b1 (h), w2 (h), b2].
class MlpObjective : public Objective {
 public:
  MlpObjective(FeatureTable table, int hidden) : table_(std::move(table)), hidden_(hidden) {
    if (hidden_ <= 0) throw std::invalid_argument("mlp hidden width must be > 0");
  }

  std::size_t dim() const override {
    return static_cast<std::size_t>(hidden_) * table_.width + 2 * hidden_ + 1;
  }
  std::size_t sample_count() const override { return table_.n; }
  int label(std::size_t i) const override { return table_.labels[i]; }

  double predict(std::span<const double> params, std::size_t i) const override {
    std::vector<double> h(hidden_);
    return forward_row(params, table_.row(i), h);
  }

  double loss(std::span<const double> params, std::span<const std::size_t> batch,
              std::span<double> grad) const override {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t w = table_.width;
    const std::size_t b1_off = static_cast<std::size_t>(hidden_) * w;
    const std::size_t w2_off = b1_off + hidden_;
    const std::size_t b2_off = w2_off + hidden_;
    std::vector<double> h(hidden_);
    double total = 0.0;
    for (std::size_t idx : batch) {
      auto row = table_.row(idx);
      const double prob = forward_row(params, row, h);
      const int y = table_.labels[idx];
      total += clamped_bce(prob, y);
      if (grad.empty() || prob <= kProbClamp || prob >= 1.0 - kProbClamp) continue;
      const double gz = prob - static_cast<double>(y);
      grad[b2_off] += gz;
      for (int a = 0; a < hidden_; ++a) {
        grad[w2_off + a] += gz * h[a];
        const double gh = gz * params[w2_off + a] * (h[a] * (1.0 - h[a]));
        grad[b1_off + a] += gh;
        for (std::size_t j = 0; j < w; ++j) {
          grad[static_cast<std::size_t>(a) * w + j] += gh * row[j];
        }
      }
    }
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    if (!grad.empty()) {
      for (double& g : grad) g *= inv_n;
    }
    return total * inv_n;
  }

  std::vector<ParamGroup> param_groups() const override {
    const std::size_t w = table_.width;
    const std::size_t b1_off = static_cast<std::size_t>(hidden_) * w;
    const std::size_t w2_off = b1_off + hidden_;
    const std::size_t b2_off = w2_off + hidden_;
    return {{"w1", 0, b1_off}, {"b1", b1_off, w2_off}, {"w2", w2_off, b2_off},
            {"b2", b2_off, b2_off + 1}};
  }

  // Hidden init ~ U(-0.5, 0.5), biases 0; w1 draws first, then w2.
  std::vector<double> initial_params(std::uint64_t seed) const {
    Rng rng(derive_seed(seed, seed_stream::kInit));
    std::vector<double> params(dim(), 0.0);
    const std::size_t b1_off = static_cast<std::size_t>(hidden_) * table_.width;
    const std::size_t w2_off = b1_off + hidden_;
    for (std::size_t i = 0; i < b1_off; ++i) params[i] = rng.uniform(-0.5, 0.5);
    for (int a = 0; a < hidden_; ++a) params[w2_off + a] = rng.uniform(-0.5, 0.5);
    return params;
  }

 private:
  double forward_row(std::span<const double> params, std::span<const double> row,
                     std::vector<double>& h) const {
    const std::size_t w = table_.width;
    const std::size_t b1_off = static_cast<std::size_t>(hidden_) * w;
    const std::size_t w2_off = b1_off + hidden_;
    const std::size_t b2_off = w2_off + hidden_;
    double z = params[b2_off];
    for (int a = 0; a < hidden_; ++a) {
      double acc = params[b1_off + a];
      for (std::size_t j = 0; j < w; ++j) acc += params[static_cast<std::size_t>(a) * w + j] * row[j];
      h[a] = logistic(acc);
      z += params[w2_off + a] * h[a];
    }
    return logistic(z);
  }

  FeatureTable table_;
  int hidden_;
};

}  // namespace

double baseline_predict(const BaselineModel& model, const WindowSample& sample) {
  if (const auto* logit = std::get_if<LogisticModel>(&model)) {
    const std::vector<double> row =
        feature_row(extract_features(sample, logit->ic_threshold), logit->subset);
    if (row.size() != logit->weights.size()) {
      throw std::invalid_argument("logistic model feature width mismatch");
    }
    double z = logit->intercept;
    for (std::size_t j = 0; j < row.size(); ++j) z += logit->weights[j] * row[j];
    return logistic(z);
  }
  const MlpModel& mlp = std::get<MlpModel>(model);
  const std::vector<double> row =
      feature_row(extract_features(sample, mlp.ic_threshold), mlp.subset);
  if (row.size() * mlp.hidden != mlp.w1.size()) {
    throw std::invalid_argument("mlp model feature width mismatch");
  }
  double z = mlp.b2;
  for (int a = 0; a < mlp.hidden; ++a) {
    double acc = mlp.b1[a];
    for (std::size_t j = 0; j < row.size(); ++j) {
      acc += mlp.w1[static_cast<std::size_t>(a) * row.size() + j] * row[j];
    }
    z += mlp.w2[a] * logistic(acc);
  }
  return logistic(z);
}

BaselineFit fit_baseline(BaselineKind kind, FeatureSubset subset,
                         std::span<const WindowSample> train_samples,
                         std::span<const WindowSample> test_samples,
                         const std::vector<std::string>& insurance_names,
                         const TrainConfig& config, int ic_threshold, int mlp_hidden) {
  if (train_samples.empty() || test_samples.empty()) {
    throw ConfigError("baseline fitting needs non-empty train and test sets");
  }
  const int m = train_samples[0].m;
  const int s = train_samples[0].s;
  if (insurance_names.size() != static_cast<std::size_t>(m)) {
    throw ConfigError("baseline fitting got " + std::to_string(insurance_names.size()) +
                      " insurance names for m=" + std::to_string(m));
  }
  FeatureTable train_table = build_table(train_samples, subset, ic_threshold);
  FeatureTable test_table = build_table(test_samples, subset, ic_threshold);

  BaselineFit out;
  if (kind == BaselineKind::Logistic) {
    LogisticObjective train_obj(std::move(train_table));
    LogisticObjective test_obj(std::move(test_table));
    // Convex problem: the zero vector is a deterministic, seed-free init.
    FitResult fitted = fit(train_obj, test_obj, std::vector<double>(train_obj.dim(), 0.0),
                           config);
    LogisticModel model;
    model.m = m;
    model.s = s;
    model.ic_threshold = ic_threshold;
    model.subset = subset;
    model.feature_names = feature_names(subset, insurance_names);
    model.weights.assign(fitted.params.begin(), fitted.params.end() - 1);
    model.intercept = fitted.params.back();
    out.model = std::move(model);
    out.history = std::move(fitted.history);
  } else {
    MlpObjective train_obj(std::move(train_table), mlp_hidden);
    MlpObjective test_obj(std::move(test_table), mlp_hidden);
    FitResult fitted = fit(train_obj, test_obj, train_obj.initial_params(config.seed), config);
    MlpModel model;
    model.m = m;
    model.s = s;
    model.ic_threshold = ic_threshold;
    model.hidden = mlp_hidden;
    model.subset = subset;
    model.feature_names = feature_names(subset, insurance_names);
    const std::size_t width = model.feature_names.size();
    const std::size_t b1_off = static_cast<std::size_t>(mlp_hidden) * width;
    model.w1.assign(fitted.params.begin(), fitted.params.begin() + b1_off);
    model.b1.assign(fitted.params.begin() + b1_off, fitted.params.begin() + b1_off + mlp_hidden);
    model.w2.assign(fitted.params.begin() + b1_off + mlp_hidden,
                    fitted.params.begin() + b1_off + 2 * mlp_hidden);
    model.b2 = fitted.params.back();
    out.model = std::move(model);
    out.history = std::move(fitted.history);
  }
  out.test_accuracy = out.history.empty() ? 0.0 : out.history.back().test_accuracy;
  return out;
}

Metrics evaluate_baseline(const BaselineModel& model, std::span<const WindowSample> samples) {
  if (samples.empty()) throw std::invalid_argument("evaluate needs at least one sample");
  Metrics metrics;
  metrics.n = samples.size();
  double total = 0.0;
  long correct = 0;
  for (const WindowSample& sample : samples) {
    const double prob = baseline_predict(model, sample);
    const int y = sample.label;
    const int yhat = prob >= 0.5 ? 1 : 0;
    metrics.confusion[y][yhat] += 1;
    if (y == yhat) ++correct;
    total += clamped_bce(prob, y);
  }
  metrics.accuracy = static_cast<double>(correct) / static_cast<double>(metrics.n);
  metrics.mean_loss = total / static_cast<double>(metrics.n);
  return metrics;
}

std::string format_comparison_table(std::span<const ComparisonRow> rows,
                                    const std::string& footnote) {
  if (rows.empty()) throw std::invalid_argument("comparison table needs rows");
  std::size_t model_width = 5, inputs_width = 6;
  for (const ComparisonRow& row : rows) {
    if (!std::isfinite(row.accuracy) || row.accuracy < 0.0 || row.accuracy > 1.0) {
      throw ConfigError("comparison row '" + row.model + " / " + row.inputs +
                        "' has no valid accuracy");
    }
    model_width = std::max(model_width, row.model.size());
    inputs_width = std::max(inputs_width, row.inputs.size());
  }
  auto pad = [](const std::string& text, std::size_t width) {
    return text + std::string(width - text.size() + 2, ' ');
  };
  std::string out = " # " + pad("Model", model_width) + pad("Inputs", inputs_width) +
                    "Accuracy\n";
  char buf[32];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%2zu ", i + 1);
    out += buf;
    out += pad(rows[i].model, model_width) + pad(rows[i].inputs, inputs_width);
    std::snprintf(buf, sizeof(buf), "%.5f", rows[i].accuracy);
    out += buf;
    out += "\n";
  }
  if (!footnote.empty()) out += footnote + "\n";
  return out;
}

}  // namespace pcfnet
