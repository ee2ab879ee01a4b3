#include "pcfnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "pcfnet/errors.hpp"
#include "pcfnet/rng.hpp"
#include "pcfnet/textio.hpp"

namespace pcfnet {

std::vector<std::string> default_insurance_names() {
  return {"endowment",  "working_medical", "unemployment", "injury",
          "maternity",  "nonworking_medical", "hpf"};
}

void PanelDataset::validate() const {
  if (m <= 0) throw DataError("panel dataset needs m > 0");
  if (insurance_names.size() != static_cast<std::size_t>(m)) {
    throw DataError("panel dataset has " + std::to_string(insurance_names.size()) +
                    " insurance names for m=" + std::to_string(m));
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const PanelRecord& rec = records[i];
    if (rec.payments.size() != static_cast<std::size_t>(m)) {
      throw DataError("record " + std::to_string(i) + " has wrong payment count");
    }
    for (double p : rec.payments) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw DataError("record for unit " + std::to_string(rec.unit_id) + " period " +
                        std::to_string(rec.period) + " has a negative or non-finite payment");
      }
    }
    if (rec.label && *rec.label != 0 && *rec.label != 1) {
      throw DataError("record for unit " + std::to_string(rec.unit_id) + " period " +
                      std::to_string(rec.period) + " has label outside {0,1}");
    }
    if (i > 0) {
      const PanelRecord& prev = records[i - 1];
      if (prev.unit_id == rec.unit_id) {
        if (prev.period == rec.period) {
          throw DataError("duplicate (unit, period) pair: unit " +
                          std::to_string(rec.unit_id) + " period " +
                          std::to_string(rec.period));
        }
        if (rec.period != prev.period + 1) {
          throw DataError("periods of unit " + std::to_string(rec.unit_id) +
                          " are not contiguous around period " + std::to_string(rec.period));
        }
      } else if (prev.unit_id > rec.unit_id) {
        throw DataError("records are not sorted by unit id");
      }
    }
  }
}

void GeneratorConfig::validate() const {
  if (n_units <= 0) throw ConfigError("n_units must be > 0");
  if (n_periods <= 0) throw ConfigError("n_periods must be > 0");
  if (employed_pay_prob.size() != unemployed_pay_prob.size() || employed_pay_prob.empty()) {
    throw ConfigError("pay probability vectors must be non-empty and equally long");
  }
  for (double p : employed_pay_prob) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("employed_pay_prob entries must lie in [0,1]");
  }
  for (double p : unemployed_pay_prob) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("unemployed_pay_prob entries must lie in [0,1]");
  }
  if (!(transition_eu >= 0.0 && transition_eu <= 1.0) ||
      !(transition_ue >= 0.0 && transition_ue <= 1.0)) {
    throw ConfigError("transition probabilities must lie in [0,1]");
  }
  if (!(amount_low >= 0.0) || !(amount_high > amount_low)) {
    throw ConfigError("payment amounts need 0 <= amount_low < amount_high");
  }
}

PanelDataset generate_synthetic(const GeneratorConfig& config) {
  config.validate();
  const int m = config.m();
  PanelDataset dataset;
  dataset.m = m;
  dataset.insurance_names =
      m == 7 ? default_insurance_names() : std::vector<std::string>();
  if (dataset.insurance_names.empty()) {
    for (int j = 1; j <= m; ++j) dataset.insurance_names.push_back("pay_" + std::to_string(j));
  }
  dataset.records.reserve(static_cast<std::size_t>(config.n_units) * config.n_periods);

  Rng rng(derive_seed(config.seed, seed_stream::kPayments));
  for (int unit = 1; unit <= config.n_units; ++unit) {
    bool employed = rng.bernoulli(0.5);
    for (int period = 1; period <= config.n_periods; ++period) {
      PanelRecord rec;
      rec.unit_id = unit;
      rec.period = period;
      rec.payments.resize(m, 0.0);
      const std::vector<double>& probs =
          employed ? config.employed_pay_prob : config.unemployed_pay_prob;
      for (int j = 0; j < m; ++j) {
        if (rng.bernoulli(probs[j])) {
          rec.payments[j] = rng.uniform(config.amount_low, config.amount_high);
        }
      }
      rec.label = employed ? 1 : 0;
      dataset.records.push_back(std::move(rec));
      if (employed) {
        if (rng.bernoulli(config.transition_eu)) employed = false;
      } else {
        if (rng.bernoulli(config.transition_ue)) employed = true;
      }
    }
  }
  dataset.validate();
  return dataset;
}

PanelDataset generate_teacher_labeled(const GeneratorConfig& config,
                                      const NetworkParams& teacher) {
  teacher.validate();
  if (teacher.m != config.m()) {
    throw ConfigError("teacher expects m=" + std::to_string(teacher.m) +
                      " insurances but the generator produces " + std::to_string(config.m()));
  }
  PanelDataset dataset = generate_synthetic(config);
  const int s = teacher.s;

  Rng label_rng(derive_seed(config.seed, seed_stream::kTeacherLabels));
  // Records are (unit, period) sorted and periods are contiguous from 1.
  std::vector<double> window(static_cast<std::size_t>(teacher.m) * s);
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    PanelRecord& rec = dataset.records[i];
    if (rec.period < s) {
      rec.label.reset();
      continue;
    }
    for (int back = 0; back < s; ++back) {
      const PanelRecord& past = dataset.records[i - static_cast<std::size_t>(s - 1 - back)];
      for (int j = 0; j < teacher.m; ++j) {
        window[static_cast<std::size_t>(j) * s + back] = past.payments[j];
      }
    }
    const WindowSample sample(teacher.m, s, window, 0);
    rec.label = label_rng.bernoulli(forward(teacher, sample)) ? 1 : 0;
  }
  return dataset;
}

std::vector<WindowSample> windowize(const PanelDataset& dataset, int s) {
  if (s <= 0) throw std::invalid_argument("windowize needs s > 0");
  dataset.validate();
  std::vector<WindowSample> samples;
  const int m = dataset.m;
  std::vector<double> window(static_cast<std::size_t>(m) * s);
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const PanelRecord& rec = dataset.records[i];
    if (!rec.label) continue;
    // Need s records of the same unit ending here; contiguity is validated,
    // so it suffices that the record s-1 slots back matches unit and period.
    if (i + 1 < static_cast<std::size_t>(s)) continue;
    const PanelRecord& oldest = dataset.records[i - static_cast<std::size_t>(s - 1)];
    if (oldest.unit_id != rec.unit_id || oldest.period != rec.period - (s - 1)) continue;
    for (int back = 0; back < s; ++back) {
      const PanelRecord& past = dataset.records[i - static_cast<std::size_t>(s - 1 - back)];
      for (int j = 0; j < m; ++j) {
        window[static_cast<std::size_t>(j) * s + back] = past.payments[j];
      }
    }
    samples.emplace_back(m, s, window, *rec.label);
  }
  return samples;
}

void scale_payments(std::vector<WindowSample>& samples, double payment_scale) {
  if (!(payment_scale > 0.0)) throw ConfigError("payment_scale must be > 0");
  if (payment_scale == 1.0) return;
  for (WindowSample& sample : samples) {
    for (double& p : sample.payments) p /= payment_scale;
  }
}

SampleSplit balanced_split(const std::vector<WindowSample>& samples, int n_per_class,
                           std::uint64_t seed) {
  if (n_per_class <= 0) throw ConfigError("n_per_class must be > 0");
  if (n_per_class % 2 != 0) {
    throw ConfigError("n_per_class must be even so both halves split evenly, got " +
                      std::to_string(n_per_class));
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < samples.size(); ++i) by_class[samples[i].label].push_back(i);
  for (int cls = 0; cls < 2; ++cls) {
    if (by_class[cls].size() < static_cast<std::size_t>(n_per_class)) {
      throw DataError("class " + std::to_string(cls) + " has only " +
                      std::to_string(by_class[cls].size()) + " samples, need " +
                      std::to_string(n_per_class));
    }
  }
  Rng rng(derive_seed(seed, seed_stream::kBalancedSplit));
  SampleSplit split;
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t>& idx = by_class[cls];
    // Partial Fisher-Yates: the first n_per_class entries become the draw
    // without replacement.
    for (int i = 0; i < n_per_class; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    const int half = n_per_class / 2;
    for (int i = 0; i < half; ++i) split.train.push_back(samples[idx[i]]);
    for (int i = half; i < n_per_class; ++i) split.test.push_back(samples[idx[i]]);
  }
  return split;
}

PanelDataset corrupt_missing(const PanelDataset& dataset, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("corruption rate must lie in [0,1]");
  dataset.validate();
  PanelDataset out = dataset;
  Rng rng(derive_seed(seed, seed_stream::kCorruption));
  for (PanelRecord& rec : out.records) {
    for (double& p : rec.payments) {
      if (rng.bernoulli(rate)) p = 0.0;
    }
  }
  return out;
}

void save_csv(const PanelDataset& dataset, const std::string& path) {
  dataset.validate();
  std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "unit_id,period";
  for (int j = 1; j <= dataset.m; ++j) out << ",pay_" << j;
  out << ",label\n";
  for (const PanelRecord& rec : dataset.records) {
    out << rec.unit_id << "," << rec.period;
    for (double p : rec.payments) out << "," << format_double(p);
    out << ",";
    if (rec.label) out << *rec.label;
    out << "\n";
  }
  if (!out) throw ConfigError("failed while writing '" + path + "'");
}

PanelDataset load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open data file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty (no header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_on(line, ',');
  if (header.size() < 4 || header[0] != "unit_id" || header[1] != "period" ||
      header.back() != "label") {
    throw DataError("'" + path + "' has an unexpected header: expected " +
                    "unit_id,period,pay_1,...,label");
  }
  const int m = static_cast<int>(header.size()) - 3;
  for (int j = 0; j < m; ++j) {
    if (header[2 + j] != "pay_" + std::to_string(j + 1)) {
      throw DataError("'" + path + "' header column " + std::to_string(j + 3) +
                      " should be pay_" + std::to_string(j + 1));
    }
  }

  PanelDataset dataset;
  dataset.m = m;
  dataset.insurance_names =
      m == 7 ? default_insurance_names() : std::vector<std::string>();
  if (dataset.insurance_names.empty()) {
    for (int j = 1; j <= m; ++j) dataset.insurance_names.push_back("pay_" + std::to_string(j));
  }

  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string context = "'" + path + "' line " + std::to_string(line_no);
    const std::vector<std::string> fields = split_on(line, ',');
    if (fields.size() != static_cast<std::size_t>(m) + 3) {
      throw DataError(context + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(m + 3));
    }
    PanelRecord rec;
    rec.unit_id = parse_int(fields[0], context);
    rec.period = static_cast<int>(parse_int(fields[1], context));
    rec.payments.resize(m);
    for (int j = 0; j < m; ++j) {
      rec.payments[j] = parse_double(fields[2 + j], context);
      if (!(rec.payments[j] >= 0.0) || !std::isfinite(rec.payments[j])) {
        throw DataError(context + ": payment pay_" + std::to_string(j + 1) +
                        " must be a finite non-negative amount");
      }
    }
    const std::string& label_field = fields.back();
    if (!label_field.empty()) {
      if (label_field == "0") {
        rec.label = 0;
      } else if (label_field == "1") {
        rec.label = 1;
      } else {
        throw DataError(context + ": label must be 0, 1 or blank, got '" + label_field + "'");
      }
    }
    dataset.records.push_back(std::move(rec));
  }

  std::stable_sort(dataset.records.begin(), dataset.records.end(),
                   [](const PanelRecord& a, const PanelRecord& b) {
                     if (a.unit_id != b.unit_id) return a.unit_id < b.unit_id;
                     return a.period < b.period;
                   });
  dataset.validate();
  return dataset;
}

}  // namespace pcfnet
