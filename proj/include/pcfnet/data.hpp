#pragma once
// Synthetic administrative payment panels and dataset plumbing: a two-state
// Markov generator with per-state payment probabilities, teacher relabeling,
// window extraction, balanced splits, missing-data corruption and CSV I/O.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcfnet/network.hpp"
#include "pcfnet/window_sample.hpp"

namespace pcfnet {

struct PanelRecord {
  long long unit_id = 0;
  int period = 0;                // contiguous within each unit
  std::vector<double> payments;  // length m, non-negative
  std::optional<int> label;      // 0/1; empty when unknown
};

struct PanelDataset {
  int m = 0;
  std::vector<std::string> insurance_names;  // length m
  std::vector<PanelRecord> records;          // sorted by (unit_id, period)

  // (unit, period) uniqueness, per-unit contiguity, non-negative payments.
  void validate() const;
};

// The seven canonical insurance names in column order.
std::vector<std::string> default_insurance_names();

struct GeneratorConfig {
  int n_units = 1000;
  int n_periods = 18;
  // Per-insurance payment probability in the employed / unemployed state.
  // Zero entries are structural: that insurance is never paid in that state.
  std::vector<double> employed_pay_prob{0.55, 0.69, 0.99, 0.68, 0.71, 0.0, 0.47};
  std::vector<double> unemployed_pay_prob{0.75, 0.0, 0.98, 0.0, 0.0, 0.002, 0.02};
  double transition_eu = 0.03;  // employed -> unemployed per period
  double transition_ue = 0.03;  // unemployed -> employed per period
  double amount_low = 5.0;      // positive payments ~ U(amount_low, amount_high)
  double amount_high = 100.0;
  std::uint64_t seed = 1;

  int m() const { return static_cast<int>(employed_pay_prob.size()); }
  void validate() const;
};

// Two-state Markov panel. Per unit: initial state ~ Bernoulli(0.5) employed;
// each period, insurance j pays U(amount_low, amount_high) with the state's
// probability; then the state may flip. Label = 1 iff employed that period.
// Draw order (kPayments stream): initial state; per period, per insurance a
// pay draw then (only if paying) an amount draw; then the transition draw.
PanelDataset generate_synthetic(const GeneratorConfig& config);

// Same payment process (identical kPayments draws for the same seed), but
// labels are Bernoulli(forward(teacher, window)) on the kTeacherLabels
// stream, drawn in (unit, period) order. Periods with fewer than teacher.s
// periods of history stay unlabeled.
PanelDataset generate_teacher_labeled(const GeneratorConfig& config,
                                      const NetworkParams& teacher);

// One sample per labeled record with s periods of history (window columns
// oldest to newest); unlabeled or short-history records contribute nothing.
// Samples come out sorted by (unit_id, period).
std::vector<WindowSample> windowize(const PanelDataset& dataset, int s);

// Divides every payment by payment_scale (the trainer's preprocessing step).
void scale_payments(std::vector<WindowSample>& samples, double payment_scale);

struct SampleSplit {
  std::vector<WindowSample> train, test;
};

// Draws n_per_class samples per class without replacement (kBalancedSplit
// stream), putting the first half of each class into train and the second
// into test. n_per_class must be even and available in both classes.
SampleSplit balanced_split(const std::vector<WindowSample>& samples, int n_per_class,
                           std::uint64_t seed);

// Sets each payment cell to 0 independently with the given probability
// (kCorruption stream; cells visited in record then insurance order).
// Labels are untouched. rate 0 returns an identical copy.
PanelDataset corrupt_missing(const PanelDataset& dataset, double rate, std::uint64_t seed);

// CSV schema: header unit_id,period,pay_1,...,pay_m,label; one record per
// row; blank label allowed; UTF-8, LF line endings. Payments are written in
// shortest round-trip form, so save -> load is value-exact.
void save_csv(const PanelDataset& dataset, const std::string& path);
PanelDataset load_csv(const std::string& path);

}  // namespace pcfnet
