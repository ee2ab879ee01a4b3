// Flat key=value configuration shared by every command.  One namespace of
// keys covers optimizer, network-shape and generator settings so a single
// file can drive generate → train → compare end to end.
//
// File format: `key = value` per line, `#` starts a comment, blank lines are
// skipped.  List-valued keys (the pay-probability vectors) take
// comma-separated numbers.  Unknown keys raise ConfigError naming the key —
// typos should never be silently ignored.
#pragma once

#include <string>

#include "pcfnet/data.hpp"
#include "pcfnet/training.hpp"

namespace pcfnet {

struct AppConfig {
  TrainConfig train;
  GeneratorConfig generator;
  int channels = 1;        // persistent-change channels C
  int s = 6;               // window length in periods
  int n_per_class = 2000;  // balanced-split size per label
  int ic_threshold = 2;    // run length that counts as "persistent" for PC/IC
  int mlp_hidden = 16;     // hidden width of the MLP baseline

  void validate() const;
};

// Parses a config file into `base` (so command-line defaults shine through
// for keys the file does not mention).  The `seed` key seeds training and
// generation alike.  ConfigError on unknown keys, bad numbers, or an
// unreadable file.
AppConfig load_config(const std::string& path, AppConfig base = AppConfig{});

// Applies one `key=value` assignment; shared by the file parser and any
// future override flags.  `context` prefixes error messages.
void apply_config_entry(AppConfig& config, const std::string& key, const std::string& value,
                        const std::string& context);

}  // namespace pcfnet
