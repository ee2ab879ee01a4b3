#include "pcfnet/config.hpp"

#include <fstream>

#include "pcfnet/errors.hpp"
#include "pcfnet/textio.hpp"

namespace pcfnet {
namespace {

int to_int(const std::string& value, const std::string& context) {
  return static_cast<int>(parse_int(value, context));
}

std::vector<double> to_doubles(const std::string& value, const std::string& context) {
  std::vector<double> out;
  for (const std::string& piece : split_on(value, ',')) {
    out.push_back(parse_double(trim(piece), context));
  }
  return out;
}

}  // namespace

void AppConfig::validate() const {
  train.validate();
  generator.validate();
  if (channels <= 0) throw ConfigError("channels must be > 0");
  if (s <= 0) throw ConfigError("s must be > 0");
  if (n_per_class <= 0) throw ConfigError("n_per_class must be > 0");
  if (ic_threshold < 0) throw ConfigError("ic_threshold must be >= 0");
  if (mlp_hidden <= 0) throw ConfigError("mlp_hidden must be > 0");
}

void apply_config_entry(AppConfig& config, const std::string& key, const std::string& value,
                        const std::string& context) try {
  if (key == "learning_rate") {
    config.train.learning_rate = parse_double(value, context);
  } else if (key == "beta1") {
    config.train.beta1 = parse_double(value, context);
  } else if (key == "beta2") {
    config.train.beta2 = parse_double(value, context);
  } else if (key == "eps_adam") {
    config.train.eps_adam = parse_double(value, context);
  } else if (key == "epochs") {
    config.train.epochs = to_int(value, context);
  } else if (key == "batch_size") {
    config.train.batch_size = to_int(value, context);
  } else if (key == "lambda") {
    config.train.lambda = parse_double(value, context);
  } else if (key == "payment_scale") {
    config.train.payment_scale = parse_double(value, context);
  } else if (key == "seed") {
    const std::uint64_t seed = static_cast<std::uint64_t>(parse_int(value, context));
    config.train.seed = seed;
    config.generator.seed = seed;
  } else if (key == "channels") {
    config.channels = to_int(value, context);
  } else if (key == "s") {
    config.s = to_int(value, context);
  } else if (key == "n_per_class") {
    config.n_per_class = to_int(value, context);
  } else if (key == "ic_threshold") {
    config.ic_threshold = to_int(value, context);
  } else if (key == "mlp_hidden") {
    config.mlp_hidden = to_int(value, context);
  } else if (key == "n_units") {
    config.generator.n_units = to_int(value, context);
  } else if (key == "n_periods") {
    config.generator.n_periods = to_int(value, context);
  } else if (key == "transition_eu") {
    config.generator.transition_eu = parse_double(value, context);
  } else if (key == "transition_ue") {
    config.generator.transition_ue = parse_double(value, context);
  } else if (key == "amount_low") {
    config.generator.amount_low = parse_double(value, context);
  } else if (key == "amount_high") {
    config.generator.amount_high = parse_double(value, context);
  } else if (key == "employed_pay_prob") {
    config.generator.employed_pay_prob = to_doubles(value, context);
  } else if (key == "unemployed_pay_prob") {
    config.generator.unemployed_pay_prob = to_doubles(value, context);
  } else {
    throw ConfigError(context + ": unknown config key '" + key + "'");
  }
} catch (const DataError& error) {
  // The number parsers report DataError; a bad value in a config file is a
  // configuration problem, so keep the whole module on one error type.
  throw ConfigError(error.what());
}

AppConfig load_config(const std::string& path, AppConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::string context = "config file '" + path + "' line " + std::to_string(line_no);
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(context + ": expected key=value, got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError(context + ": empty key");
    apply_config_entry(base, key, value, context);
  }
  base.validate();
  return base;
}

}  // namespace pcfnet
