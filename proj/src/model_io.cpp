#include "pcfnet/model_io.hpp"

#include <fstream>
#include <utility>
#include <vector>

#include "pcfnet/errors.hpp"
#include "pcfnet/textio.hpp"

namespace pcfnet {
namespace {

// One parsed `key value...` line.
struct Field {
  std::string key;
  std::vector<std::string> values;
  long line_no = 0;
};

std::vector<Field> read_fields(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  std::vector<Field> fields;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    std::vector<std::string> tokens;
    for (const std::string& tok : split_on(trimmed, ' ')) {
      if (!tok.empty()) tokens.push_back(tok);
    }
    Field field;
    field.key = tokens.front();
    field.values.assign(tokens.begin() + 1, tokens.end());
    field.line_no = line_no;
    fields.push_back(std::move(field));
  }
  if (fields.empty()) throw DataError("model file '" + path + "' is empty");
  return fields;
}

// Sequential reader over the canonical field order.
class FieldReader {
 public:
  FieldReader(std::string path, std::vector<Field> fields)
      : path_(std::move(path)), fields_(std::move(fields)) {}

  const Field& expect(const std::string& key, std::size_t n_values) {
    if (next_ >= fields_.size()) {
      throw DataError("model file '" + path_ + "' ends early, expected field '" + key + "'");
    }
    const Field& field = fields_[next_++];
    if (field.key != key) {
      throw DataError("model file '" + path_ + "' line " + std::to_string(field.line_no) +
                      ": expected field '" + key + "', found '" + field.key + "'");
    }
    if (field.values.size() != n_values) {
      throw DataError("model file '" + path_ + "' line " + std::to_string(field.line_no) +
                      ": field '" + key + "' needs " + std::to_string(n_values) +
                      " value(s), found " + std::to_string(field.values.size()));
    }
    return field;
  }

  long long expect_int(const std::string& key) {
    const Field& field = expect(key, 1);
    return parse_int(field.values[0], context(field));
  }

  double expect_double(const std::string& key) {
    const Field& field = expect(key, 1);
    return parse_double(field.values[0], context(field));
  }

  std::vector<double> expect_doubles(const std::string& key, std::size_t n) {
    const Field& field = expect(key, n);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = parse_double(field.values[i], context(field));
    return out;
  }

  std::vector<std::string> expect_strings(const std::string& key, std::size_t n) {
    return expect(key, n).values;
  }

  void expect_end() const {
    if (next_ < fields_.size()) {
      const Field& field = fields_[next_];
      throw DataError("model file '" + path_ + "' line " + std::to_string(field.line_no) +
                      ": unexpected trailing field '" + field.key + "'");
    }
  }

 private:
  std::string context(const Field& field) const {
    return "model file '" + path_ + "' line " + std::to_string(field.line_no) +
           " field '" + field.key + "'";
  }

  std::string path_;
  std::vector<Field> fields_;
  std::size_t next_ = 0;
};

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  return out;
}

void write_doubles(std::ofstream& out, const std::string& key,
                   const std::vector<double>& values) {
  out << key;
  for (double v : values) out << " " << format_double(v);
  out << "\n";
}

void check_positive_count(const std::string& path, const std::string& what, long long n) {
  if (n <= 0 || n > 1'000'000) {
    throw DataError("model file '" + path + "': " + what + " must be a positive count, got " +
                    std::to_string(n));
  }
}

// Column count of a feature subset; delegates to the feature-naming code so
// the two can never drift apart.
std::size_t subset_feature_count(FeatureSubset subset, int m) {
  return feature_names(subset, std::vector<std::string>(m, "x")).size();
}

}  // namespace

ModelKind peek_model_kind(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  std::string line;
  while (std::getline(in, line)) {
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const std::string key = split_on(trimmed, ' ').front();
    if (key == "version") return ModelKind::Network;
    if (key == "logistic_version") return ModelKind::Logistic;
    if (key == "mlp_version") return ModelKind::Mlp;
    throw DataError("model file '" + path + "' starts with unknown field '" + key + "'");
  }
  throw DataError("model file '" + path + "' is empty");
}

void save_network_model(const NetworkParams& params, const std::string& path) {
  params.validate();
  std::ofstream out = open_for_write(path);
  out << "version 1\n";
  out << "m " << params.m << "\n";
  out << "s " << params.s << "\n";
  out << "C " << params.channel_count() << "\n";
  out << "c " << format_double(params.c) << "\n";
  out << "d " << format_double(params.d) << "\n";
  for (std::size_t i = 0; i < params.channels.size(); ++i) {
    const std::string idx = std::to_string(i + 1);
    write_doubles(out, "w" + idx, params.channels[i].w);
    out << "b" << idx << " " << format_double(params.channels[i].b) << "\n";
    out << "kappa" << idx << " " << format_double(params.channels[i].kappa) << "\n";
  }
  write_doubles(out, "u", params.u);
  out << "v " << format_double(params.v) << "\n";
  if (!out) throw ConfigError("failed while writing '" + path + "'");
}

NetworkParams load_network_model(const std::string& path) {
  FieldReader reader(path, read_fields(path));
  const long long version = reader.expect_int("version");
  if (version != 1) {
    throw DataError("model file '" + path + "': unsupported version " + std::to_string(version));
  }
  NetworkParams params;
  const long long m = reader.expect_int("m");
  const long long s = reader.expect_int("s");
  const long long channels = reader.expect_int("C");
  check_positive_count(path, "m", m);
  check_positive_count(path, "s", s);
  check_positive_count(path, "C", channels);
  params.m = static_cast<int>(m);
  params.s = static_cast<int>(s);
  params.c = reader.expect_double("c");
  params.d = reader.expect_double("d");
  params.channels.resize(channels);
  for (long long i = 0; i < channels; ++i) {
    const std::string idx = std::to_string(i + 1);
    ChannelParams& ch = params.channels[i];
    ch.w = reader.expect_doubles("w" + idx, static_cast<std::size_t>(m));
    ch.b = reader.expect_double("b" + idx);
    ch.kappa = reader.expect_double("kappa" + idx);
  }
  params.u = reader.expect_doubles("u", static_cast<std::size_t>(channels));
  params.v = reader.expect_double("v");
  reader.expect_end();
  params.validate();
  return params;
}

namespace {

void save_logistic(const LogisticModel& model, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "logistic_version 1\n";
  out << "m " << model.m << "\n";
  out << "s " << model.s << "\n";
  out << "ic_threshold " << model.ic_threshold << "\n";
  out << "subset " << subset_id(model.subset) << "\n";
  out << "features";
  for (const std::string& name : model.feature_names) out << " " << name;
  out << "\n";
  write_doubles(out, "weights", model.weights);
  out << "intercept " << format_double(model.intercept) << "\n";
  if (!out) throw ConfigError("failed while writing '" + path + "'");
}

void save_mlp(const MlpModel& model, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "mlp_version 1\n";
  out << "m " << model.m << "\n";
  out << "s " << model.s << "\n";
  out << "ic_threshold " << model.ic_threshold << "\n";
  out << "subset " << subset_id(model.subset) << "\n";
  out << "hidden " << model.hidden << "\n";
  out << "features";
  for (const std::string& name : model.feature_names) out << " " << name;
  out << "\n";
  const std::size_t nf = model.feature_names.size();
  for (int h = 0; h < model.hidden; ++h) {
    std::vector<double> row(model.w1.begin() + static_cast<std::ptrdiff_t>(h * nf),
                            model.w1.begin() + static_cast<std::ptrdiff_t>((h + 1) * nf));
    write_doubles(out, "w1_" + std::to_string(h + 1), row);
  }
  write_doubles(out, "b1", model.b1);
  write_doubles(out, "w2", model.w2);
  out << "b2 " << format_double(model.b2) << "\n";
  if (!out) throw ConfigError("failed while writing '" + path + "'");
}

LogisticModel load_logistic(const std::string& path, FieldReader& reader) {
  LogisticModel model;
  const long long version = reader.expect_int("logistic_version");
  if (version != 1) {
    throw DataError("model file '" + path + "': unsupported logistic_version " +
                    std::to_string(version));
  }
  const long long m = reader.expect_int("m");
  const long long s = reader.expect_int("s");
  check_positive_count(path, "m", m);
  check_positive_count(path, "s", s);
  model.m = static_cast<int>(m);
  model.s = static_cast<int>(s);
  model.ic_threshold = static_cast<int>(reader.expect_int("ic_threshold"));
  model.subset = subset_from_id(reader.expect("subset", 1).values[0]);
  const std::size_t nf = subset_feature_count(model.subset, model.m);
  model.feature_names = reader.expect_strings("features", nf);
  model.weights = reader.expect_doubles("weights", nf);
  model.intercept = reader.expect_double("intercept");
  reader.expect_end();
  return model;
}

MlpModel load_mlp(const std::string& path, FieldReader& reader) {
  MlpModel model;
  const long long version = reader.expect_int("mlp_version");
  if (version != 1) {
    throw DataError("model file '" + path + "': unsupported mlp_version " +
                    std::to_string(version));
  }
  const long long m = reader.expect_int("m");
  const long long s = reader.expect_int("s");
  check_positive_count(path, "m", m);
  check_positive_count(path, "s", s);
  model.m = static_cast<int>(m);
  model.s = static_cast<int>(s);
  model.ic_threshold = static_cast<int>(reader.expect_int("ic_threshold"));
  model.subset = subset_from_id(reader.expect("subset", 1).values[0]);
  const long long hidden = reader.expect_int("hidden");
  check_positive_count(path, "hidden", hidden);
  model.hidden = static_cast<int>(hidden);
  const std::size_t nf = subset_feature_count(model.subset, model.m);
  model.feature_names = reader.expect_strings("features", nf);
  for (int h = 0; h < model.hidden; ++h) {
    const std::vector<double> row = reader.expect_doubles("w1_" + std::to_string(h + 1), nf);
    model.w1.insert(model.w1.end(), row.begin(), row.end());
  }
  model.b1 = reader.expect_doubles("b1", static_cast<std::size_t>(model.hidden));
  model.w2 = reader.expect_doubles("w2", static_cast<std::size_t>(model.hidden));
  model.b2 = reader.expect_double("b2");
  reader.expect_end();
  return model;
}

}  // namespace

void save_baseline_model(const BaselineModel& model, const std::string& path) {
  if (const LogisticModel* logistic = std::get_if<LogisticModel>(&model)) {
    save_logistic(*logistic, path);
  } else {
    save_mlp(std::get<MlpModel>(model), path);
  }
}

BaselineModel load_baseline_model(const std::string& path) {
  const ModelKind kind = peek_model_kind(path);
  FieldReader reader(path, read_fields(path));
  switch (kind) {
    case ModelKind::Logistic:
      return load_logistic(path, reader);
    case ModelKind::Mlp:
      return load_mlp(path, reader);
    default:
      throw DataError("model file '" + path + "' holds a network model, not a baseline");
  }
}

}  // namespace pcfnet
