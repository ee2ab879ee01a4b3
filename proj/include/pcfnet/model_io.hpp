// Plain-text model files.  Every format is a UTF-8 key–value document with
// one field per line (`key value...`, LF endings) and a canonical field
// order, so a file can be diffed and version-controlled.  Doubles are written
// in shortest round-trip form, which makes save→load value-exact.
//
// The leading key identifies the model family:
//   version           interpretable network (m, s, C, c, d, w_i/b_i/kappa_i
//                     per channel, u, v)
//   logistic_version  logistic baseline over summary features
//   mlp_version       multilayer-perceptron baseline over summary features
#pragma once

#include <string>

#include "pcfnet/features.hpp"
#include "pcfnet/network.hpp"

namespace pcfnet {

enum class ModelKind { Network, Logistic, Mlp };

// Reads just enough of the file to classify it.  Throws ConfigError when the
// file cannot be opened and DataError when the leading key is unknown.
ModelKind peek_model_kind(const std::string& path);

void save_network_model(const NetworkParams& params, const std::string& path);
NetworkParams load_network_model(const std::string& path);

void save_baseline_model(const BaselineModel& model, const std::string& path);
BaselineModel load_baseline_model(const std::string& path);

}  // namespace pcfnet
