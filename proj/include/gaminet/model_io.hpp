#pragma once

#include <string>

#include "gaminet/model.hpp"

namespace gaminet {

/// Serializes the model (intercept, link, feature metadata, per-effect
/// layers and offsets, variance table) to a JSON document. Doubles use
/// shortest round-trip formatting, so import reproduces predictions
/// bit-for-bit.
std::string model_to_json(const GamiNetModel& model);
GamiNetModel model_from_json(const std::string& text);

void save_model(const GamiNetModel& model, const std::string& path);
GamiNetModel load_model(const std::string& path);

}  // namespace gaminet
