#pragma once

#include <string>

#include "json.hpp"

#include "hdsvm/multiclass.hpp"

namespace hdsvm {

/// Saved models keep every fitted quantity (alphas, support set, intercept,
/// weight, plug-in estimates) so a reloaded model predicts identically.
nlohmann::json model_to_json(const OvoModel& model);
OvoModel model_from_json(const nlohmann::json& j);

void save_model(const OvoModel& model, const std::string& path);
OvoModel load_model(const std::string& path);

}  // namespace hdsvm
