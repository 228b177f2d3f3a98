#pragma once

// Model construction from the JSON config schema (see README for the
// documented schema). Catalog models are referenced by name; custom models
// supply potential / metric-entry strings in the variables z1..zn, t1..tr.

#include <json.hpp>

#include "hsclab/models.hpp"

namespace hsclab {

BaseModel base_from_json(const nlohmann::json& j);
BundleModel bundle_from_json(const nlohmann::json& j, const BaseModel& base);

/// Accepts either a catalog name string or {"base": ..., "bundle": ...}.
Model model_from_json(const nlohmann::json& j);

}  // namespace hsclab
