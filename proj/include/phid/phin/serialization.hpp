#pragma once

#include "phid/autoencoder/autoencoder.hpp"
#include "phid/phin/phin.hpp"

#include <json.hpp>

#include <filesystem>

namespace phid::phin {

inline constexpr int kModelSchemaVersion = 1;

nlohmann::json to_json(const diffkit::MLPWeights& w);
diffkit::MLPWeights mlp_from_json(const nlohmann::json& j);

/// {r, n_p, eps, frozen_Q, theta: {J, R, Q, B}, hypernetwork}.
nlohmann::json to_json(const PhinModel& m);
PhinModel phin_from_json(const nlohmann::json& j);

/// Autoencoder section. The PCA basis is written next to the model file as
/// `<basis_stem>.bin` / `<basis_stem>.json` and referenced by name.
nlohmann::json to_json(const ae::Autoencoder& a, const std::string& basis_stem);
ae::Autoencoder autoencoder_from_json(const nlohmann::json& j, const std::filesystem::path& dir);

/// Identified model: autoencoder plus pHIN, with a schema version and
/// free-form metadata (scaling, training summary).
struct TrainedModel {
	ae::Autoencoder autoencoder;
	PhinModel phin;
	nlohmann::json metadata = nlohmann::json::object();
};

void save_model(const TrainedModel& m, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

} // namespace phid::phin
