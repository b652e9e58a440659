#pragma once

#include "phid/datasets/generators.hpp"
#include "phid/metrics/metrics.hpp"
#include "phid/phin/losses.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace phid::exp {

enum class ModelKind { Phin, AphinLinear, AphinNonlinear };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct DatasetSpec {
	std::string kind = "pendulum"; // msd | pendulum | wave
	data::MsdConfig msd;
	data::PendulumConfig pendulum;
	data::WaveConfig wave;
	bool normalize = true;
	/// Existing dataset root holding train/ and test/ (generated when empty).
	std::string path;

	int state_dim() const;
	int n_mu() const;
	int n_p() const;
};

struct ModelSpec {
	ModelKind kind = ModelKind::Phin;
	int r = 2;
	int n_v = 0; // PCA width for the nonlinear mode; 0 = no PCA layer
	std::vector<int> autoencoder_layers;
	std::vector<int> hypernetwork_layers; // empty: non-parametric pHIN
	double eps = 1e-6;
	bool frozen_Q = false;
	double init_scale = 0.1;
};

struct EarlyStopping {
	bool enabled = true;
	int patience = 200;
	double min_delta = 1e-6;
	double val_fraction = 0.1;
};

struct OptimizerSpec {
	double lr = 1e-3;
	int batch_size = 64;
	int epochs = 100;
	EarlyStopping early_stopping;
};

struct EvaluationSpec {
	metrics::JacobianNorm jacobian_norm = metrics::JacobianNorm::Spectral;
	/// Export per-sim trajectory CSVs; defaults to on for N <= 64.
	std::optional<bool> export_trajectories;
	/// Latent points used for the state-space pH check.
	int statespace_points = 10;
};

struct ExperimentConfig {
	std::string name = "experiment";
	std::uint64_t seed = 1;
	DatasetSpec dataset;
	ModelSpec model;
	phin::LossWeights loss;
	OptimizerSpec optimizer;
	EvaluationSpec evaluation;
	std::string output_dir;

	bool parametric() const { return !model.hypernetwork_layers.empty(); }
	/// Throws ConfigError naming the first inconsistency.
	void validate() const;
};

ExperimentConfig parse_config(const std::string& toml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

} // namespace phid::exp
