#pragma once

#include "phid/datasets/dataset.hpp"
#include "phid/experiment/config.hpp"
#include "phid/experiment/evaluation.hpp"
#include "phid/experiment/training.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace phid::exp {

/// Generates (or loads from cfg.dataset.path) the train/test split and
/// applies the dataset's default normalization fitted on the training split.
data::DatasetPair prepare_data(const ExperimentConfig& cfg, int jobs = 1);

/// Scaling applied per dataset kind when normalization is enabled.
data::ScalingSpec default_scaling(const std::string& kind, int N);

/// Training sims first, validation sims last.
struct SplitIndices {
	std::vector<std::size_t> fit;
	std::vector<std::size_t> val;
};
SplitIndices validation_split(std::size_t n_sims, double val_fraction);

struct InitialModels {
	ae::Autoencoder autoencoder;
	phin::PhinModel phin;
};

/// Untrained models for the configuration; the PCA basis is fitted on `fit`.
InitialModels build_models(const ExperimentConfig& cfg, const data::TrajectoryDataset& fit);

struct RunOptions {
	std::filesystem::path out_dir;
	std::optional<std::uint64_t> seed; // overrides cfg.seed
	int jobs = 1;
	/// Exact configuration text echoed into the run directory (empty: none).
	std::string config_text;
	std::ostream* log = nullptr;
};

struct RunResult {
	ExperimentConfig config;
	data::DatasetPair data;
	TrainResult training;
	Evaluation train_eval;
	Evaluation test_eval;
	nlohmann::json metrics;
	std::filesystem::path out_dir;
};

/// Full pipeline: data, training with early stopping, evaluation on both
/// splits and artifact export (model, metrics.json, CSVs, SVG plots,
/// timings.json, manifest.json). On divergence the last finite checkpoint
/// is written before the NumericalError propagates.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt);

/// metrics.json content for one evaluated split.
nlohmann::json split_metrics(const Evaluation& ev);

/// Writes manifest.json listing every other regular file in `dir` (sorted)
/// with its git blob hash and size.
void write_manifest(const std::filesystem::path& dir);

/// Re-hashes the files listed in manifest.json; returns names that differ.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

/// Trajectory table with columns t, then x_<i>_<s>, x_<i>_dt_<s> per sim s
/// and component i.
void write_trajectory_csv(const std::filesystem::path& path, const Eigen::VectorXd& t,
                          const std::vector<Eigen::MatrixXd>& X, const std::vector<Eigen::MatrixXd>& Xdot);

} // namespace phid::exp
