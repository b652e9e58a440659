#pragma once

#include "phid/autoencoder/autoencoder.hpp"
#include "phid/datasets/dataset.hpp"
#include "phid/metrics/metrics.hpp"
#include "phid/phin/phin.hpp"

#include <vector>

namespace phid::exp {

struct Prediction {
	Eigen::MatrixXd Z;    // n_t x r, latent rollout
	Eigen::MatrixXd X;    // n_t x N, decoded states
	Eigen::MatrixXd Xdot; // n_t x N, D dec(z) f_pH(z, u)
};

/// Encodes x(t_0) once, rolls the latent pH system out with the implicit
/// midpoint rule on the simulation's time grid and decodes every state.
Prediction predict(const ae::Autoencoder& ae, const phin::PhinModel& model, const data::Simulation& sim);

struct Evaluation {
	std::vector<Prediction> predictions;
	metrics::ErrorReport report;
	int dissipation_violations = 0; // energy-balance violations over all rollouts
	double max_balance_residual = 0.0;
};

/// Predictions and all error measures on a dataset. Per-field state errors
/// follow ds.scaling.fields. Simulations are fanned out over `jobs` threads.
Evaluation evaluate(const ae::Autoencoder& ae, const phin::PhinModel& model, const data::TrajectoryDataset& ds,
                    metrics::JacobianNorm norm, int jobs = 1);

} // namespace phid::exp
