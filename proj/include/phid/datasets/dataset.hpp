#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <string>
#include <vector>

namespace phid::data {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// One trajectory; rows are time samples.
struct Simulation {
	Vec mu;   // n_mu
	Vec t;    // n_t
	Mat X;    // n_t x N
	Mat Xdot; // n_t x N
	Mat U;    // n_t x n_p
};

/// Contiguous block of state components sharing one scale factor.
struct StateField {
	std::string name;
	int begin = 0;
	int size = 0;
	double factor = 1.0; // stored value = physical value * factor
};

struct MinMax {
	Vec min;
	Vec max;
};

struct Scaling {
	std::vector<StateField> fields; // empty: states untouched
	bool scale_mu = false;
	bool scale_u = false;
	MinMax mu;
	MinMax u;
	bool applied = false;
};

struct TrajectoryDataset {
	std::string kind;
	std::vector<Simulation> sims;
	Scaling scaling;
	nlohmann::json generation = nlohmann::json::object(); // parameters and seeds

	int N() const { return sims.empty() ? 0 : static_cast<int>(sims.front().X.cols()); }
	int n_p() const { return sims.empty() ? 0 : static_cast<int>(sims.front().U.cols()); }
	int n_mu() const { return sims.empty() ? 0 : static_cast<int>(sims.front().mu.size()); }
	int n_t() const { return sims.empty() ? 0 : static_cast<int>(sims.front().t.size()); }
	/// Throws DimensionError unless all sims share N, n_p, n_mu and n_t.
	void validate() const;
	/// All states stacked as columns (N x n_sims*n_t).
	Mat snapshot_matrix() const;
};

struct DatasetPair {
	TrajectoryDataset train;
	TrajectoryDataset test;
};

} // namespace phid::data
