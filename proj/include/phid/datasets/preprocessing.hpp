#pragma once

#include "phid/datasets/dataset.hpp"

#include <string>
#include <vector>

namespace phid::data {

/// Time derivative of row-sampled data: (X_{i+1} - X_{i-1}) / 2dt inside,
/// second-order one-sided stencils at both ends. Needs at least 3 rows.
Mat central_differences(const Mat& X, double dt);

struct FieldSpec {
	std::string name;
	int size = 0;
	double factor = 0.0; // 0: 1 / max|x| over the training split
};

struct ScalingSpec {
	std::vector<FieldSpec> fields; // must cover all N components when non-empty
	bool scale_mu = false;
	bool scale_u = false;
};

/// Statistics from the training split. Throws ConfigError on a zero-range
/// parameter/input component or an all-zero state field.
Scaling fit_scaling(const TrajectoryDataset& train, const ScalingSpec& spec);

/// Applies (or undoes) the affine maps in place. Values outside the training
/// range are not clipped.
void apply_scaling(TrajectoryDataset& ds, const Scaling& s);
void remove_scaling(TrajectoryDataset& ds);

/// Fits on pair.train and applies to both splits.
Scaling normalize_dataset(DatasetPair& pair, const ScalingSpec& spec);

/// Flattens every (t, mu) sample of the dataset into column batches.
struct SampleMatrix {
	Mat X;    // N x n
	Mat Xdot; // N x n
	Mat U;    // n_p x n
	Mat Mu;   // n_mu x n
};
SampleMatrix flatten_samples(const TrajectoryDataset& ds);

} // namespace phid::data
