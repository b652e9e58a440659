#include "phid/datasets/preprocessing.hpp"

#include "phid/errors.hpp"

#include <cmath>

namespace phid::data {

void TrajectoryDataset::validate() const
{
	for (std::size_t s = 0; s < sims.size(); ++s) {
		const auto& sim = sims[s];
		const auto n_t = sim.t.size();
		if (sim.X.rows() != n_t || sim.Xdot.rows() != n_t || sim.U.rows() != n_t)
			throw DimensionError("simulation " + std::to_string(s) + ": row counts differ from n_t");
		if (sim.X.cols() != N() || sim.Xdot.cols() != N() || sim.U.cols() != n_p() ||
		    sim.mu.size() != n_mu() || n_t != this->n_t())
			throw DimensionError("simulation " + std::to_string(s) + " does not match the dataset dimensions");
	}
}

Mat TrajectoryDataset::snapshot_matrix() const
{
	Mat S(N(), static_cast<Eigen::Index>(sims.size()) * n_t());
	Eigen::Index col = 0;
	for (const auto& sim : sims) {
		S.middleCols(col, sim.X.rows()) = sim.X.transpose();
		col += sim.X.rows();
	}
	return S;
}

Mat central_differences(const Mat& X, double dt)
{
	const auto n = X.rows();
	if (n < 3)
		throw DimensionError("central_differences: need at least 3 samples, got " + std::to_string(n));
	if (!(dt > 0.0))
		throw ConfigError("central_differences: dt must be positive");
	Mat D(n, X.cols());
	for (Eigen::Index i = 1; i + 1 < n; ++i)
		D.row(i) = (X.row(i + 1) - X.row(i - 1)) / (2.0 * dt);
	D.row(0) = (-3.0 * X.row(0) + 4.0 * X.row(1) - X.row(2)) / (2.0 * dt);
	D.row(n - 1) = (3.0 * X.row(n - 1) - 4.0 * X.row(n - 2) + X.row(n - 3)) / (2.0 * dt);
	return D;
}

namespace {

MinMax column_range(const TrajectoryDataset& ds, bool mu)
{
	const int w = mu ? ds.n_mu() : ds.n_p();
	MinMax mm{Vec::Constant(w, INFINITY), Vec::Constant(w, -INFINITY)};
	for (const auto& sim : ds.sims) {
		if (mu) {
			mm.min = mm.min.cwiseMin(sim.mu);
			mm.max = mm.max.cwiseMax(sim.mu);
		} else if (sim.U.rows() > 0) {
			mm.min = mm.min.cwiseMin(sim.U.colwise().minCoeff().transpose());
			mm.max = mm.max.cwiseMax(sim.U.colwise().maxCoeff().transpose());
		}
	}
	for (int i = 0; i < w; ++i)
		if (!(mm.max(i) > mm.min(i)))
			throw ConfigError(std::string("degenerate scaling: ") + (mu ? "mu_" : "u_") + std::to_string(i) +
			                  " has zero range on the training split");
	return mm;
}

} // namespace

Scaling fit_scaling(const TrajectoryDataset& train, const ScalingSpec& spec)
{
	train.validate();
	Scaling s;
	int begin = 0;
	for (const auto& f : spec.fields) {
		if (f.size < 1 || begin + f.size > train.N())
			throw ConfigError("state field '" + f.name + "' exceeds the state dimension");
		double factor = f.factor;
		if (factor == 0.0) {
			double peak = 0.0;
			for (const auto& sim : train.sims)
				peak = std::max(peak, sim.X.middleCols(begin, f.size).cwiseAbs().maxCoeff());
			if (!(peak > 0.0))
				throw ConfigError("degenerate scaling: state field '" + f.name + "' is identically zero");
			factor = 1.0 / peak;
		}
		s.fields.push_back({f.name, begin, f.size, factor});
		begin += f.size;
	}
	if (!spec.fields.empty() && begin != train.N())
		throw ConfigError("state fields cover " + std::to_string(begin) + " of " +
		                  std::to_string(train.N()) + " components");
	s.scale_mu = spec.scale_mu && train.n_mu() > 0;
	s.scale_u = spec.scale_u && train.n_p() > 0;
	if (s.scale_mu)
		s.mu = column_range(train, true);
	if (s.scale_u)
		s.u = column_range(train, false);
	return s;
}

void apply_scaling(TrajectoryDataset& ds, const Scaling& s)
{
	if (ds.scaling.applied)
		throw ContractError("dataset is already scaled");
	ds.validate();
	for (auto& sim : ds.sims) {
		for (const auto& f : s.fields) {
			sim.X.middleCols(f.begin, f.size) *= f.factor;
			sim.Xdot.middleCols(f.begin, f.size) *= f.factor;
		}
		if (s.scale_mu)
			sim.mu = (sim.mu - s.mu.min).cwiseQuotient(s.mu.max - s.mu.min);
		if (s.scale_u)
			for (Eigen::Index k = 0; k < sim.U.rows(); ++k)
				sim.U.row(k) = (sim.U.row(k) - s.u.min.transpose()).cwiseQuotient((s.u.max - s.u.min).transpose());
	}
	ds.scaling = s;
	ds.scaling.applied = true;
}

void remove_scaling(TrajectoryDataset& ds)
{
	if (!ds.scaling.applied)
		return;
	const auto& s = ds.scaling;
	for (auto& sim : ds.sims) {
		for (const auto& f : s.fields) {
			sim.X.middleCols(f.begin, f.size) /= f.factor;
			sim.Xdot.middleCols(f.begin, f.size) /= f.factor;
		}
		if (s.scale_mu)
			sim.mu = sim.mu.cwiseProduct(s.mu.max - s.mu.min) + s.mu.min;
		if (s.scale_u)
			for (Eigen::Index k = 0; k < sim.U.rows(); ++k)
				sim.U.row(k) = sim.U.row(k).cwiseProduct((s.u.max - s.u.min).transpose()) + s.u.min.transpose();
	}
	ds.scaling.applied = false;
}

Scaling normalize_dataset(DatasetPair& pair, const ScalingSpec& spec)
{
	const Scaling s = fit_scaling(pair.train, spec);
	apply_scaling(pair.train, s);
	apply_scaling(pair.test, s);
	return s;
}

SampleMatrix flatten_samples(const TrajectoryDataset& ds)
{
	ds.validate();
	const Eigen::Index n = static_cast<Eigen::Index>(ds.sims.size()) * ds.n_t();
	SampleMatrix out{Mat(ds.N(), n), Mat(ds.N(), n), Mat(ds.n_p(), n), Mat(ds.n_mu(), n)};
	Eigen::Index col = 0;
	for (const auto& sim : ds.sims) {
		const auto k = sim.X.rows();
		out.X.middleCols(col, k) = sim.X.transpose();
		out.Xdot.middleCols(col, k) = sim.Xdot.transpose();
		out.U.middleCols(col, k) = sim.U.transpose();
		out.Mu.middleCols(col, k) = sim.mu.replicate(1, k);
		col += k;
	}
	return out;
}

} // namespace phid::data
