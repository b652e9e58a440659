#include "phid/experiment/evaluation.hpp"

#include "phid/datasets/preprocessing.hpp"
#include "phid/errors.hpp"
#include "phid/integrate/integrators.hpp"
#include "phid/ph/properties.hpp"
#include "phid/util/parallel.hpp"

#include <numeric>

namespace phid::exp {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace {

integrate::TimeGrid grid_of(const data::Simulation& sim)
{
	if (sim.t.size() < 2)
		throw DimensionError("simulation needs at least two time samples");
	return {sim.t(0), sim.t(1) - sim.t(0), static_cast<int>(sim.t.size()) - 1};
}

} // namespace

Prediction predict(const ae::Autoencoder& ae, const phin::PhinModel& model, const data::Simulation& sim)
{
	const auto grid = grid_of(sim);
	const auto sys = model.system(sim.mu);
	const Vec z0 = ae.encode(Vec(sim.X.row(0).transpose()));
	const auto traj = integrate::simulate_latent(sys, z0, sim.U, grid);
	if (!traj.Z.allFinite())
		throw NumericalError("latent rollout produced non-finite states");

	Prediction p;
	p.Z = traj.Z;
	const Mat Zt = traj.Z.transpose();
	p.X = ae.decode(Zt).transpose();
	const Mat F = sys.system_matrix() * Zt + sys.B * sim.U.transpose();
	p.Xdot = ae.decode_jvp(Zt, F).transpose();
	return p;
}

Evaluation evaluate(const ae::Autoencoder& ae, const phin::PhinModel& model, const data::TrajectoryDataset& ds,
                    metrics::JacobianNorm norm, int jobs)
{
	ds.validate();
	Evaluation ev;
	ev.predictions.resize(ds.sims.size());
	std::vector<ph::DissipationReport> balance(ds.sims.size());
	util::parallel_for(ds.sims.size(), jobs, [&](std::size_t i) {
		ev.predictions[i] = predict(ae, model, ds.sims[i]);
		const auto& sim = ds.sims[i];
		balance[i] = ph::check_dissipation(model.system(sim.mu), ev.predictions[i].Z, sim.U,
		                                   sim.t(1) - sim.t(0));
	});
	for (const auto& b : balance) {
		ev.dissipation_violations += static_cast<int>(b.violations.size());
		ev.max_balance_residual = std::max(ev.max_balance_residual, b.max_abs_residual);
	}

	std::vector<Mat> X_ref, X_pred, Z_pred;
	for (std::size_t i = 0; i < ds.sims.size(); ++i) {
		X_ref.push_back(ds.sims[i].X);
		X_pred.push_back(ev.predictions[i].X);
		Z_pred.push_back(ev.predictions[i].Z);
	}
	ev.report.e_x = metrics::state_error(X_ref, X_pred);
	ev.report.e_z = metrics::latent_error(ae, X_ref, Z_pred);
	for (const auto& f : ds.scaling.fields) {
		std::vector<int> cols(static_cast<std::size_t>(f.size));
		std::iota(cols.begin(), cols.end(), f.begin);
		ev.report.e_x_fields.emplace_back(f.name, metrics::state_error(X_ref, X_pred, cols));
	}
	const auto samples = data::flatten_samples(ds);
	ev.report.projection = metrics::projection_errors(ae, ae.encode(samples.X), norm);
	return ev;
}

} // namespace phid::exp
