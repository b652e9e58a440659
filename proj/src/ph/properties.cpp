#include "phid/ph/properties.hpp"

#include "phid/errors.hpp"
#include "phid/integrate/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace phid::ph {

bool PropertyReport::passes(const Tolerances& tol) const
{
	return skew_defect <= tol.skew && r_symmetry_defect <= tol.symmetry &&
	       q_symmetry_defect <= tol.symmetry && min_eig_R >= tol.r_min_eig &&
	       min_eig_Q > tol.q_min_eig;
}

double min_symmetric_eigenvalue(const Mat& M)
{
	if (M.rows() != M.cols())
		throw DimensionError("min_symmetric_eigenvalue: square matrix expected");
	if (M.rows() == 0)
		return 0.0;
	const Mat S = 0.5 * (M + M.transpose());
	Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
	return es.eigenvalues().minCoeff();
}

PropertyReport verify_ph_properties(const PHSystem& sys)
{
	PropertyReport rep;
	if (sys.J.size() > 0) {
		rep.skew_defect = (sys.J + sys.J.transpose()).cwiseAbs().maxCoeff();
		rep.r_symmetry_defect = (sys.R - sys.R.transpose()).cwiseAbs().maxCoeff();
		rep.q_symmetry_defect = (sys.Q - sys.Q.transpose()).cwiseAbs().maxCoeff();
	}
	rep.min_eig_R = min_symmetric_eigenvalue(sys.R);
	rep.min_eig_Q = min_symmetric_eigenvalue(sys.Q);
	return rep;
}

DissipationReport check_dissipation(const PHSystem& sys, const Mat& states, const Mat& inputs,
                                    double dt)
{
	if (states.rows() != inputs.rows())
		throw DimensionError("check_dissipation: " + std::to_string(states.rows()) + " states but " +
		                     std::to_string(inputs.rows()) + " input samples");
	if (states.cols() != sys.r() || inputs.cols() != sys.n_p())
		throw DimensionError("check_dissipation: trajectory widths do not match the system");

	DissipationReport rep;
	const Eigen::Index n = states.rows();
	for (Eigen::Index k = 0; k < n; ++k)
		rep.energy.push_back(hamiltonian(sys, states.row(k).transpose()));
	const double H0 = n > 0 ? rep.energy[0] : 0.0;
	rep.tolerance = 1e-9 * std::max(1.0, H0);

	for (Eigen::Index k = 0; k + 1 < n; ++k) {
		const Vec z_mid = 0.5 * (states.row(k) + states.row(k + 1)).transpose();
		const Vec u_mid = 0.5 * (inputs.row(k) + inputs.row(k + 1)).transpose();
		const Vec e_mid = sys.Q * z_mid;
		const double dH = rep.energy[k + 1] - rep.energy[k];
		const double supply = dt * (sys.B.transpose() * e_mid).dot(u_mid);
		const double diss = dt * e_mid.dot(sys.R * e_mid);
		rep.delta_H.push_back(dH);
		rep.supply.push_back(supply);
		rep.dissipated.push_back(diss);
		rep.residual.push_back(dH - supply + diss);
		rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(dH - supply + diss));
		if (dH - supply > rep.tolerance)
			rep.violations.push_back(static_cast<int>(k));
	}
	return rep;
}

BoundednessReport check_boundedness(const PHSystem& sys, const Vec& z0, int n_steps, double dt)
{
	Eigen::LLT<Mat> llt(sys.Q);
	if (llt.info() != Eigen::Success)
		throw NumericalError("check_boundedness: Q is not positive definite");

	integrate::TimeGrid grid{0.0, dt, n_steps};
	const Mat U = Mat::Zero(grid.n_samples(), sys.n_p());
	const auto traj = integrate::simulate_latent(sys, z0, U, grid);

	BoundednessReport rep;
	const double H0 = hamiltonian(sys, z0);
	rep.tolerance = 1e-9 * std::max(1.0, H0);
	for (Eigen::Index k = 0; k < traj.Z.rows(); ++k) {
		const Vec z = traj.Z.row(k).transpose();
		rep.max_deviation = std::max(rep.max_deviation, (z - z0).norm());
		const double excess = hamiltonian(sys, z) - H0;
		rep.max_energy_excess = std::max(rep.max_energy_excess, excess);
		if (excess > rep.tolerance)
			rep.contained = false;
	}
	rep.states = traj.Z;
	return rep;
}

} // namespace phid::ph
