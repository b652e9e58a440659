#pragma once

#include "phid/ph/ph_system.hpp"

#include <vector>

namespace phid::ph {

/// Structural defects of a (J, R, Q, B) quadruple.
struct PropertyReport {
	double skew_defect = 0.0;       // max |J + J^T|
	double r_symmetry_defect = 0.0; // max |R - R^T|
	double q_symmetry_defect = 0.0; // max |Q - Q^T|
	double min_eig_R = 0.0;         // of (R + R^T)/2
	double min_eig_Q = 0.0;         // of (Q + Q^T)/2

	struct Tolerances {
		double skew = 1e-12;
		double symmetry = 1e-12;
		double r_min_eig = -1e-10;
		double q_min_eig = 0.0; // strict: min eig Q must exceed this
	};
	bool passes(const Tolerances& tol) const;
	bool passes() const { return passes(Tolerances{}); }
};

PropertyReport verify_ph_properties(const PHSystem& sys);

/// Smallest eigenvalue of the symmetric part of a square matrix.
double min_symmetric_eigenvalue(const Mat& M);

struct DissipationReport {
	std::vector<double> energy;     // H(z_k), k = 0..n-1
	std::vector<double> delta_H;    // H(z_{k+1}) - H(z_k)
	std::vector<double> supply;     // dt * y_mid^T u_mid
	std::vector<double> dissipated; // dt * (Q z_mid)^T R (Q z_mid) >= 0
	std::vector<double> residual;   // delta_H - supply + dissipated
	std::vector<int> violations;    // steps k with delta_H - supply > tol
	double tolerance = 0.0;
	double max_abs_residual = 0.0;

	bool ok() const { return violations.empty(); }
};

/// Energy balance of an implicit-midpoint trajectory. `states` is n x r,
/// `inputs` is n x n_p (same sampling as the rollout). A step is flagged when
/// the energy gain exceeds the supplied port energy by more than
/// 1e-9 * max(1, H(z_0)).
DissipationReport check_dissipation(const PHSystem& sys, const Mat& states, const Mat& inputs,
                                    double dt);

struct BoundednessReport {
	double max_deviation = 0.0;   // C_Z = max_k |z_k - z_0|
	double max_energy_excess = 0.0; // max_k H(z_k) - H(z_0)
	bool contained = true;        // H(z_k) <= H(z_0) + tol for all k
	double tolerance = 0.0;
	Mat states;
};

/// Zero-input implicit-midpoint rollout over `n_steps` steps, checking that
/// the trajectory stays in the sublevel set {H <= H(z_0)} (tolerance
/// 1e-9 * max(1, H(z_0))). Requires Q positive definite.
BoundednessReport check_boundedness(const PHSystem& sys, const Vec& z0, int n_steps, double dt);

} // namespace phid::ph
