#pragma once

#include "phid/ph/ph_system.hpp"

#include <Eigen/Dense>

#include <functional>

namespace phid::integrate {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Uniform grid t_k = t0 + k dt, k = 0..n_steps (n_steps + 1 samples).
struct TimeGrid {
	double t0 = 0.0;
	double dt = 0.0;
	int n_steps = 0;

	int n_samples() const { return n_steps + 1; }
	double time(int k) const { return t0 + k * dt; }
	void validate() const;
};

/// One implicit midpoint step for z' = A z + b(t):
///   z' = z + dt (A (z + z')/2 + Bu_mid).
/// Throws NumericalError if I - dt/2 A is singular.
Vec imr_step_lti(const Mat& A, const Vec& Bu_mid, const Vec& z, double dt);

/// Implicit midpoint stepper with the step matrix factorized once.
class ImrStepper {
public:
	ImrStepper(const Mat& A, double dt);
	Vec step(const Vec& z, const Vec& Bu_mid) const;

private:
	Mat rhs_;
	Eigen::PartialPivLU<Mat> lu_;
	double dt_;
};

struct LatentTrajectory {
	Mat Z; // n_samples x r
	Mat Y; // n_samples x n_p
};

/// Rolls out the pH system with the implicit midpoint rule. `U` holds inputs
/// sampled on the grid (n_samples x n_p); the midpoint input is the linear
/// interpolation (U_k + U_{k+1}) / 2. Outputs are y_k = B^T Q z_k.
LatentTrajectory simulate_latent(const ph::PHSystem& sys, const Vec& z0, const Mat& U,
                                 const TimeGrid& grid);

using Rhs = std::function<Vec(double t, const Vec& y)>;

/// Classical fourth-order Runge-Kutta step.
Vec rk4_step(const Rhs& f, const Vec& y, double t, double dt);

/// n_steps RK4 steps with `substeps` inner steps each; returns all n_steps+1
/// samples as rows.
Mat rk4_rollout(const Rhs& f, const Vec& y0, const TimeGrid& grid, int substeps = 1);

} // namespace phid::integrate
