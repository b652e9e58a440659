#include "phid/integrate/integrators.hpp"

#include "phid/errors.hpp"

#include <cmath>
#include <string>

namespace phid::integrate {

void TimeGrid::validate() const
{
	if (!(dt > 0.0) || !std::isfinite(dt))
		throw ConfigError("time grid: dt must be positive");
	if (n_steps < 1)
		throw ConfigError("time grid: n_steps must be >= 1");
}

namespace {

Eigen::PartialPivLU<Mat> factor_step_matrix(const Mat& A, double dt)
{
	if (A.rows() != A.cols())
		throw DimensionError("implicit midpoint: system matrix must be square");
	const Mat S = Mat::Identity(A.rows(), A.cols()) - 0.5 * dt * A;
	// Partial pivoting does not flag singularity; check the conditioning.
	Eigen::FullPivLU<Mat> check(S);
	if (!check.isInvertible() || check.rcond() < 1e-14)
		throw NumericalError("implicit midpoint: step matrix I - dt/2 A is singular for dt = " +
		                     std::to_string(dt) + "; try a smaller step size");
	return Eigen::PartialPivLU<Mat>(S);
}

} // namespace

Vec imr_step_lti(const Mat& A, const Vec& Bu_mid, const Vec& z, double dt)
{
	if (z.size() != A.rows() || Bu_mid.size() != A.rows())
		throw DimensionError("imr_step_lti: state/input length does not match system matrix");
	const auto lu = factor_step_matrix(A, dt);
	const Vec rhs = z + 0.5 * dt * (A * z) + dt * Bu_mid;
	return lu.solve(rhs);
}

ImrStepper::ImrStepper(const Mat& A, double dt)
    : rhs_(Mat::Identity(A.rows(), A.cols()) + 0.5 * dt * A), lu_(factor_step_matrix(A, dt)), dt_(dt)
{
}

Vec ImrStepper::step(const Vec& z, const Vec& Bu_mid) const
{
	return lu_.solve(rhs_ * z + dt_ * Bu_mid);
}

LatentTrajectory simulate_latent(const ph::PHSystem& sys, const Vec& z0, const Mat& U,
                                 const TimeGrid& grid)
{
	grid.validate();
	const int r = sys.r();
	if (z0.size() != r)
		throw DimensionError("simulate_latent: |z0| = " + std::to_string(z0.size()) +
		                     ", expected " + std::to_string(r));
	if (U.rows() != grid.n_samples() || U.cols() != sys.n_p())
		throw DimensionError("simulate_latent: input samples must be " +
		                     std::to_string(grid.n_samples()) + " x " + std::to_string(sys.n_p()));

	const ImrStepper stepper(sys.system_matrix(), grid.dt);
	LatentTrajectory out;
	out.Z.resize(grid.n_samples(), r);
	out.Z.row(0) = z0.transpose();
	Vec z = z0;
	for (int k = 0; k < grid.n_steps; ++k) {
		const Vec u_mid = 0.5 * (U.row(k) + U.row(k + 1)).transpose();
		z = stepper.step(z, sys.B * u_mid);
		if (!z.allFinite())
			throw NumericalError("simulate_latent: non-finite state at step " + std::to_string(k + 1));
		out.Z.row(k + 1) = z.transpose();
	}
	out.Y = out.Z * (sys.Q * sys.B);
	return out;
}

Vec rk4_step(const Rhs& f, const Vec& y, double t, double dt)
{
	const Vec k1 = f(t, y);
	const Vec k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1);
	const Vec k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2);
	const Vec k4 = f(t + dt, y + dt * k3);
	if (!k1.allFinite() || !k2.allFinite() || !k3.allFinite() || !k4.allFinite())
		throw NumericalError("rk4_step: non-finite stage value at t = " + std::to_string(t));
	return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Mat rk4_rollout(const Rhs& f, const Vec& y0, const TimeGrid& grid, int substeps)
{
	grid.validate();
	if (substeps < 1)
		throw ConfigError("rk4_rollout: substeps must be >= 1");
	Mat out(grid.n_samples(), y0.size());
	out.row(0) = y0.transpose();
	Vec y = y0;
	const double h = grid.dt / substeps;
	for (int k = 0; k < grid.n_steps; ++k) {
		for (int s = 0; s < substeps; ++s)
			y = rk4_step(f, y, grid.time(k) + s * h, h);
		out.row(k + 1) = y.transpose();
	}
	return out;
}

} // namespace phid::integrate
