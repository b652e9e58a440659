#pragma once

#include "phid/ph/ph_system.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace phid::data {

/// Mass-spring-damper chain with one mass, spring and damper per link.
struct MSDParameters {
	std::vector<double> m;
	std::vector<double> k;
	std::vector<double> c;

	static MSDParameters uniform(double m, double k, double c, int n_links);
	int n_links() const { return static_cast<int>(m.size()); }
	/// Throws ConfigError unless all entries are positive and sizes agree.
	void validate() const;
};

/// States (q_1..q_n, p_1..p_n); force input on the first mass.
ph::PHSystem msd_reference_system(const MSDParameters& p);

/// u(t) = exp(-delta t) sin(omega t^2).
std::function<double(double)> damped_harmonic_input(double delta, double omega);

struct PendulumState {
	double phi = 0.0;
	double omega = 0.0;
};

struct PendulumConstants {
	double g = 9.81;
	double l = 1.0;
};

/// (phi', omega') = (omega, -(g/l) sin phi).
PendulumState pendulum_rhs(const PendulumState& s, const PendulumConstants& c);

/// (l sin phi, l cos phi, l omega cos phi, l omega sin phi).
Eigen::Vector4d pendulum_to_cartesian(const PendulumState& s, double l);

/// Component-wise time derivative of pendulum_to_cartesian along the flow.
Eigen::Vector4d pendulum_cartesian_derivative(const PendulumState& s, const PendulumConstants& c);

/// Damped wave with a coupled diffusive field on n_nodes interior grid
/// points of [0, 1]. States (T, q, v), each of length n_nodes;
///   T' = -alpha K T - gamma v + b u,  q' = v,  v' = -s K q - d v + gamma T,
/// with K the Dirichlet finite-difference Laplacian (positive definite) and
/// b a boundary flux into the first node. Energy 1/2(|T|^2 + s q^T K q + |v|^2).
struct WaveParameters {
	int n_nodes = 334;
	double stiffness = 1.0; // s
	double damping = 1.0;   // d
	double diffusivity = 0.05;
	double coupling = 1.0;
};

ph::PHSystem wave_reference_system(const WaveParameters& p);

} // namespace phid::data
