#include "phid/datasets/reference_systems.hpp"

#include "phid/errors.hpp"

#include <cmath>

namespace phid::data {

MSDParameters MSDParameters::uniform(double m, double k, double c, int n_links)
{
	if (n_links < 1)
		throw ConfigError("mass-spring-damper chain needs at least one link");
	MSDParameters p;
	p.m.assign(static_cast<std::size_t>(n_links), m);
	p.k.assign(static_cast<std::size_t>(n_links), k);
	p.c.assign(static_cast<std::size_t>(n_links), c);
	return p;
}

void MSDParameters::validate() const
{
	if (m.empty() || k.size() != m.size() || c.size() != m.size())
		throw ConfigError("mass-spring-damper: m, k, c must have one entry per link");
	for (const auto* v : {&m, &k, &c})
		for (double x : *v)
			if (!(x > 0.0))
				throw ConfigError("mass-spring-damper: m, k, c must be positive");
}

ph::PHSystem msd_reference_system(const MSDParameters& p)
{
	p.validate();
	const int n = p.n_links();
	const int r = 2 * n;
	ph::PHSystem sys;
	sys.J = ph::Mat::Zero(r, r);
	sys.J.topRightCorner(n, n).setIdentity();
	sys.J.bottomLeftCorner(n, n) = -ph::Mat::Identity(n, n);

	sys.R = ph::Mat::Zero(r, r);
	sys.Q = ph::Mat::Zero(r, r);
	for (int i = 0; i < n; ++i) {
		const auto s = static_cast<std::size_t>(i);
		sys.R(n + i, n + i) = p.c[s];
		sys.Q(n + i, n + i) = 1.0 / p.m[s];
		// Spring i joins masses i and i+1; the last one is anchored.
		if (i + 1 < n) {
			sys.Q(i, i) += p.k[s];
			sys.Q(i + 1, i + 1) += p.k[s];
			sys.Q(i, i + 1) -= p.k[s];
			sys.Q(i + 1, i) -= p.k[s];
		} else {
			sys.Q(i, i) += p.k[s];
		}
	}
	sys.B = ph::Mat::Zero(r, 1);
	sys.B(n, 0) = 1.0;
	return sys;
}

std::function<double(double)> damped_harmonic_input(double delta, double omega)
{
	return [delta, omega](double t) { return std::exp(-delta * t) * std::sin(omega * t * t); };
}

PendulumState pendulum_rhs(const PendulumState& s, const PendulumConstants& c)
{
	return {s.omega, -(c.g / c.l) * std::sin(s.phi)};
}

Eigen::Vector4d pendulum_to_cartesian(const PendulumState& s, double l)
{
	const double sp = std::sin(s.phi);
	const double cp = std::cos(s.phi);
	return {l * sp, l * cp, l * s.omega * cp, l * s.omega * sp};
}

Eigen::Vector4d pendulum_cartesian_derivative(const PendulumState& s, const PendulumConstants& c)
{
	const double sp = std::sin(s.phi);
	const double cp = std::cos(s.phi);
	const double w = s.omega;
	const double wd = -(c.g / c.l) * sp;
	const double l = c.l;
	return {l * w * cp, -l * w * sp, l * (wd * cp - w * w * sp), l * (wd * sp + w * w * cp)};
}

ph::PHSystem wave_reference_system(const WaveParameters& p)
{
	if (p.n_nodes < 2 || !(p.stiffness > 0.0) || p.damping < 0.0 || p.diffusivity < 0.0)
		throw ConfigError("wave stand-in: need n_nodes >= 2, stiffness > 0, damping and diffusivity >= 0");
	const int n = p.n_nodes;
	const double h = 1.0 / (n + 1);
	ph::Mat K = ph::Mat::Zero(n, n);
	for (int i = 0; i < n; ++i) {
		K(i, i) = 2.0 / (h * h);
		if (i + 1 < n) {
			K(i, i + 1) = -1.0 / (h * h);
			K(i + 1, i) = -1.0 / (h * h);
		}
	}
	const int r = 3 * n;
	ph::PHSystem sys;
	sys.J = ph::Mat::Zero(r, r);
	sys.R = ph::Mat::Zero(r, r);
	sys.Q = ph::Mat::Identity(r, r);
	sys.B = ph::Mat::Zero(r, 1);

	const ph::Mat I = ph::Mat::Identity(n, n);
	sys.J.block(0, 2 * n, n, n) = -p.coupling * I;
	sys.J.block(2 * n, 0, n, n) = p.coupling * I;
	sys.J.block(n, 2 * n, n, n) = I;
	sys.J.block(2 * n, n, n, n) = -I;
	sys.R.block(0, 0, n, n) = p.diffusivity * K;
	sys.R.block(2 * n, 2 * n, n, n) = p.damping * I;
	sys.Q.block(n, n, n, n) = p.stiffness * K;
	sys.B(0, 0) = 1.0 / h;
	return sys;
}

} // namespace phid::data
