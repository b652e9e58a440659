#include "phid/datasets/generators.hpp"

#include "phid/datasets/preprocessing.hpp"
#include "phid/datasets/reference_systems.hpp"
#include "phid/datasets/sampling.hpp"
#include "phid/errors.hpp"
#include "phid/integrate/integrators.hpp"
#include "phid/util/parallel.hpp"

#include <random>

namespace phid::data {

namespace {

void check_counts(int n_train, int n_test, int n_t)
{
	if (n_train < 1 || n_test < 0)
		throw ConfigError("dataset needs n_train >= 1 and n_test >= 0");
	if (n_t < 3)
		throw ConfigError("dataset needs at least 3 time samples");
}

void check_range(const Range& r, const char* name, bool positive)
{
	if (!(r.hi >= r.lo) || (positive && !(r.lo > 0.0)))
		throw ConfigError(std::string("invalid range for ") + name);
}

Vec time_vector(const integrate::TimeGrid& grid)
{
	Vec t(grid.n_samples());
	for (int k = 0; k < grid.n_samples(); ++k)
		t(k) = grid.time(k);
	return t;
}

} // namespace

DatasetPair generate_msd(const MsdConfig& cfg, int jobs)
{
	check_counts(cfg.n_train, cfg.n_test, cfg.n_t);
	check_range(cfg.m, "m", true);
	check_range(cfg.k, "k", true);
	check_range(cfg.c, "c", true);
	check_range(cfg.delta, "delta", false);
	check_range(cfg.omega, "omega", false);
	if (!(cfg.t_end > 0.0))
		throw ConfigError("t_end must be positive");

	const int n_total = cfg.n_train + cfg.n_test;
	const Mat mus = scale_to_box(halton_points(n_total, 3), {cfg.m.lo, cfg.k.lo, cfg.c.lo},
	                             {cfg.m.hi, cfg.k.hi, cfg.c.hi});
	integrate::TimeGrid grid{0.0, cfg.t_end / (cfg.n_t - 1), cfg.n_t - 1};
	grid.validate();
	const Vec t = time_vector(grid);

	struct InputDraw {
		double delta, omega;
		Vec z0;
	};
	std::vector<InputDraw> draws;
	for (int split = 0; split < 2; ++split) {
		std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(split));
		std::uniform_real_distribution<double> ud(cfg.delta.lo, cfg.delta.hi);
		std::uniform_real_distribution<double> uw(cfg.omega.lo, cfg.omega.hi);
		std::normal_distribution<double> nz(0.0, 1.0);
		const int n = split == 0 ? cfg.n_train : cfg.n_test;
		for (int i = 0; i < n; ++i) {
			InputDraw d;
			d.delta = ud(rng);
			d.omega = uw(rng);
			d.z0 = Vec::Zero(2 * cfg.n_links);
			if (cfg.random_z0)
				for (int j = 0; j < d.z0.size(); ++j)
					d.z0(j) = nz(rng);
			draws.push_back(std::move(d));
		}
	}

	std::vector<Simulation> sims(static_cast<std::size_t>(n_total));
	util::parallel_for(sims.size(), jobs, [&](std::size_t i) {
		const auto row = static_cast<Eigen::Index>(i);
		const auto p = MSDParameters::uniform(mus(row, 0), mus(row, 1), mus(row, 2), cfg.n_links);
		const auto sys = ph::normalize_to_identity_Q(msd_reference_system(p)).system;
		const auto u = damped_harmonic_input(draws[i].delta, draws[i].omega);
		Mat U(grid.n_samples(), 1);
		for (int k = 0; k < grid.n_samples(); ++k)
			U(k, 0) = u(t(k));
		const auto traj = integrate::simulate_latent(sys, draws[i].z0, U, grid);

		Simulation& sim = sims[i];
		sim.mu = mus.row(row).transpose();
		sim.t = t;
		sim.X = traj.Z;
		sim.U = U;
		sim.Xdot = (sys.system_matrix() * traj.Z.transpose() + sys.B * U.transpose()).transpose();
	});

	DatasetPair out;
	out.train.kind = out.test.kind = "msd";
	out.train.sims.assign(sims.begin(), sims.begin() + cfg.n_train);
	out.test.sims.assign(sims.begin() + cfg.n_train, sims.end());
	nlohmann::json gen = {{"n_links", cfg.n_links}, {"n_t", cfg.n_t},         {"t_end", cfg.t_end},
	                      {"seed", cfg.seed},       {"random_z0", cfg.random_z0},
	                      {"m", {cfg.m.lo, cfg.m.hi}}, {"k", {cfg.k.lo, cfg.k.hi}}, {"c", {cfg.c.lo, cfg.c.hi}},
	                      {"delta", {cfg.delta.lo, cfg.delta.hi}}, {"omega", {cfg.omega.lo, cfg.omega.hi}}};
	out.train.generation = gen;
	out.train.generation["split"] = "train";
	out.test.generation = gen;
	out.test.generation["split"] = "test";
	return out;
}

DatasetPair generate_pendulum(const PendulumConfig& cfg, int jobs)
{
	check_counts(cfg.n_train, cfg.n_test, std::min(cfg.n_t_train, cfg.n_t_test));
	if (!(cfg.dt > 0.0) || cfg.substeps < 1 || !(cfg.l > 0.0) || cfg.max_deflection < 0.0)
		throw ConfigError("pendulum: dt, l must be positive, substeps >= 1");

	const PendulumConstants pc{cfg.g, cfg.l};
	std::vector<double> phi0;
	for (int split = 0; split < 2; ++split) {
		std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(split));
		std::uniform_real_distribution<double> dist(-cfg.max_deflection, cfg.max_deflection);
		for (int i = 0; i < (split == 0 ? cfg.n_train : cfg.n_test); ++i)
			phi0.push_back(dist(rng));
	}

	std::vector<Simulation> sims(phi0.size());
	util::parallel_for(sims.size(), jobs, [&](std::size_t i) {
		const bool train = static_cast<int>(i) < cfg.n_train;
		const integrate::TimeGrid grid{0.0, cfg.dt, (train ? cfg.n_t_train : cfg.n_t_test) - 1};
		const integrate::Rhs f = [&pc](double, const Vec& y) {
			const auto d = pendulum_rhs({y(0), y(1)}, pc);
			return Vec((Vec(2) << d.phi, d.omega).finished());
		};
		const Mat Y = integrate::rk4_rollout(f, (Vec(2) << phi0[i], 0.0).finished(), grid, cfg.substeps);
		Simulation& sim = sims[i];
		sim.mu = Vec(0);
		sim.t = time_vector(grid);
		sim.U = Mat(grid.n_samples(), 0);
		sim.X.resize(grid.n_samples(), 4);
		sim.Xdot.resize(grid.n_samples(), 4);
		for (int k = 0; k < grid.n_samples(); ++k) {
			const PendulumState s{Y(k, 0), Y(k, 1)};
			sim.X.row(k) = pendulum_to_cartesian(s, cfg.l).transpose();
			sim.Xdot.row(k) = pendulum_cartesian_derivative(s, pc).transpose();
		}
	});

	DatasetPair out;
	out.train.kind = out.test.kind = "pendulum";
	out.train.sims.assign(sims.begin(), sims.begin() + cfg.n_train);
	out.test.sims.assign(sims.begin() + cfg.n_train, sims.end());
	nlohmann::json gen = {{"dt", cfg.dt},       {"substeps", cfg.substeps}, {"g", cfg.g}, {"l", cfg.l},
	                      {"seed", cfg.seed},   {"max_deflection", cfg.max_deflection}};
	out.train.generation = gen;
	out.train.generation["split"] = "train";
	out.train.generation["n_t"] = cfg.n_t_train;
	out.train.generation["phi0"] = std::vector<double>(phi0.begin(), phi0.begin() + cfg.n_train);
	out.test.generation = gen;
	out.test.generation["split"] = "test";
	out.test.generation["n_t"] = cfg.n_t_test;
	out.test.generation["phi0"] = std::vector<double>(phi0.begin() + cfg.n_train, phi0.end());
	return out;
}

DatasetPair generate_wave_standin(const WaveConfig& cfg, int jobs)
{
	check_counts(cfg.n_train, cfg.n_test, cfg.n_t);
	check_range(cfg.stiffness, "stiffness", true);
	check_range(cfg.damping, "damping", false);
	if (!(cfg.t_end > 0.0) || !(cfg.input_time_constant > 0.0))
		throw ConfigError("wave stand-in: t_end and input time constant must be positive");

	const int n_total = cfg.n_train + cfg.n_test;
	const Mat mus = scale_to_box(halton_points(n_total, 2), {cfg.stiffness.lo, cfg.damping.lo},
	                             {cfg.stiffness.hi, cfg.damping.hi});
	integrate::TimeGrid grid{0.0, cfg.t_end / (cfg.n_t - 1), cfg.n_t - 1};
	grid.validate();
	const Vec t = time_vector(grid);
	Mat U(grid.n_samples(), 1);
	for (int k = 0; k < grid.n_samples(); ++k)
		U(k, 0) = cfg.input_amplitude * (1.0 - std::exp(-t(k) / cfg.input_time_constant));

	std::vector<Simulation> sims(static_cast<std::size_t>(n_total));
	util::parallel_for(sims.size(), jobs, [&](std::size_t i) {
		const auto row = static_cast<Eigen::Index>(i);
		WaveParameters p;
		p.n_nodes = cfg.n_nodes;
		p.stiffness = mus(row, 0);
		p.damping = mus(row, 1);
		p.diffusivity = cfg.diffusivity;
		p.coupling = cfg.coupling;
		const auto sys = wave_reference_system(p);
		const auto traj = integrate::simulate_latent(sys, Vec::Zero(sys.r()), U, grid);
		Simulation& sim = sims[i];
		sim.mu = mus.row(row).transpose();
		sim.t = t;
		sim.X = traj.Z;
		sim.U = U;
		sim.Xdot = central_differences(traj.Z, grid.dt);
	});

	DatasetPair out;
	out.train.kind = out.test.kind = "wave";
	out.train.sims.assign(sims.begin(), sims.begin() + cfg.n_train);
	out.test.sims.assign(sims.begin() + cfg.n_train, sims.end());
	nlohmann::json gen = {{"n_nodes", cfg.n_nodes},
	                      {"n_t", cfg.n_t},
	                      {"t_end", cfg.t_end},
	                      {"diffusivity", cfg.diffusivity},
	                      {"coupling", cfg.coupling},
	                      {"stiffness", {cfg.stiffness.lo, cfg.stiffness.hi}},
	                      {"damping", {cfg.damping.lo, cfg.damping.hi}},
	                      {"input_amplitude", cfg.input_amplitude},
	                      {"input_time_constant", cfg.input_time_constant},
	                      {"seed", cfg.seed}};
	out.train.generation = gen;
	out.train.generation["split"] = "train";
	out.test.generation = gen;
	out.test.generation["split"] = "test";
	return out;
}

} // namespace phid::data
