#include "phid/autoencoder/autoencoder.hpp"
#include "phid/datasets/generators.hpp"
#include "phid/datasets/preprocessing.hpp"
#include "phid/datasets/reference_systems.hpp"
#include "phid/datasets/sampling.hpp"
#include "phid/datasets/storage.hpp"
#include "phid/errors.hpp"
#include "phid/integrate/integrators.hpp"
#include "phid/io/csv.hpp"
#include "phid/io/hashing.hpp"
#include "phid/ph/properties.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace phid;
using namespace phid::data;
using phid::test::random_mat;

namespace {

// Largest interior deviation between Xdot and central differences of X,
// relative to max |Xdot| of the simulation.
double derivative_mismatch(const TrajectoryDataset& ds)
{
	double worst = 0.0;
	for (const auto& s : ds.sims) {
		const double dt = s.t(1) - s.t(0);
		const Mat cd = central_differences(s.X, dt);
		const auto n = s.X.rows() - 2;
		worst = std::max(worst, (cd - s.Xdot).middleRows(1, n).cwiseAbs().maxCoeff() /
		                            s.Xdot.cwiseAbs().maxCoeff());
	}
	return worst;
}

// Largest |count/n - volume| over anchored boxes [0, a) x [0, b) with
// corners on a uniform grid.
double star_discrepancy_estimate(const Mat& pts)
{
	const int grid = 100;
	double worst = 0.0;
	for (int i = 1; i <= grid; ++i)
		for (int j = 1; j <= grid; ++j) {
			const double a = double(i) / grid, b = double(j) / grid;
			const auto inside = ((pts.col(0).array() < a) && (pts.col(1).array() < b)).count();
			worst = std::max(worst, std::abs(double(inside) / pts.rows() - a * b));
		}
	return worst;
}

TrajectoryDataset toy_dataset(const std::vector<double>& mus, std::mt19937_64& rng)
{
	TrajectoryDataset ds;
	ds.kind = "toy";
	for (double m : mus) {
		Simulation s;
		s.mu = Vec::Constant(1, m);
		s.t = Vec::LinSpaced(5, 0.0, 0.4);
		s.X = random_mat(5, 3, rng);
		s.Xdot = random_mat(5, 3, rng);
		s.U = random_mat(5, 1, rng);
		ds.sims.push_back(s);
	}
	return ds;
}

} // namespace

TEST_CASE("msd_reference_system layout")
{
	MSDParameters p;
	p.m = {1.0, 2.0, 3.0};
	p.k = {1.5, 1.5, 1.5};
	p.c = {0.1, 0.2, 0.3};
	const auto s = msd_reference_system(p);
	Mat R = Mat::Zero(6, 6);
	R.diagonal() << 0, 0, 0, 0.1, 0.2, 0.3;
	CHECK(s.R == R);
	CHECK(s.Q.topLeftCorner(3, 3) == Mat{{1.5, -1.5, 0.0}, {-1.5, 3.0, -1.5}, {0.0, -1.5, 3.0}});
	CHECK(s.Q.bottomRightCorner(3, 3) == Vec{{1.0, 0.5, 1.0 / 3.0}}.asDiagonal().toDenseMatrix());
	CHECK(s.J.topRightCorner(3, 3) == Mat::Identity(3, 3));
	CHECK(s.J.bottomLeftCorner(3, 3) == -Mat::Identity(3, 3));
	CHECK(s.B == Vec::Unit(6, 3));
	CHECK(ph::verify_ph_properties(s).passes());

	const auto one = msd_reference_system(MSDParameters::uniform(2.0, 5.0, 1.0, 1));
	CHECK(one.J == Mat{{0.0, 1.0}, {-1.0, 0.0}});
	CHECK(one.Q == Mat{{5.0, 0.0}, {0.0, 0.5}});

	p.c[1] = -1.0;
	CHECK_THROWS_AS(msd_reference_system(p), ConfigError);
}

TEST_CASE("damped_harmonic_input")
{
	CHECK(damped_harmonic_input(0.7, 3.0)(0.0) == 0.0);
	CHECK(damped_harmonic_input(1.0, 1.0)(1.0) == doctest::Approx(std::exp(-1.0) * std::sin(1.0)).epsilon(1e-15));
	CHECK(damped_harmonic_input(1.0, 1.0)(1.0) == doctest::Approx(0.30956).epsilon(1e-4));
	const auto u = damped_harmonic_input(0.0, 2.3);
	for (int i = 0; i < 1000; ++i)
		CHECK(std::abs(u(0.01 * i)) <= 1.0);
}

TEST_CASE("generate_msd")
{
	MsdConfig cfg;
	cfg.n_train = 90;
	cfg.n_test = 2;
	const auto full = generate_msd(cfg);
	CHECK(full.train.sims.size() == 90);
	CHECK(full.train.n_t() == 400);
	CHECK(full.train.N() == 6);
	CHECK(full.train.n_p() == 1);
	CHECK(full.train.n_mu() == 3);

	const auto& s = full.train.sims.front();
	for (int k = 0; k < 3; ++k) {
		CHECK(s.mu(k) >= 0.1);
		CHECK(s.mu(k) <= (k == 2 ? 10.0 : 100.0));
	}
	CHECK(s.X.row(0).isZero(0.0));

	// same trajectory through the raw chain, mapped to Q = I coordinates
	for (int i = 0; i < 5; ++i) {
		const auto& sim = full.train.sims[static_cast<std::size_t>(i)];
		const auto raw = msd_reference_system(MSDParameters::uniform(sim.mu(0), sim.mu(1), sim.mu(2), 3));
		const auto tr = ph::normalize_to_identity_Q(raw);
		const integrate::TimeGrid grid{sim.t(0), sim.t(1) - sim.t(0), static_cast<int>(sim.t.size()) - 1};
		const auto traj = integrate::simulate_latent(raw, Vec::Zero(6), sim.U, grid);
		CHECK((traj.Z * tr.L - sim.X).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, sim.X.cwiseAbs().maxCoeff()));
	}

	MsdConfig heavy;
	heavy.n_train = 3;
	heavy.n_test = 1;
	heavy.random_z0 = true;
	heavy.c = {9.0, 10.0};
	heavy.delta = {2.0, 2.0};
	const auto h = generate_msd(heavy);
	for (const auto& sim : h.train.sims)
		CHECK(sim.X.bottomRows(1).norm() < sim.X.row(40).norm());
}

TEST_CASE("msd derivatives converge to central differences with second order")
{
	MsdConfig cfg;
	cfg.n_train = 10;
	cfg.n_test = 1;
	const double coarse = derivative_mismatch(generate_msd(cfg).train);
	cfg.n_t = 2 * cfg.n_t - 1;
	const double fine = derivative_mismatch(generate_msd(cfg).train);
	CHECK(coarse <= 1e-2);
	CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("pendulum helpers")
{
	const PendulumConstants unit{1.0, 1.0};
	const auto eq = pendulum_rhs({0.0, 0.0}, unit);
	CHECK(eq.phi == 0.0);
	CHECK(eq.omega == 0.0);
	CHECK(pendulum_rhs({std::numbers::pi / 2, 0.0}, unit).omega == doctest::Approx(-1.0).epsilon(1e-15));

	CHECK(pendulum_to_cartesian({0.0, 0.0}, 1.0) == Eigen::Vector4d(0, 1, 0, 0));
	const auto c = pendulum_to_cartesian({std::numbers::pi / 3, 0.4}, 2.0);
	CHECK(c(0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
	CHECK(c(1) == doctest::Approx(1.0).epsilon(1e-15));
	std::mt19937_64 rng(1);
	std::uniform_real_distribution<double> ud(-10.0, 10.0);
	for (int i = 0; i < 1000; ++i) {
		const auto x = pendulum_to_cartesian({ud(rng), ud(rng)}, 1.7);
		CHECK(std::abs(x(0) * x(0) + x(1) * x(1) - 1.7 * 1.7) <= 1e-14);
	}

	const PendulumConstants pc;
	const integrate::Rhs f = [&](double, const Vec& s) {
		const auto d = pendulum_rhs({s(0), s(1)}, pc);
		return Vec{{d.phi, d.omega}};
	};
	const Mat traj = integrate::rk4_rollout(f, Vec{{1.0, 0.0}}, integrate::TimeGrid{0.0, 1e-3, 5000});
	const auto energy = [&](Eigen::Index k) {
		return 0.5 * pc.l * pc.l * traj(k, 1) * traj(k, 1) - pc.g * pc.l * std::cos(traj(k, 0));
	};
	for (Eigen::Index k = 0; k < traj.rows(); k += 100)
		CHECK(std::abs(energy(k) - energy(0)) <= 1e-6);

	const PendulumState st{0.3, -1.1};
	const double h = 1e-6;
	const auto d = pendulum_rhs(st, pc);
	const Eigen::Vector4d fd = (pendulum_to_cartesian({st.phi + h * d.phi, st.omega + h * d.omega}, pc.l) -
	                            pendulum_to_cartesian({st.phi - h * d.phi, st.omega - h * d.omega}, pc.l)) /
	                           (2 * h);
	CHECK((pendulum_cartesian_derivative(st, pc) - fd).norm() < 1e-8);
}

TEST_CASE("generate_pendulum")
{
	const auto ds = generate_pendulum(PendulumConfig{});
	CHECK(ds.train.sims.size() == 12);
	CHECK(ds.test.sims.size() == 6);
	CHECK(ds.train.n_t() == 500);
	CHECK(ds.test.n_t() == 1000);
	CHECK(ds.train.N() == 4);
	for (const auto* split : {&ds.train, &ds.test})
		for (const auto& s : split->sims) {
			const Vec rho = s.X.col(0).array().square() + s.X.col(1).array().square();
			CHECK((rho.array() - 1.0).abs().maxCoeff() <= 1e-12);
			CHECK(std::abs(std::asin(s.X(0, 0))) <= std::numbers::pi / 3 + 1e-12);
			CHECK(s.X.row(0).tail(2).norm() == 0.0);
		}
	CHECK(derivative_mismatch(ds.train) <= 1e-3);
	CHECK(derivative_mismatch(ds.test) <= 1e-3);
}

TEST_CASE("halton sequence")
{
	CHECK(halton(1, 2) == 0.5);
	CHECK(halton(2, 2) == 0.25);
	CHECK(halton(3, 2) == 0.75);
	CHECK(halton(1, 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
	CHECK_THROWS_AS(halton(0, 2), ConfigError);
	CHECK_THROWS_AS(halton(1, 1), ConfigError);

	const Mat pts = halton_points(1000, 2);
	CHECK(pts(0, 0) == 0.5);
	CHECK(pts(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
	std::mt19937_64 rng(1);
	std::uniform_real_distribution<double> ud(0.0, 1.0);
	const Mat rnd = Mat::NullaryExpr(1000, 2, [&] { return ud(rng); });
	CHECK(star_discrepancy_estimate(pts) < star_discrepancy_estimate(rnd));

	const Mat box = scale_to_box(pts.topRows(3), {0.0, 10.0}, {2.0, 20.0});
	CHECK(box(0, 0) == 1.0);
	CHECK(box(0, 1) == doctest::Approx(10.0 + 10.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("central_differences")
{
	const double dt = 1e-3;
	const Vec t = Vec::LinSpaced(1001, 0.0, 1.0);
	Mat lin(1001, 2);
	lin.col(0) = 3.0 * t.array() - 1.0;
	lin.col(1) = Vec::Constant(1001, 4.0);
	const Mat d = central_differences(lin, dt);
	CHECK((d.col(0).array() - 3.0).abs().maxCoeff() <= 1e-9);
	CHECK(d.col(1).cwiseAbs().maxCoeff() == 0.0);

	const Mat s = t.array().sin().matrix();
	const Mat ds = central_differences(s, dt);
	CHECK((ds.middleRows(1, 999) - t.segment(1, 999).array().cos().matrix()).cwiseAbs().maxCoeff() <= 1e-6);
	CHECK_THROWS_AS(central_differences(Mat::Zero(2, 3), dt), ConfigError);
}

TEST_CASE("scaling")
{
	std::mt19937_64 rng(3);
	DatasetPair pair{toy_dataset({0.0, 2.0}, rng), toy_dataset({1.0, 3.0}, rng)};
	const auto original = pair;
	ScalingSpec spec;
	spec.fields = {{"a", 2, 0.0}, {"b", 1, 4.0}};
	spec.scale_mu = true;
	spec.scale_u = true;
	const auto sc = normalize_dataset(pair, spec);
	CHECK(pair.test.sims[0].mu(0) == 0.5);
	CHECK(pair.test.sims[1].mu(0) == 1.5);
	CHECK(sc.fields[1].factor == 4.0);
	double max_a = 0.0;
	for (const auto& s : original.train.sims)
		max_a = std::max(max_a, s.X.leftCols(2).cwiseAbs().maxCoeff());
	CHECK(sc.fields[0].factor == doctest::Approx(1.0 / max_a).epsilon(1e-15));
	for (const auto& s : pair.train.sims) {
		CHECK(s.U.minCoeff() >= 0.0);
		CHECK(s.U.maxCoeff() <= 1.0);
		CHECK(s.X.leftCols(2).cwiseAbs().maxCoeff() <= 1.0);
	}
	CHECK((pair.train.sims[0].Xdot.col(2) - 4.0 * original.train.sims[0].Xdot.col(2)).norm() < 1e-14);

	remove_scaling(pair.test);
	for (std::size_t i = 0; i < 2; ++i) {
		CHECK((pair.test.sims[i].X - original.test.sims[i].X).cwiseAbs().maxCoeff() <= 1e-12);
		CHECK((pair.test.sims[i].U - original.test.sims[i].U).cwiseAbs().maxCoeff() <= 1e-12);
		CHECK(std::abs(pair.test.sims[i].mu(0) - original.test.sims[i].mu(0)) <= 1e-12);
	}

	DatasetPair flat{toy_dataset({1.0, 1.0}, rng), toy_dataset({1.0}, rng)};
	CHECK_THROWS_AS(normalize_dataset(flat, spec), ConfigError);

	const auto samples = flatten_samples(original.train);
	CHECK(samples.X.cols() == 10);
	CHECK(samples.Mu.rows() == 1);
	CHECK(samples.X.col(5) == original.train.sims[1].X.row(0).transpose());
}

TEST_CASE("wave stand-in")
{
	WaveConfig quiet;
	quiet.n_nodes = 20;
	quiet.n_train = 2;
	quiet.n_test = 1;
	quiet.input_amplitude = 0.0;
	const auto zero = generate_wave_standin(quiet);
	for (const auto& s : zero.train.sims)
		CHECK(s.X.isZero(0.0));

	const auto sys = wave_reference_system(WaveParameters{40, 1.3, 2.0, 0.05, 1.0});
	CHECK(ph::verify_ph_properties(sys).passes());
	std::mt19937_64 rng(4);
	const auto b = ph::check_boundedness(sys, Vec(random_mat(120, 1, rng)), 500, 0.01);
	CHECK(b.contained);
	const auto rep = ph::check_dissipation(sys, b.states, Mat::Zero(501, 1), 0.01);
	for (double d : rep.delta_H)
		CHECK(d <= 0.0);

	WaveConfig cfg;
	cfg.n_train = 6;
	cfg.n_test = 1;
	const auto ds = generate_wave_standin(cfg);
	CHECK(ds.train.N() == 3 * cfg.n_nodes);
	CHECK(ds.train.n_t() == cfg.n_t);
	CHECK(ae::fit_pca(ds.train.snapshot_matrix(), 8).captured_energy() >= 0.99);
	CHECK(derivative_mismatch(ds.train) <= 1e-3);
}

TEST_CASE("dataset storage round trip")
{
	MsdConfig cfg;
	cfg.n_train = 3;
	cfg.n_test = 1;
	cfg.n_t = 50;
	auto pair = generate_msd(cfg);
	ScalingSpec spec;
	spec.fields = {{"state", 6, 0.0}};
	spec.scale_mu = true;
	normalize_dataset(pair, spec);

	const auto dir = std::filesystem::temp_directory_path() / "phid_test_dataset";
	std::filesystem::remove_all(dir);
	save_dataset(pair.train, dir);
	CHECK(std::filesystem::exists(dir / "meta.json"));
	CHECK(std::filesystem::exists(dir / "sim_0000.csv"));
	const auto header = io::read_csv(dir / "sim_0000.csv").columns;
	CHECK(header.front() == "t");
	CHECK(header[1] == "mu_0");
	CHECK(header[4] == "u_0");
	CHECK(header[5] == "x_0");
	CHECK(header.back() == "xdot_5");

	const auto back = load_dataset(dir);
	REQUIRE(back.sims.size() == pair.train.sims.size());
	for (std::size_t i = 0; i < back.sims.size(); ++i) {
		const auto& a = back.sims[i];
		const auto& b = pair.train.sims[i];
		CHECK((a.X.array() == b.X.array()).all());
		CHECK((a.Xdot.array() == b.Xdot.array()).all());
		CHECK((a.U.array() == b.U.array()).all());
		CHECK((a.t.array() == b.t.array()).all());
		CHECK((a.mu.array() == b.mu.array()).all());
	}
	CHECK(back.scaling.applied);
	CHECK(back.scaling.fields.front().factor == pair.train.scaling.fields.front().factor);

	io::write_file(dir / "sim_0001.csv", io::read_file(dir / "sim_0001.csv") + "\n");
	CHECK_THROWS_AS(load_dataset(dir), ConfigError);
	std::filesystem::remove_all(dir);
	CHECK_THROWS_AS(load_dataset(dir), ConfigError);
}
