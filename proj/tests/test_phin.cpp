#include "phid/autoencoder/autoencoder.hpp"
#include "phid/datasets/reference_systems.hpp"
#include "phid/diffkit/adam.hpp"
#include "phid/errors.hpp"
#include "phid/integrate/integrators.hpp"
#include "phid/ph/properties.hpp"
#include "phid/phin/losses.hpp"
#include "phid/phin/phin.hpp"
#include "phid/phin/serialization.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <filesystem>

using namespace phid;
using namespace phid::phin;
using phid::test::random_mat;

namespace {

// Lower-triangular L with L L^T = A for symmetric PSD A; zero pivots give
// zero columns.
Mat semidefinite_cholesky(const Mat& A)
{
	const auto n = A.rows();
	Mat L = Mat::Zero(n, n);
	for (Eigen::Index j = 0; j < n; ++j) {
		const double d = A(j, j) - L.row(j).head(j).squaredNorm();
		if (d <= 1e-14 * std::max(1.0, A.diagonal().cwiseAbs().maxCoeff()))
			continue;
		L(j, j) = std::sqrt(d);
		for (Eigen::Index i = j + 1; i < n; ++i)
			L(i, j) = (A(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
	}
	return L;
}

// Frozen-Q weights reproducing a system that already has Q = I.
Mat weights_for(const ph::PHSystem& sys)
{
	const int r = sys.r();
	const int n_p = sys.n_p();
	const ph::PhLayout layout{r, n_p, 1e-6, true};
	Mat theta(layout.total(), 1);
	int k = 0;
	for (int i = 0; i < r; ++i)
		for (int j = 0; j < i; ++j)
			theta(k++) = sys.J(i, j);
	const Mat L = semidefinite_cholesky(0.5 * (sys.R + sys.R.transpose()));
	for (int i = 0; i < r; ++i)
		for (int j = 0; j <= i; ++j)
			theta(k++) = L(i, j);
	for (int i = 0; i < r; ++i)
		for (int j = 0; j < n_p; ++j)
			theta(k++) = sys.B(i, j);
	return theta;
}

ph::PHSystem msd_identity_q()
{
	return ph::normalize_to_identity_Q(
	           data::msd_reference_system(data::MSDParameters::uniform(1.0, 1.0, 0.5, 3)))
	    .system;
}

double fd_max_rel_error(ae::Autoencoder ae, PhinModel model, const Batch& batch, const LossWeights& lam)
{
	const auto grad = loss_gradient(ae, model, batch, lam);
	auto params = ae::trainable_parameters(ae);
	for (const auto& p : trainable_parameters(model))
		params.push_back(p);
	REQUIRE(params.size() == grad.grads.size());
	double worst = 0.0;
	const double h = 1e-6;
	for (std::size_t k = 0; k < params.size(); ++k) {
		Mat& w = *params[k].value;
		const double scale = std::max(grad.grads[k].cwiseAbs().maxCoeff(), 1e-6);
		for (Eigen::Index i = 0; i < w.size(); ++i) {
			const double orig = w(i);
			w(i) = orig + h;
			const double fp = evaluate_loss(ae, model, batch, lam).total;
			w(i) = orig - h;
			const double fm = evaluate_loss(ae, model, batch, lam).total;
			w(i) = orig;
			const double fd = (fp - fm) / (2 * h);
			const double g = grad.grads[k](i);
			const double denom = std::max({std::abs(fd), std::abs(g), 1e-3 * scale});
			worst = std::max(worst, std::abs(fd - g) / denom);
		}
	}
	return worst;
}

} // namespace

TEST_CASE("phin_rhs examples")
{
	const ph::PhLayout layout{2, 1, 1e-6, false};
	PhinModel zero;
	zero.layout = layout;
	zero.theta = Mat::Zero(layout.total(), 1);
	CHECK(phin_rhs(zero, Vec{{1.0, 2.0}}, Vec{{3.0}}).isZero(0.0));

	PhinModel rot;
	rot.layout = ph::PhLayout{2, 1, 1e-6, true};
	rot.theta = Mat::Zero(rot.layout.total(), 1);
	rot.theta(0) = 1.0;
	CHECK(phin_rhs(rot, Vec{{1.0, 0.0}}, Vec{{0.0}}) == Vec{{0.0, 1.0}});

	const auto ref = msd_identity_q();
	PhinModel msd;
	msd.layout = ph::PhLayout{6, 1, 1e-6, true};
	msd.theta = weights_for(ref);
	std::mt19937_64 rng(10);
	for (int i = 0; i < 10; ++i) {
		const Vec z = random_mat(6, 1, rng);
		const Vec u = random_mat(1, 1, rng);
		CHECK((phin_rhs(msd, z, u) - ref.rhs(z, u)).cwiseAbs().maxCoeff() < 1e-12);
	}
	CHECK_THROWS_AS(phin_rhs(msd, Vec::Zero(5), Vec::Zero(1)), DimensionError);
}

TEST_CASE("hypernetwork materialization")
{
	const ph::PhLayout layout{3, 1, 1e-6, false};
	auto model = make_parametric(layout, 2, {8, 8}, 4);
	REQUIRE(model.hyper->mlp.layers.back().W.rows() == layout.total());

	auto zeroed = model;
	for (auto& l : zeroed.hyper->mlp.layers) {
		l.W.setZero();
		l.b.setZero();
	}
	const auto sys = hypernet_materialize(zeroed, Vec{{0.3, 0.7}}).system();
	CHECK(sys.J.isZero(0.0));
	CHECK(sys.R.isZero(0.0));
	CHECK(sys.Q == 1e-6 * Mat::Identity(3, 3));

	auto frozen = make_parametric(ph::PhLayout{3, 1, 1e-6, true}, 2, {8}, 4);
	for (auto& l : frozen.hyper->mlp.layers) {
		l.W.setZero();
		l.b.setZero();
	}
	CHECK(frozen.system(Vec{{0.1, 0.2}}).Q == Mat::Identity(3, 3));

	const Vec a = model.theta_for(Vec{{0.1, 0.2}});
	const Vec b = model.theta_for(Vec{{0.9, 0.4}});
	CHECK((a - b).norm() > 1e-8);
	CHECK_FALSE(hypernet_materialize(model, Vec{{0.1, 0.2}}).parametric());
	CHECK_THROWS_AS(model.theta_for(Vec::Zero(3)), DimensionError);
}

TEST_CASE("materialized systems satisfy pH properties")
{
	std::mt19937_64 rng(500);
	for (std::uint64_t seed = 0; seed < 500; ++seed) {
		const ph::PhLayout layout{2 + static_cast<int>(seed % 5), 1 + static_cast<int>(seed % 2), 1e-6, seed % 3 == 0};
		if (seed % 2 == 0) {
			const auto m = make_phin(layout, seed, 1.0);
			CHECK(ph::verify_ph_properties(m.system()).passes());
		} else {
			const auto m = make_parametric(layout, 2, {4}, seed);
			CHECK(ph::verify_ph_properties(m.system(Vec(random_mat(2, 1, rng)))).passes());
		}
	}
}

TEST_CASE("loss_ph examples")
{
	const auto m = make_phin(ph::PhLayout{3, 1, 1e-6, false}, 3);
	std::mt19937_64 rng(1);
	const Mat Z = random_mat(3, 5, rng);
	const Mat U = random_mat(1, 5, rng);
	Mat Zdot(3, 5);
	for (int i = 0; i < 5; ++i)
		Zdot.col(i) = phin_rhs(m, Z.col(i), U.col(i));
	CHECK(loss_ph(m, Z, Zdot, U) < 1e-28);

	PhinModel zero;
	zero.layout = ph::PhLayout{2, 1, 1e-6, false};
	zero.theta = Mat::Zero(zero.layout.total(), 1);
	CHECK(loss_ph(zero, Mat::Zero(2, 1), Mat{{1.0}, {0.0}}, Mat::Zero(1, 1)) == 1.0);
	// batch mean of squared norms
	CHECK(loss_ph(zero, Mat::Zero(2, 2), Mat{{1.0, 0.0}, {0.0, 3.0}}, Mat::Zero(1, 2)) == 5.0);
	CHECK_THROWS_AS(loss_ph(zero, Mat::Zero(2, 2), Mat::Zero(2, 3), Mat::Zero(1, 2)), DimensionError);
}

TEST_CASE("loss_rec examples")
{
	std::mt19937_64 rng(2);
	const Mat X = random_mat(5, 40, rng);
	CHECK(loss_rec(ae::make_identity(5), X) == 0.0);
	CHECK(loss_rec(ae::make_linear(ae::fit_pca(X, 5)), X) <= 1e-20);

	const Mat low = random_mat(5, 3, rng) * random_mat(3, 40, rng);
	const Eigen::JacobiSVD<Mat> svd(low);
	const double discarded = svd.singularValues()(2) * svd.singularValues()(2);
	CHECK(loss_rec(ae::make_linear(ae::fit_pca(low, 2)), low) ==
	      doctest::Approx(discarded / 40.0).epsilon(1e-10));
}

TEST_CASE("loss_con examples")
{
	std::mt19937_64 rng(3);
	const auto m = make_phin(ph::PhLayout{3, 1, 1e-6, false}, 5, 0.5);
	const Mat X = random_mat(3, 6, rng);
	const Mat U = random_mat(1, 6, rng);
	Mat Xdot(3, 6);
	for (int i = 0; i < 6; ++i)
		Xdot.col(i) = phin_rhs(m, X.col(i), U.col(i));
	CHECK(loss_con(ae::make_identity(3), m, X, Xdot, U) < 1e-28);

	const auto pca = ae::fit_pca(random_mat(7, 30, rng), 3);
	const auto lin = ae::make_linear(pca);
	const Mat Xl = random_mat(7, 6, rng);
	const Mat Xdl = random_mat(7, 6, rng);
	double expected = 0.0;
	for (int i = 0; i < 6; ++i)
		expected += (Xdl.col(i) - pca.V * phin_rhs(m, pca.V.transpose() * Xl.col(i), U.col(i))).squaredNorm();
	CHECK(loss_con(lin, m, Xl, Xdl, U) == doctest::Approx(expected / 6.0).epsilon(1e-12));

	const auto net = ae::make_nonlinear(4, 3, {8, 8}, std::nullopt, 9);
	const Mat Xn = random_mat(4, 6, rng);
	const Mat Xdn = random_mat(4, 6, rng);
	double fd_loss = 0.0;
	const double h = 1e-6;
	for (int i = 0; i < 6; ++i) {
		const Vec z = net.encode(Vec(Xn.col(i)));
		const Vec f = phin_rhs(m, z, U.col(i));
		Mat D(4, 3);
		for (int j = 0; j < 3; ++j) {
			const Vec e = Vec::Unit(3, j);
			D.col(j) = (net.decode(Vec(z + h * e)) - net.decode(Vec(z - h * e))) / (2 * h);
		}
		fd_loss += (Xdn.col(i) - D * f).squaredNorm();
	}
	CHECK(loss_con(net, m, Xn, Xdn, U) == doctest::Approx(fd_loss / 6.0).epsilon(1e-5));
}

TEST_CASE("loss_total")
{
	const LossValues parts{2.0, 3.0, 5.0, 7.0, 0.0};
	CHECK(loss_total(parts, LossWeights{0.0, 0.0, 0.0, 0.0}) == 0.0);
	CHECK(loss_total(parts, LossWeights{1.0, 0.1, 0.001, 1e-10}) ==
	      doctest::Approx(2.0 + 0.3 + 0.005 + 7e-10).epsilon(1e-15));
	CHECK(loss_total(parts, LossWeights{0.0, 1.0, 0.0, 1e-7}) == doctest::Approx(3.0 + 7e-7).epsilon(1e-15));
	CHECK_THROWS_AS((LossWeights{-1.0, 1.0, 0.0, 0.0}.validate()), ConfigError);
}

TEST_CASE("loss gradient matches finite differences")
{
	const LossWeights lam{0.7, 1.3, 0.4, 0.01};
	double worst = 0.0;
	for (std::uint64_t seed = 1; seed <= 10; ++seed) {
		std::mt19937_64 rng(seed);
		const auto ae = ae::make_nonlinear(2, 2, {8, 8}, std::nullopt, seed);
		Batch b{random_mat(2, 3, rng), random_mat(2, 3, rng), random_mat(1, 3, rng), Mat(0, 3)};
		worst = std::max(worst, fd_max_rel_error(ae, make_phin(ph::PhLayout{2, 1, 1e-6, false}, seed, 0.5), b, lam));

		const auto param = make_parametric(ph::PhLayout{2, 1, 1e-6, false}, 1, {4}, seed + 50);
		b.Mu = random_mat(1, 3, rng);
		worst = std::max(worst, fd_max_rel_error(ae, param, b, lam));
	}
	CHECK(worst <= 1e-4);
}

TEST_CASE("loss_ph decreases under Adam on the MSD toy")
{
	const auto ref = msd_identity_q();
	const integrate::TimeGrid grid{0.0, 0.01, 400};
	const auto u = data::damped_harmonic_input(0.5, 0.5);
	Mat U(401, 1);
	for (int k = 0; k <= 400; ++k)
		U(k, 0) = u(grid.time(k));
	std::mt19937_64 rng(6);
	const auto traj = integrate::simulate_latent(ref, Vec(random_mat(6, 1, rng)), U, grid);
	Batch b;
	b.X = traj.Z.transpose();
	b.U = U.transpose();
	b.Xdot.resize(6, 401);
	for (int k = 0; k <= 400; ++k)
		b.Xdot.col(k) = ref.rhs(b.X.col(k), b.U.col(k));
	b.Mu = Mat(0, 401);

	const auto ae = ae::make_identity(6);
	auto model = make_phin(ph::PhLayout{6, 1, 1e-6, true}, 1);
	const LossWeights lam{0.0, 1.0, 0.0, 0.0};
	const double initial = evaluate_loss(ae, model, b, lam).ph;
	diffkit::AdamState st;
	st.lr = 0.01;
	auto params = trainable_parameters(model);
	for (int step = 0; step < 200; ++step)
		diffkit::adam_step(params, loss_gradient(ae, model, b, lam).grads, st);
	CHECK(evaluate_loss(ae, model, b, lam).ph < 0.01 * initial);
}

TEST_CASE("stronger L1 does not densify the weights")
{
	const auto ref = msd_identity_q();
	std::mt19937_64 rng(7);
	Batch b;
	b.X = random_mat(6, 200, rng);
	b.U = random_mat(1, 200, rng);
	b.Xdot.resize(6, 200);
	for (int k = 0; k < 200; ++k)
		b.Xdot.col(k) = ref.rhs(b.X.col(k), b.U.col(k));
	b.Mu = Mat(0, 200);

	const auto ae = ae::make_identity(6);
	std::vector<long> counts;
	for (double l1 : {1e-3, 1e-2, 1e-1}) {
		auto model = make_phin(ph::PhLayout{6, 1, 1e-6, true}, 1);
		const LossWeights lam{0.0, 1.0, 0.0, l1};
		diffkit::AdamState st;
		auto params = trainable_parameters(model);
		for (int step = 0; step < 1500; ++step) {
			// anneal so weights pruned by L1 settle near zero
			st.lr = step < 1000 ? 0.01 : 1e-4;
			diffkit::adam_step(params, loss_gradient(ae, model, b, lam).grads, st);
		}
		counts.push_back((model.theta.array().abs() > 1e-3).count());
	}
	CHECK(counts[1] <= counts[0]);
	CHECK(counts[2] <= counts[1]);
}

TEST_CASE("trained model round trip")
{
	const auto dir = std::filesystem::temp_directory_path() / "phid_test_model";
	std::filesystem::create_directories(dir);
	std::mt19937_64 rng(9);
	const auto pca = ae::fit_pca(random_mat(80, 100, rng), 6);
	TrainedModel tm{ae::make_nonlinear(80, 2, {8}, pca, 3), make_parametric(ph::PhLayout{2, 1, 1e-6, false}, 2, {4}, 1),
	                nlohmann::json{{"note", "x"}}};
	save_model(tm, dir / "model.json");
	const auto back = load_model(dir / "model.json");
	const Vec x = random_mat(80, 1, rng);
	CHECK((back.autoencoder.encode(x) - tm.autoencoder.encode(x)).norm() == 0.0);
	const Vec mu{{0.2, 0.4}};
	CHECK(back.phin.theta_for(mu) == tm.phin.theta_for(mu));
	CHECK(back.metadata["note"] == "x");
	CHECK(phin_from_json(to_json(tm.phin)).layout.total() == tm.phin.layout.total());
	std::filesystem::remove_all(dir);
}
