#include "phid/diffkit/adam.hpp"
#include "phid/diffkit/graph.hpp"
#include "phid/diffkit/mlp.hpp"
#include "phid/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace phid;
using namespace phid::diffkit;

namespace {

Mat random_mat(int rows, int cols, std::mt19937_64& rng, double scale = 1.0)
{
	std::normal_distribution<double> nd(0.0, scale);
	return Mat::NullaryExpr(rows, cols, [&] { return nd(rng); });
}

using Builder = std::function<NodeId(Graph&, const std::vector<NodeId>&)>;

// Reduces the builder output to a scalar, then compares reverse-mode
// gradients with central differences for every input entry. Entries far
// below the largest gradient component are compared on that scale.
double max_grad_error(const Builder& build, std::vector<Mat> inputs, double h = 1e-6)
{
	auto scalar = [&](const std::vector<Mat>& in, Graph& g, std::vector<NodeId>& leaves) {
		leaves.clear();
		for (const auto& m : in)
			leaves.push_back(g.leaf(m));
		const auto y = build(g, leaves);
		return g.value(y).size() == 1 ? y : g.sum_squares(y);
	};
	Graph g;
	std::vector<NodeId> leaves;
	const auto out = scalar(inputs, g, leaves);
	g.reverse_grad(out);

	double worst = 0.0;
	for (std::size_t k = 0; k < inputs.size(); ++k) {
		const Mat grad = g.adjoint(leaves[k]);
		const double scale = std::max(grad.cwiseAbs().maxCoeff(), 1e-4);
		for (Eigen::Index i = 0; i < inputs[k].size(); ++i) {
			const double orig = inputs[k](i);
			inputs[k](i) = orig + h;
			Graph gp;
			std::vector<NodeId> lp;
			const double fp = gp.scalar(scalar(inputs, gp, lp));
			inputs[k](i) = orig - h;
			Graph gm;
			std::vector<NodeId> lm;
			const double fm = gm.scalar(scalar(inputs, gm, lm));
			inputs[k](i) = orig;
			const double fd = (fp - fm) / (2.0 * h);
			const double denom = std::max({std::abs(fd), std::abs(grad(i)), 1e-3 * scale});
			worst = std::max(worst, std::abs(fd - grad(i)) / denom);
		}
	}
	return worst;
}

MLPWeights random_net(const std::vector<int>& widths, std::uint64_t seed)
{
	auto w = make_mlp(widths, Activation::Elu, seed);
	std::mt19937_64 rng(seed * 7 + 1);
	for (auto& l : w.layers)
		l.b = random_mat(static_cast<int>(l.b.rows()), 1, rng, 0.3);
	return w;
}

} // namespace

TEST_CASE("mlp_apply examples")
{
	MLPWeights id;
	id.activation = Activation::Linear;
	id.layers.push_back({Mat::Identity(2, 2), Mat::Zero(2, 1)});
	const Vec x = Vec::LinSpaced(2, -1.5, 2.5);
	CHECK((mlp_apply(id, x) - x).norm() == 0.0);

	MLPWeights one;
	one.activate_last = true;
	one.layers.push_back({Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, -1.0)});
	CHECK(mlp_apply(one, Vec(Vec::Zero(1)))(0) == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-15));
	CHECK(mlp_apply(one, Vec(Vec::Zero(1)))(0) == doctest::Approx(-0.63212).epsilon(1e-5));

	const auto enc = make_mlp({4, 32, 32, 32, 2}, Activation::Elu, 3);
	CHECK(enc.layers.size() == 4);
	CHECK(mlp_apply(enc, Vec(Vec::Ones(4))).size() == 2);
	CHECK_THROWS_AS(mlp_apply(enc, Vec(Vec::Ones(3))), DimensionError);
}

TEST_CASE("elu and its derivatives")
{
	CHECK(elu(0.0) == 0.0);
	CHECK(elu(1.0) == 1.0);
	CHECK(elu(-1.0) == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-15));
	for (double x : {-2.0, -0.3, 0.4, 1.7}) {
		const double h = 1e-6;
		CHECK(elu_d(x) == doctest::Approx((elu(x + h) - elu(x - h)) / (2 * h)).epsilon(1e-8));
		CHECK(elu_dd(x) == doctest::Approx((elu_d(x + h) - elu_d(x - h)) / (2 * h)).epsilon(1e-6));
	}
}

TEST_CASE("reverse_grad closed forms")
{
	Graph g;
	const auto t = g.leaf(Mat::Constant(1, 1, 3.0));
	g.reverse_grad(g.sum_squares(t));
	CHECK(g.adjoint(t)(0, 0) == 6.0);

	std::mt19937_64 rng(11);
	const Mat A = random_mat(4, 3, rng);
	const Mat th = random_mat(3, 1, rng);
	const Mat b = random_mat(4, 1, rng);
	Graph h;
	const auto tn = h.leaf(th);
	h.reverse_grad(h.sum_squares(h.sub(h.matmul(h.constant(A), tn), h.constant(b))));
	const Mat expected = 2.0 * A.transpose() * (A * th - b);
	CHECK((h.adjoint(tn) - expected).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("reverse_grad agrees with finite differences for every primitive")
{
	ph::PhLayout layout{3, 2, 1e-6, false};
	ph::PhLayout frozen{3, 1, 1e-6, true};
	double worst = 0.0;
	for (std::uint64_t seed = 1; seed <= 100; ++seed) {
		std::mt19937_64 rng(seed);
		const Mat C = random_mat(3, 4, rng);
		worst = std::max(worst, max_grad_error([](Graph& g, const auto& l) { return g.matmul(l[0], l[1]); },
		                                       {random_mat(3, 2, rng), random_mat(2, 4, rng)}));
		worst = std::max(worst, max_grad_error([](Graph& g, const auto& l) { return g.add(l[0], l[1]); },
		                                       {random_mat(2, 3, rng), random_mat(2, 3, rng)}));
		worst = std::max(worst, max_grad_error([](Graph& g, const auto& l) { return g.sub(l[0], l[1]); },
		                                       {random_mat(2, 3, rng), random_mat(2, 3, rng)}));
		worst = std::max(worst, max_grad_error([](Graph& g, const auto& l) { return g.add_bias(l[0], l[1]); },
		                                       {random_mat(3, 4, rng), random_mat(3, 1, rng)}));
		worst = std::max(worst, max_grad_error([](Graph& g, const auto& l) { return g.scale(l[0], -1.7); },
		                                       {random_mat(2, 2, rng)}));
		worst = std::max(worst, max_grad_error([](Graph& g, const auto& l) { return g.hadamard(l[0], l[1]); },
		                                       {random_mat(3, 2, rng), random_mat(3, 2, rng)}));
		worst = std::max(worst, max_grad_error([&](Graph& g, const auto& l) {
			                 return g.hadamard(g.elu(l[0]), g.constant(C));
		                 },
		                                       {random_mat(3, 4, rng)}));
		worst = std::max(worst, max_grad_error([&](Graph& g, const auto& l) {
			                 return g.hadamard(g.elu_d(l[0]), g.constant(C));
		                 },
		                                       {random_mat(3, 4, rng)}));
		worst = std::max(worst, max_grad_error([&](Graph& g, const auto& l) {
			                 return g.hadamard(g.elu_dd(l[0]), g.constant(C));
		                 },
		                                       {random_mat(3, 4, rng)}));
		worst = std::max(worst, max_grad_error([&](Graph& g, const auto& l) {
			                 return g.matmul(g.transpose(l[0]), g.constant(C));
		                 },
		                                       {random_mat(3, 2, rng)}));
		worst = std::max(worst, max_grad_error([](Graph& g, const auto& l) { return g.abs_sum(l[0]); },
		                                       {random_mat(4, 2, rng)}));
		worst = std::max(worst, max_grad_error([&](Graph& g, const auto& l) {
			                 return g.matmul(g.triangular(l[0], 3, false), g.constant(C));
		                 },
		                                       {random_mat(6, 1, rng)}));
		worst = std::max(worst, max_grad_error([&](Graph& g, const auto& l) {
			                 return g.matmul(g.triangular(l[0], 3, true), g.constant(C));
		                 },
		                                       {random_mat(3, 1, rng)}));
		worst = std::max(worst, max_grad_error([&](Graph& g, const auto& l) {
			                 return g.matmul(g.reshape_row_major(l[0], 3, 2), g.constant(C.topRows(2)));
		                 },
		                                       {random_mat(6, 1, rng)}));
		worst = std::max(worst, max_grad_error([&](Graph& g, const auto& l) {
			                 return g.matmul(g.add_scaled_identity(l[0], 0.3), g.constant(C));
		                 },
		                                       {random_mat(3, 3, rng)}));
		worst = std::max(worst, max_grad_error([&](Graph& g, const auto& l) { return g.ph_rhs(l[0], l[1], l[2], layout); },
		                                       {random_mat(layout.total(), 1, rng), random_mat(3, 4, rng),
		                                        random_mat(2, 4, rng)}));
		worst = std::max(worst, max_grad_error([&](Graph& g, const auto& l) { return g.ph_rhs(l[0], l[1], l[2], layout); },
		                                       {random_mat(layout.total(), 4, rng), random_mat(3, 4, rng),
		                                        random_mat(2, 4, rng)}));
		worst = std::max(worst, max_grad_error([&](Graph& g, const auto& l) { return g.ph_rhs(l[0], l[1], l[2], frozen); },
		                                       {random_mat(frozen.total(), 1, rng), random_mat(3, 2, rng),
		                                        random_mat(1, 2, rng)}));
	}
	CHECK(worst <= 1e-5);
}

TEST_CASE("abs_sum uses sign(0) = 0")
{
	Graph g;
	Mat v(3, 1);
	v << -2.0, 0.0, 5.0;
	const auto n = g.leaf(v);
	g.reverse_grad(g.abs_sum(n));
	CHECK(g.adjoint(n)(0) == -1.0);
	CHECK(g.adjoint(n)(1) == 0.0);
	CHECK(g.adjoint(n)(2) == 1.0);
}

TEST_CASE("jvp examples and finite-difference oracle")
{
	MLPWeights lin;
	lin.activation = Activation::Linear;
	std::mt19937_64 rng(5);
	const Mat W = random_mat(3, 2, rng);
	lin.layers.push_back({W, random_mat(3, 1, rng)});
	const Vec v = random_mat(2, 1, rng);
	CHECK((jvp(lin, Vec(random_mat(2, 1, rng)), v) - W * v).norm() < 1e-14);

	for (std::uint64_t seed = 1; seed <= 20; ++seed) {
		const auto net = random_net({3, 8, 8, 2}, seed);
		std::mt19937_64 r(seed);
		const Vec x = random_mat(3, 1, r);
		const Vec t = random_mat(3, 1, r);
		const double h = 1e-5;
		const Vec fd = (mlp_apply(net, Vec(x + h * t)) - mlp_apply(net, Vec(x - h * t))) / (2 * h);
		CHECK((jvp(net, x, t) - fd).norm() < 1e-6);
		CHECK(jvp(net, x, Vec::Zero(3)).norm() == 0.0);
	}
}

TEST_CASE("jvp equals the reverse-mode Jacobian times v")
{
	for (std::uint64_t seed = 1; seed <= 10; ++seed) {
		const auto net = random_net({4, 16, 8}, seed);
		std::mt19937_64 rng(seed + 100);
		const Vec x = random_mat(4, 1, rng);
		const Vec v = random_mat(4, 1, rng);
		Mat Jrev(8, 4);
		for (int row = 0; row < 8; ++row) {
			Graph g;
			const auto xn = g.leaf(x);
			const auto y = mlp_forward(g, bind_constants(g, net), xn);
			Mat sel = Mat::Zero(1, 8);
			sel(0, row) = 1.0;
			const auto s = g.matmul(g.constant(sel), y);
			g.reverse_grad(s);
			Jrev.row(row) = g.adjoint(xn).transpose();
		}
		const Vec expected = Jrev * v;
		CHECK((jvp(net, x, v) - expected).norm() <= 1e-10 * std::max(1.0, expected.norm()));
	}
}

TEST_CASE("reverse mode through a jvp matches finite differences")
{
	for (std::uint64_t seed = 1; seed <= 10; ++seed) {
		auto net = random_net({2, 6, 6, 3}, seed);
		std::mt19937_64 rng(seed + 9);
		const Mat X = random_mat(2, 4, rng);
		const Mat V = random_mat(2, 4, rng);
		std::vector<Mat> inputs;
		for (const auto& l : net.layers) {
			inputs.push_back(l.W);
			inputs.push_back(l.b);
		}
		const auto err = max_grad_error(
		    [&](Graph& g, const std::vector<NodeId>& l) {
			    MlpNodes nodes;
			    for (std::size_t k = 0; k < l.size(); k += 2) {
				    nodes.W.push_back(l[k]);
				    nodes.b.push_back(l[k + 1]);
			    }
			    return mlp_jvp(g, nodes, g.constant(X), g.constant(V)).dy;
		    },
		    inputs);
		CHECK(err <= 1e-4);
	}
}

TEST_CASE("graph evaluation is deterministic")
{
	const auto net = random_net({4, 32, 32, 2}, 8);
	std::mt19937_64 rng(1);
	const Mat X = random_mat(4, 50, rng);
	Graph a, b;
	const auto ya = mlp_forward(a, bind_constants(a, net), a.constant(X));
	const auto yb = mlp_forward(b, bind_constants(b, net), b.constant(X));
	CHECK((a.value(ya).array() == b.value(yb).array()).all());
	CHECK((a.value(ya) - mlp_apply(net, X)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam_step")
{
	Mat w = Mat::Constant(2, 1, 0.5);
	std::vector<NamedParam> params{{"w", &w}};
	AdamState s;
	std::vector<Mat> zero{Mat::Zero(2, 1)};
	adam_step(params, zero, s);
	CHECK(s.step == 1);
	CHECK(w(0) == 0.5);

	Mat u = Mat::Zero(2, 1);
	std::vector<NamedParam> pu{{"u", &u}};
	AdamState su;
	Mat g(2, 1);
	g << 3.0, -0.02;
	adam_step(pu, std::vector<Mat>{g}, su);
	// m_hat = g, v_hat = g^2 after bias correction
	CHECK(u(0) == doctest::Approx(-su.lr * 3.0 / (3.0 + su.eps)).epsilon(1e-12));
	CHECK(u(1) == doctest::Approx(su.lr * 0.02 / (0.02 + su.eps)).epsilon(1e-12));

	Mat th = Mat::Zero(1, 1);
	std::vector<NamedParam> pt{{"theta", &th}};
	AdamState st;
	st.lr = 0.05;
	for (int k = 0; k < 200; ++k)
		adam_step(pt, std::vector<Mat>{Mat::Constant(1, 1, 2.0 * (th(0) - 2.0))}, st);
	CHECK(std::abs(th(0) - 2.0) < 0.1);

	Mat bad(1, 1);
	bad(0) = std::nan("");
	const double before = th(0);
	CHECK_THROWS_AS(adam_step(pt, std::vector<Mat>{bad}, st), NumericalError);
	CHECK(th(0) == before);
}
