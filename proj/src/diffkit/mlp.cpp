#include "phid/diffkit/mlp.hpp"

#include "phid/errors.hpp"

#include <cmath>
#include <random>

namespace phid::diffkit {

std::string to_string(Activation a)
{
	return a == Activation::Elu ? "elu" : "linear";
}

Activation activation_from_string(const std::string& s)
{
	if (s == "elu")
		return Activation::Elu;
	if (s == "linear")
		return Activation::Linear;
	throw ConfigError("unknown activation '" + s + "' (expected elu or linear)");
}

int MLPWeights::input_width() const
{
	return layers.empty() ? 0 : static_cast<int>(layers.front().W.cols());
}

int MLPWeights::output_width() const
{
	return layers.empty() ? 0 : static_cast<int>(layers.back().W.rows());
}

std::size_t MLPWeights::parameter_count() const
{
	std::size_t n = 0;
	for (const auto& l : layers)
		n += l.W.size() + l.b.size();
	return n;
}

void MLPWeights::validate() const
{
	if (layers.empty())
		throw DimensionError("MLP has no layers");
	for (std::size_t k = 0; k < layers.size(); ++k) {
		const auto& l = layers[k];
		if (l.b.rows() != l.W.rows() || l.b.cols() != 1)
			throw DimensionError("MLP layer " + std::to_string(k) + ": bias does not match W rows");
		if (k > 0 && l.W.cols() != layers[k - 1].W.rows())
			throw DimensionError("MLP layer " + std::to_string(k) + ": input width " +
			                     std::to_string(l.W.cols()) + " != previous output width " +
			                     std::to_string(layers[k - 1].W.rows()));
	}
}

MLPWeights make_mlp(const std::vector<int>& widths, Activation act, std::uint64_t seed)
{
	if (widths.size() < 2)
		throw ConfigError("make_mlp: need at least input and output widths");
	std::mt19937_64 rng(seed);
	MLPWeights w;
	w.activation = act;
	for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
		const int in = widths[k];
		const int out = widths[k + 1];
		if (in <= 0 || out <= 0)
			throw ConfigError("make_mlp: layer widths must be positive");
		const double limit = std::sqrt(6.0 / (in + out));
		std::uniform_real_distribution<double> dist(-limit, limit);
		DenseLayer l;
		l.W.resize(out, in);
		for (int i = 0; i < out; ++i)
			for (int j = 0; j < in; ++j)
				l.W(i, j) = dist(rng);
		l.b = Mat::Zero(out, 1);
		w.layers.push_back(std::move(l));
	}
	return w;
}

namespace {

bool activates(const MLPWeights& w, std::size_t k)
{
	if (w.activation == Activation::Linear)
		return false;
	return k + 1 < w.layers.size() || w.activate_last;
}

void check_input(const MLPWeights& w, Eigen::Index rows)
{
	w.validate();
	if (rows != w.input_width())
		throw DimensionError("MLP input has " + std::to_string(rows) + " rows, expected " +
		                     std::to_string(w.input_width()));
}

} // namespace

Mat mlp_apply(const MLPWeights& w, const Mat& x)
{
	check_input(w, x.rows());
	Mat a = x;
	for (std::size_t k = 0; k < w.layers.size(); ++k) {
		Mat h = w.layers[k].W * a;
		h.colwise() += w.layers[k].b.col(0);
		if (activates(w, k))
			h = h.unaryExpr([](double v) { return elu(v); });
		a = std::move(h);
	}
	return a;
}

Vec mlp_apply(const MLPWeights& w, const Vec& x)
{
	return mlp_apply(w, Mat(x)).col(0);
}

Mat jvp(const MLPWeights& w, const Mat& x, const Mat& v)
{
	check_input(w, x.rows());
	if (v.rows() != x.rows() || v.cols() != x.cols())
		throw DimensionError("jvp: tangent shape does not match input shape");
	Mat a = x;
	Mat da = v;
	for (std::size_t k = 0; k < w.layers.size(); ++k) {
		Mat h = w.layers[k].W * a;
		h.colwise() += w.layers[k].b.col(0);
		Mat dh = w.layers[k].W * da;
		if (activates(w, k)) {
			da = h.unaryExpr([](double s) { return elu_d(s); }).cwiseProduct(dh);
			a = h.unaryExpr([](double s) { return elu(s); });
		} else {
			da = std::move(dh);
			a = std::move(h);
		}
	}
	return da;
}

Vec jvp(const MLPWeights& w, const Vec& x, const Vec& v)
{
	return jvp(w, Mat(x), Mat(v)).col(0);
}

Mat jacobian(const MLPWeights& w, const Vec& x)
{
	const Eigen::Index n = x.size();
	// One tangent column per basis direction, evaluated as a batch.
	const Mat X = x.replicate(1, n);
	return jvp(w, X, Mat::Identity(n, n));
}

std::vector<NodeId> MlpNodes::leaves() const
{
	std::vector<NodeId> out;
	for (std::size_t k = 0; k < W.size(); ++k) {
		out.push_back(W[k]);
		out.push_back(b[k]);
	}
	return out;
}

void append_parameters(MLPWeights& w, const std::string& prefix, std::vector<NamedParam>& out)
{
	for (std::size_t k = 0; k < w.layers.size(); ++k) {
		out.push_back({prefix + ".W" + std::to_string(k), &w.layers[k].W});
		out.push_back({prefix + ".b" + std::to_string(k), &w.layers[k].b});
	}
}

MlpNodes bind_leaves(Graph& g, const MLPWeights& w)
{
	w.validate();
	MlpNodes n;
	n.activation = w.activation;
	n.activate_last = w.activate_last;
	for (const auto& l : w.layers) {
		n.W.push_back(g.leaf(l.W));
		n.b.push_back(g.leaf(l.b));
	}
	return n;
}

MlpNodes bind_constants(Graph& g, const MLPWeights& w)
{
	w.validate();
	MlpNodes n;
	n.activation = w.activation;
	n.activate_last = w.activate_last;
	for (const auto& l : w.layers) {
		n.W.push_back(g.constant(l.W));
		n.b.push_back(g.constant(l.b));
	}
	return n;
}

namespace {

bool activates(const MlpNodes& net, std::size_t k)
{
	if (net.activation == Activation::Linear)
		return false;
	return k + 1 < net.W.size() || net.activate_last;
}

} // namespace

NodeId mlp_forward(Graph& g, const MlpNodes& net, NodeId x)
{
	NodeId a = x;
	for (std::size_t k = 0; k < net.W.size(); ++k) {
		NodeId h = g.add_bias(g.matmul(net.W[k], a), net.b[k]);
		a = activates(net, k) ? g.elu(h) : h;
	}
	return a;
}

JvpNodes mlp_jvp(Graph& g, const MlpNodes& net, NodeId x, NodeId v)
{
	NodeId a = x;
	NodeId da = v;
	for (std::size_t k = 0; k < net.W.size(); ++k) {
		NodeId h = g.add_bias(g.matmul(net.W[k], a), net.b[k]);
		NodeId dh = g.matmul(net.W[k], da);
		if (activates(net, k)) {
			da = g.hadamard(g.elu_d(h), dh);
			a = g.elu(h);
		} else {
			da = dh;
			a = h;
		}
	}
	return {a, da};
}

} // namespace phid::diffkit
