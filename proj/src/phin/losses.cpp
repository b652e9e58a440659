#include "phid/phin/losses.hpp"

#include "phid/errors.hpp"

#include <cmath>

namespace phid::phin {

void LossWeights::validate() const
{
	for (double v : {rec, ph, con, l1})
		if (!std::isfinite(v) || v < 0.0)
			throw ConfigError("loss factors must be finite and non-negative");
}

void Batch::validate(int N, int n_p, int n_mu) const
{
	const auto b = X.cols();
	if (X.rows() != N || Xdot.rows() != N || Xdot.cols() != b)
		throw DimensionError("batch states must be " + std::to_string(N) + " x " + std::to_string(b));
	if (U.rows() != n_p || U.cols() != b)
		throw DimensionError("batch inputs must be " + std::to_string(n_p) + " x " + std::to_string(b));
	if (n_mu > 0 && (Mu.rows() != n_mu || Mu.cols() != b))
		throw DimensionError("batch parameters must be " + std::to_string(n_mu) + " x " +
		                     std::to_string(b));
	if (b < 1)
		throw DimensionError("empty batch");
}

LossGraph build_loss(diffkit::Graph& g, const ae::Autoencoder& ae, const PhinModel& model,
                     const Batch& batch, const LossWeights& lambda, bool trainable)
{
	lambda.validate();
	batch.validate(ae.N, model.layout.n_p, model.n_mu());
	if (ae.r != model.layout.r)
		throw DimensionError("autoencoder latent dimension " + std::to_string(ae.r) +
		                     " != pH dimension " + std::to_string(model.layout.r));
	const double inv_b = 1.0 / static_cast<double>(batch.size());

	LossGraph out;
	const auto ae_nodes = ae::bind(g, ae, trainable);
	const auto ph_nodes = bind(g, model, trainable);
	if (trainable) {
		out.leaves = ae::trainable_leaves(ae_nodes);
		out.leaves.insert(out.leaves.end(), ph_nodes.leaves.begin(), ph_nodes.leaves.end());
	}

	const auto X = g.constant(batch.X);
	const auto Xdot = g.constant(batch.Xdot);
	const auto U = g.constant(batch.U);
	const auto Mu = g.constant(model.parametric() ? batch.Mu : Mat(0, batch.size()));

	const auto zj = ae::encode_jvp(g, ae, ae_nodes, X, Xdot);
	const auto theta = theta_node(g, model, ph_nodes, Mu);
	const auto F = g.ph_rhs(theta, zj.y, U, model.layout);

	std::vector<diffkit::NodeId> terms;
	if (lambda.ph > 0.0) {
		const auto l = g.scale(g.sum_squares(g.sub(zj.dy, F)), inv_b);
		out.values.ph = g.scalar(l);
		terms.push_back(g.scale(l, lambda.ph));
	}
	if (lambda.rec > 0.0) {
		const auto l = g.scale(g.sum_squares(g.sub(X, ae::decode(g, ae, ae_nodes, zj.y))), inv_b);
		out.values.rec = g.scalar(l);
		terms.push_back(g.scale(l, lambda.rec));
	}
	if (lambda.con > 0.0) {
		const auto dj = ae::decode_jvp(g, ae, ae_nodes, zj.y, F);
		const auto l = g.scale(g.sum_squares(g.sub(Xdot, dj.dy)), inv_b);
		out.values.con = g.scalar(l);
		terms.push_back(g.scale(l, lambda.con));
	}
	if (lambda.l1 > 0.0) {
		std::vector<diffkit::NodeId> reg;
		if (model.parametric()) {
			for (std::size_t k = 0; k < ph_nodes.hyper.W.size(); ++k) {
				reg.push_back(g.abs_sum(ph_nodes.hyper.W[k]));
				reg.push_back(g.abs_sum(ph_nodes.hyper.b[k]));
			}
		} else {
			reg.push_back(g.abs_sum(*ph_nodes.theta));
		}
		auto l = reg.front();
		for (std::size_t k = 1; k < reg.size(); ++k)
			l = g.add(l, reg[k]);
		out.values.l1 = g.scalar(l);
		terms.push_back(g.scale(l, lambda.l1));
	}

	if (terms.empty()) {
		out.total = g.constant(Mat::Zero(1, 1));
	} else {
		out.total = terms.front();
		for (std::size_t k = 1; k < terms.size(); ++k)
			out.total = g.add(out.total, terms[k]);
	}
	out.values.total = g.scalar(out.total);
	return out;
}

LossValues evaluate_loss(const ae::Autoencoder& ae, const PhinModel& model, const Batch& batch,
                         const LossWeights& lambda)
{
	diffkit::Graph g;
	return build_loss(g, ae, model, batch, lambda, false).values;
}

LossGradient loss_gradient(const ae::Autoencoder& ae, const PhinModel& model, const Batch& batch,
                           const LossWeights& lambda)
{
	diffkit::Graph g;
	const auto lg = build_loss(g, ae, model, batch, lambda, true);
	if (!std::isfinite(lg.values.total))
		throw NumericalError("loss is not finite");
	g.reverse_grad(lg.total);
	LossGradient out;
	out.values = lg.values;
	for (const auto leaf : lg.leaves) {
		auto a = g.adjoint(leaf);
		if (a.size() == 0)
			a = Mat::Zero(g.value(leaf).rows(), g.value(leaf).cols());
		out.grads.push_back(std::move(a));
	}
	return out;
}

double loss_ph(const PhinModel& model, const Mat& Z, const Mat& Zdot, const Mat& U, const Mat& Mu)
{
	if (Z.rows() != model.layout.r || Zdot.rows() != Z.rows() || Zdot.cols() != Z.cols() ||
	    U.rows() != model.layout.n_p || U.cols() != Z.cols())
		throw DimensionError("loss_ph: inconsistent batch shapes");
	if (Z.cols() == 0)
		throw DimensionError("loss_ph: empty batch");
	double sum = 0.0;
	for (Eigen::Index i = 0; i < Z.cols(); ++i) {
		const Vec mu = model.parametric() ? Vec(Mu.col(i)) : Vec();
		const Vec f = phin_rhs(model, Z.col(i), U.col(i), mu);
		sum += (Zdot.col(i) - f).squaredNorm();
	}
	return sum / static_cast<double>(Z.cols());
}

double loss_rec(const ae::Autoencoder& ae, const Mat& X)
{
	if (X.cols() == 0)
		throw DimensionError("loss_rec: empty batch");
	return (X - ae.decode(ae.encode(X))).colwise().squaredNorm().mean();
}

double loss_con(const ae::Autoencoder& ae, const PhinModel& model, const Mat& X, const Mat& Xdot,
                const Mat& U, const Mat& Mu)
{
	if (X.cols() == 0 || Xdot.cols() != X.cols() || U.cols() != X.cols())
		throw DimensionError("loss_con: inconsistent batch shapes");
	const Mat Z = ae.encode(X);
	double sum = 0.0;
	for (Eigen::Index i = 0; i < X.cols(); ++i) {
		const Vec mu = model.parametric() ? Vec(Mu.col(i)) : Vec();
		const Vec f = phin_rhs(model, Z.col(i), U.col(i), mu);
		const Vec dx = ae.decode_jvp(Vec(Z.col(i)), f);
		if (!dx.allFinite())
			throw NumericalError("loss_con: non-finite decoder JVP");
		sum += (Xdot.col(i) - dx).squaredNorm();
	}
	return sum / static_cast<double>(X.cols());
}

double loss_total(const LossValues& parts, const LossWeights& lambda)
{
	return lambda.rec * parts.rec + lambda.ph * parts.ph + lambda.con * parts.con + lambda.l1 * parts.l1;
}

} // namespace phid::phin
