#include "phid/phin/phin.hpp"

#include "phid/errors.hpp"

#include <random>

namespace phid::phin {

void PhinModel::validate() const
{
	if (layout.r < 1 || layout.n_p < 0)
		throw ConfigError("pHIN: r must be >= 1 and n_p >= 0");
	if (layout.eps < 0.0)
		throw ConfigError("pHIN: eps must be non-negative");
	if (hyper) {
		hyper->mlp.validate();
		if (hyper->mlp.input_width() != hyper->n_mu)
			throw DimensionError("hypernetwork input width " + std::to_string(hyper->mlp.input_width()) +
			                     " != n_mu " + std::to_string(hyper->n_mu));
		if (hyper->mlp.output_width() != layout.total())
			throw DimensionError("hypernetwork output width " + std::to_string(hyper->mlp.output_width()) +
			                     " != pH weight count " + std::to_string(layout.total()));
	} else if (theta.rows() != layout.total() || theta.cols() != 1) {
		throw DimensionError("pHIN weight vector has " + std::to_string(theta.size()) +
		                     " entries, expected " + std::to_string(layout.total()));
	}
}

Vec PhinModel::theta_for(const Vec& mu) const
{
	if (!hyper)
		return theta.col(0);
	if (mu.size() != hyper->n_mu)
		throw DimensionError("parameter vector has " + std::to_string(mu.size()) +
		                     " entries, expected " + std::to_string(hyper->n_mu));
	return diffkit::mlp_apply(hyper->mlp, mu);
}

ph::PHSystem PhinModel::system(const Vec& mu) const
{
	const Vec th = theta_for(mu);
	return ph::build_ph_matrices(layout, std::span<const double>(th.data(), th.size()));
}

PhinModel make_phin(const ph::PhLayout& layout, std::uint64_t seed, double init_scale)
{
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> dist(-init_scale, init_scale);
	PhinModel m;
	m.layout = layout;
	m.theta.resize(layout.total(), 1);
	for (Eigen::Index i = 0; i < m.theta.rows(); ++i)
		m.theta(i, 0) = dist(rng);
	m.validate();
	return m;
}

PhinModel make_parametric(const ph::PhLayout& layout, int n_mu, const std::vector<int>& hidden,
                          std::uint64_t seed)
{
	if (n_mu < 1)
		throw ConfigError("parametric pHIN needs at least one parameter");
	std::vector<int> widths{n_mu};
	widths.insert(widths.end(), hidden.begin(), hidden.end());
	widths.push_back(layout.total());
	PhinModel m;
	m.layout = layout;
	m.hyper = HyperNetwork{diffkit::make_mlp(widths, diffkit::Activation::Elu, seed), n_mu};
	m.validate();
	return m;
}

Vec phin_rhs(const PhinModel& model, const Vec& z, const Vec& u, const Vec& mu)
{
	if (z.size() != model.layout.r || u.size() != model.layout.n_p)
		throw DimensionError("phin_rhs: expected |z| = " + std::to_string(model.layout.r) +
		                     " and |u| = " + std::to_string(model.layout.n_p));
	return model.system(mu).rhs(z, u);
}

PhinModel hypernet_materialize(const PhinModel& model, const Vec& mu)
{
	PhinModel out;
	out.layout = model.layout;
	out.theta = model.theta_for(mu);
	return out;
}

std::vector<diffkit::NamedParam> trainable_parameters(PhinModel& model)
{
	std::vector<diffkit::NamedParam> out;
	if (model.hyper)
		diffkit::append_parameters(model.hyper->mlp, "hypernet", out);
	else
		out.push_back({"theta_pH", &model.theta});
	return out;
}

PhinNodes bind(diffkit::Graph& g, const PhinModel& model, bool trainable)
{
	PhinNodes n;
	if (model.hyper) {
		n.hyper = trainable ? diffkit::bind_leaves(g, model.hyper->mlp)
		                    : diffkit::bind_constants(g, model.hyper->mlp);
		if (trainable)
			n.leaves = n.hyper.leaves();
	} else {
		n.theta = trainable ? g.leaf(model.theta) : g.constant(model.theta);
		if (trainable)
			n.leaves.push_back(*n.theta);
	}
	return n;
}

diffkit::NodeId theta_node(diffkit::Graph& g, const PhinModel& model, const PhinNodes& nodes,
                           diffkit::NodeId Mu)
{
	if (!model.hyper)
		return *nodes.theta;
	return diffkit::mlp_forward(g, nodes.hyper, Mu);
}

} // namespace phid::phin
