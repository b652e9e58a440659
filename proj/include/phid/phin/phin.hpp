#pragma once

#include "phid/diffkit/adam.hpp"
#include "phid/diffkit/graph.hpp"
#include "phid/diffkit/mlp.hpp"
#include "phid/ph/ph_system.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace phid::phin {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Maps a parameter vector mu to the flat pH weight vector.
struct HyperNetwork {
	diffkit::MLPWeights mlp;
	int n_mu = 0;
};

/// pHIN layer. Non-parametric models own theta directly; parametric ones
/// produce theta(mu) through the hypernetwork.
struct PhinModel {
	ph::PhLayout layout;
	Mat theta; // layout.total() x 1, unused when parametric
	std::optional<HyperNetwork> hyper;

	bool parametric() const { return hyper.has_value(); }
	int n_mu() const { return hyper ? hyper->n_mu : 0; }
	void validate() const;

	/// Flat weights for one parameter vector (mu ignored if non-parametric).
	Vec theta_for(const Vec& mu) const;
	ph::PHSystem system(const Vec& mu = Vec()) const;
};

/// Non-parametric model with theta drawn uniformly from [-scale, scale].
PhinModel make_phin(const ph::PhLayout& layout, std::uint64_t seed, double init_scale = 0.1);
/// Parametric model; `hidden` lists the hypernetwork hidden widths.
PhinModel make_parametric(const ph::PhLayout& layout, int n_mu, const std::vector<int>& hidden,
                          std::uint64_t seed);

/// (J - R) Q z + B u for the system materialized at mu.
Vec phin_rhs(const PhinModel& model, const Vec& z, const Vec& u, const Vec& mu = Vec());

/// Non-parametric snapshot of the model at mu.
PhinModel hypernet_materialize(const PhinModel& model, const Vec& mu);

/// Trainable segments: "theta_pH" or "hypernet.W<k>"/"hypernet.b<k>".
std::vector<diffkit::NamedParam> trainable_parameters(PhinModel& model);

struct PhinNodes {
	std::vector<diffkit::NodeId> leaves; // same order as trainable_parameters
	std::optional<diffkit::NodeId> theta;
	diffkit::MlpNodes hyper;
};

PhinNodes bind(diffkit::Graph& g, const PhinModel& model, bool trainable);
/// Weight node for a batch: one shared column, or one column per sample.
diffkit::NodeId theta_node(diffkit::Graph& g, const PhinModel& model, const PhinNodes& nodes,
                           diffkit::NodeId Mu);

} // namespace phid::phin
