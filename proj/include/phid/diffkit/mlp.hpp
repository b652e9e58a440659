#pragma once

#include "phid/diffkit/adam.hpp"
#include "phid/diffkit/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace phid::diffkit {

enum class Activation { Elu, Linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
	Mat W; // out x in
	Mat b; // out x 1
};

/// Fully connected network. Hidden layers apply `activation`; the last layer
/// is linear unless `activate_last` is set.
struct MLPWeights {
	std::vector<DenseLayer> layers;
	Activation activation = Activation::Elu;
	bool activate_last = false;

	int input_width() const;
	int output_width() const;
	std::size_t parameter_count() const;
	/// Throws DimensionError if consecutive layer widths do not chain.
	void validate() const;
};

/// Glorot-uniform weight matrices and zero biases. `widths` lists every
/// layer width including input and output, e.g. {4, 32, 32, 32, 2}.
MLPWeights make_mlp(const std::vector<int>& widths, Activation act, std::uint64_t seed);

Mat mlp_apply(const MLPWeights& w, const Mat& x);
Vec mlp_apply(const MLPWeights& w, const Vec& x);

/// D_x mlp(x) * v via layerwise tangent propagation.
Mat jvp(const MLPWeights& w, const Mat& x, const Mat& v);
Vec jvp(const MLPWeights& w, const Vec& x, const Vec& v);

/// Full Jacobian (out x in) from one tangent sweep per input direction.
Mat jacobian(const MLPWeights& w, const Vec& x);

/// Layer weights recorded as graph nodes.
struct MlpNodes {
	std::vector<NodeId> W;
	std::vector<NodeId> b;
	Activation activation = Activation::Elu;
	bool activate_last = false;

	/// W0, b0, W1, b1, ... matching append_parameters().
	std::vector<NodeId> leaves() const;
};

/// Appends "<prefix>.W<k>" / "<prefix>.b<k>" segments for every layer.
void append_parameters(MLPWeights& w, const std::string& prefix, std::vector<NamedParam>& out);

MlpNodes bind_leaves(Graph& g, const MLPWeights& w);
MlpNodes bind_constants(Graph& g, const MLPWeights& w);

NodeId mlp_forward(Graph& g, const MlpNodes& net, NodeId x);

struct JvpNodes {
	NodeId y;
	NodeId dy;
};

/// Forward value and tangent D_x mlp(x) * v, both built from graph
/// primitives so the tangent stays differentiable with respect to weights.
JvpNodes mlp_jvp(Graph& g, const MlpNodes& net, NodeId x, NodeId v);

} // namespace phid::diffkit
