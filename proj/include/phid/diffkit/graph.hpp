#pragma once

#include "phid/ph/ph_system.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace phid::diffkit {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct NodeId {
	std::size_t index = 0;
};

enum class Op {
	Leaf,
	Constant,
	MatMul,
	Add,
	Sub,
	AddBias,
	Scale,
	Hadamard,
	Elu,
	EluD,
	EluDD,
	Transpose,
	SumSquares,
	AbsSum,
	Triangular,
	ReshapeRowMajor,
	AddScaledIdentity,
	PhRhs,
};

/// Eager, append-only computation graph over dense matrices. Every op
/// evaluates immediately; `reverse_grad` then walks the tape backwards.
/// Scalars are 1x1 matrices. Samples of a batch are stored as columns.
class Graph {
public:
	NodeId leaf(Mat value);
	NodeId constant(Mat value);

	NodeId matmul(NodeId a, NodeId b);
	NodeId add(NodeId a, NodeId b);
	NodeId sub(NodeId a, NodeId b);
	/// a (m x n) plus column vector b (m x 1) broadcast over the columns.
	NodeId add_bias(NodeId a, NodeId b);
	NodeId scale(NodeId a, double factor);
	NodeId hadamard(NodeId a, NodeId b);
	NodeId elu(NodeId a);
	NodeId elu_d(NodeId a);
	NodeId elu_dd(NodeId a);
	NodeId transpose(NodeId a);
	/// Sum of squared entries, 1x1.
	NodeId sum_squares(NodeId a);
	/// Sum of absolute values, 1x1, with sign(0) = 0 in the backward pass.
	NodeId abs_sum(NodeId a);
	/// Column vector theta -> r x r (strict) lower triangular, row-major fill.
	NodeId triangular(NodeId theta, int r, bool strict);
	/// Column vector -> rows x cols, row-major.
	NodeId reshape_row_major(NodeId theta, int rows, int cols);
	NodeId add_scaled_identity(NodeId a, double eps);
	/// Batched pH right-hand side. Column i of the result is
	/// (J_i - R_i) Q_i z_i + B_i u_i where the matrices are built from column
	/// i of `theta` (or its only column, shared by the whole batch).
	NodeId ph_rhs(NodeId theta, NodeId z, NodeId u, const ph::PhLayout& layout);

	const Mat& value(NodeId n) const { return nodes_.at(n.index).value; }
	double scalar(NodeId n) const;
	/// Adjoint of a node after `reverse_grad`; zero matrix if unreached.
	Mat adjoint(NodeId n) const;

	/// Seeds d(out)/d(out) = 1 and accumulates adjoints of every node
	/// recorded before `out`. `out` must be 1x1.
	void reverse_grad(NodeId out);

	std::size_t size() const { return nodes_.size(); }
	Op op(NodeId n) const { return nodes_.at(n.index).op; }
	const std::vector<std::size_t>& parents(NodeId n) const { return nodes_.at(n.index).parents; }

private:
	struct Node {
		Op op = Op::Constant;
		std::vector<std::size_t> parents;
		Mat value;
		Mat adjoint;
		bool needs_grad = false;
		bool has_adjoint = false;
		int iarg0 = 0;
		int iarg1 = 0;
		double darg = 0.0;
		ph::PhLayout layout;
	};

	NodeId push(Node node);
	void accumulate(std::size_t index, const Mat& contribution);
	void backward(const Node& node);
	void ph_rhs_backward(const Node& node);
	const Node& node(std::size_t i) const { return nodes_[i]; }

	std::vector<Node> nodes_;
};

double elu(double x);
double elu_d(double x);
double elu_dd(double x);

} // namespace phid::diffkit
