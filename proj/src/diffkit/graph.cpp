#include "phid/diffkit/graph.hpp"

#include "phid/errors.hpp"

#include <cmath>
#include <string>

namespace phid::diffkit {

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
// Right-limit convention at the kink: elu'(0) = 1, elu''(0) = 0.
double elu_d(double x) { return x >= 0.0 ? 1.0 : std::exp(x); }
double elu_dd(double x) { return x >= 0.0 ? 0.0 : std::exp(x); }

namespace {

void require(bool ok, const char* op, const std::string& what)
{
	if (!ok)
		throw DimensionError(std::string(op) + ": " + what);
}

std::string shape(const Mat& m)
{
	return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Triangular factors and port matrix unpacked from one pH weight column.
struct PhFactors {
	Mat tJ, tR, tQ;
	Mat J, R, Q, B;
};

PhFactors unpack(const ph::PhLayout& L, const Eigen::Ref<const Vec>& theta)
{
	const int r = L.r;
	PhFactors f;
	f.tJ = Mat::Zero(r, r);
	f.tR = Mat::Zero(r, r);
	int k = L.j_offset();
	for (int i = 0; i < r; ++i)
		for (int j = 0; j < i; ++j)
			f.tJ(i, j) = theta[k++];
	k = L.r_offset();
	for (int i = 0; i < r; ++i)
		for (int j = 0; j <= i; ++j)
			f.tR(i, j) = theta[k++];
	if (L.frozen_Q) {
		f.Q = Mat::Identity(r, r);
	} else {
		f.tQ = Mat::Zero(r, r);
		k = L.q_offset();
		for (int i = 0; i < r; ++i)
			for (int j = 0; j <= i; ++j)
				f.tQ(i, j) = theta[k++];
		f.Q = f.tQ * f.tQ.transpose() + L.eps * Mat::Identity(r, r);
	}
	f.B.resize(r, L.n_p);
	k = L.b_offset();
	for (int i = 0; i < r; ++i)
		for (int j = 0; j < L.n_p; ++j)
			f.B(i, j) = theta[k++];
	f.J = f.tJ - f.tJ.transpose();
	f.R = f.tR * f.tR.transpose();
	return f;
}

// Packs matrix gradients w.r.t. J, R, Q, B into a gradient on theta.
void pack_gradient(const ph::PhLayout& L, const PhFactors& f, const Mat& gJ, const Mat& gR,
                   const Mat& gQ, const Mat& gB, Eigen::Ref<Vec> out)
{
	const int r = L.r;
	const Mat gtJ = gJ - gJ.transpose();
	const Mat gtR = (gR + gR.transpose()) * f.tR;
	int k = L.j_offset();
	for (int i = 0; i < r; ++i)
		for (int j = 0; j < i; ++j)
			out[k++] += gtJ(i, j);
	k = L.r_offset();
	for (int i = 0; i < r; ++i)
		for (int j = 0; j <= i; ++j)
			out[k++] += gtR(i, j);
	if (!L.frozen_Q) {
		const Mat gtQ = (gQ + gQ.transpose()) * f.tQ;
		k = L.q_offset();
		for (int i = 0; i < r; ++i)
			for (int j = 0; j <= i; ++j)
				out[k++] += gtQ(i, j);
	}
	k = L.b_offset();
	for (int i = 0; i < r; ++i)
		for (int j = 0; j < L.n_p; ++j)
			out[k++] += gB(i, j);
}

} // namespace

NodeId Graph::push(Node n)
{
	for (std::size_t p : n.parents)
		if (nodes_[p].needs_grad)
			n.needs_grad = true;
	nodes_.push_back(std::move(n));
	return NodeId{nodes_.size() - 1};
}

NodeId Graph::leaf(Mat value)
{
	Node n;
	n.op = Op::Leaf;
	n.value = std::move(value);
	n.needs_grad = true;
	return push(std::move(n));
}

NodeId Graph::constant(Mat value)
{
	Node n;
	n.op = Op::Constant;
	n.value = std::move(value);
	return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b)
{
	const Mat& A = value(a);
	const Mat& B = value(b);
	require(A.cols() == B.rows(), "matmul", shape(A) + " * " + shape(B));
	Node n;
	n.op = Op::MatMul;
	n.parents = {a.index, b.index};
	n.value = A * B;
	return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b)
{
	const Mat& A = value(a);
	const Mat& B = value(b);
	require(A.rows() == B.rows() && A.cols() == B.cols(), "add", shape(A) + " + " + shape(B));
	Node n;
	n.op = Op::Add;
	n.parents = {a.index, b.index};
	n.value = A + B;
	return push(std::move(n));
}

NodeId Graph::sub(NodeId a, NodeId b)
{
	const Mat& A = value(a);
	const Mat& B = value(b);
	require(A.rows() == B.rows() && A.cols() == B.cols(), "sub", shape(A) + " - " + shape(B));
	Node n;
	n.op = Op::Sub;
	n.parents = {a.index, b.index};
	n.value = A - B;
	return push(std::move(n));
}

NodeId Graph::add_bias(NodeId a, NodeId b)
{
	const Mat& A = value(a);
	const Mat& B = value(b);
	require(B.cols() == 1 && B.rows() == A.rows(), "add_bias", shape(A) + " + bias " + shape(B));
	Node n;
	n.op = Op::AddBias;
	n.parents = {a.index, b.index};
	n.value = A.colwise() + B.col(0);
	return push(std::move(n));
}

NodeId Graph::scale(NodeId a, double factor)
{
	Node n;
	n.op = Op::Scale;
	n.parents = {a.index};
	n.darg = factor;
	n.value = factor * value(a);
	return push(std::move(n));
}

NodeId Graph::hadamard(NodeId a, NodeId b)
{
	const Mat& A = value(a);
	const Mat& B = value(b);
	require(A.rows() == B.rows() && A.cols() == B.cols(), "hadamard", shape(A) + " .* " + shape(B));
	Node n;
	n.op = Op::Hadamard;
	n.parents = {a.index, b.index};
	n.value = A.cwiseProduct(B);
	return push(std::move(n));
}

NodeId Graph::elu(NodeId a)
{
	Node n;
	n.op = Op::Elu;
	n.parents = {a.index};
	n.value = value(a).unaryExpr([](double x) { return diffkit::elu(x); });
	return push(std::move(n));
}

NodeId Graph::elu_d(NodeId a)
{
	Node n;
	n.op = Op::EluD;
	n.parents = {a.index};
	n.value = value(a).unaryExpr([](double x) { return diffkit::elu_d(x); });
	return push(std::move(n));
}

NodeId Graph::elu_dd(NodeId a)
{
	Node n;
	n.op = Op::EluDD;
	n.parents = {a.index};
	n.value = value(a).unaryExpr([](double x) { return diffkit::elu_dd(x); });
	return push(std::move(n));
}

NodeId Graph::transpose(NodeId a)
{
	Node n;
	n.op = Op::Transpose;
	n.parents = {a.index};
	n.value = value(a).transpose();
	return push(std::move(n));
}

NodeId Graph::sum_squares(NodeId a)
{
	Node n;
	n.op = Op::SumSquares;
	n.parents = {a.index};
	n.value = Mat::Constant(1, 1, value(a).squaredNorm());
	return push(std::move(n));
}

NodeId Graph::abs_sum(NodeId a)
{
	Node n;
	n.op = Op::AbsSum;
	n.parents = {a.index};
	n.value = Mat::Constant(1, 1, value(a).cwiseAbs().sum());
	return push(std::move(n));
}

NodeId Graph::triangular(NodeId theta, int r, bool strict)
{
	const Mat& t = value(theta);
	require(t.cols() == 1, "triangular", "expects a column vector, got " + shape(t));
	Node n;
	n.op = Op::Triangular;
	n.parents = {theta.index};
	n.iarg0 = r;
	n.iarg1 = strict ? 1 : 0;
	n.value = ph::assemble_triangular(std::span<const double>(t.data(), t.size()), r, strict);
	return push(std::move(n));
}

NodeId Graph::reshape_row_major(NodeId theta, int rows, int cols)
{
	const Mat& t = value(theta);
	require(t.cols() == 1 && t.rows() == rows * cols, "reshape_row_major",
	        shape(t) + " -> " + std::to_string(rows) + "x" + std::to_string(cols));
	Node n;
	n.op = Op::ReshapeRowMajor;
	n.parents = {theta.index};
	n.iarg0 = rows;
	n.iarg1 = cols;
	n.value.resize(rows, cols);
	for (int i = 0; i < rows; ++i)
		for (int j = 0; j < cols; ++j)
			n.value(i, j) = t(i * cols + j, 0);
	return push(std::move(n));
}

NodeId Graph::add_scaled_identity(NodeId a, double eps)
{
	const Mat& A = value(a);
	require(A.rows() == A.cols(), "add_scaled_identity", "square matrix expected, got " + shape(A));
	Node n;
	n.op = Op::AddScaledIdentity;
	n.parents = {a.index};
	n.darg = eps;
	n.value = A + eps * Mat::Identity(A.rows(), A.cols());
	return push(std::move(n));
}

NodeId Graph::ph_rhs(NodeId theta, NodeId z, NodeId u, const ph::PhLayout& layout)
{
	const Mat& T = value(theta);
	const Mat& Z = value(z);
	const Mat& U = value(u);
	require(T.rows() == layout.total(), "ph_rhs",
	        "weight rows " + std::to_string(T.rows()) + " != layout size " +
	            std::to_string(layout.total()));
	require(Z.rows() == layout.r, "ph_rhs", "state rows " + std::to_string(Z.rows()));
	require(U.rows() == layout.n_p && U.cols() == Z.cols(), "ph_rhs", "input shape " + shape(U));
	require(T.cols() == 1 || T.cols() == Z.cols(), "ph_rhs",
	        "weight columns must be 1 or the batch size, got " + shape(T));

	Node n;
	n.op = Op::PhRhs;
	n.parents = {theta.index, z.index, u.index};
	n.layout = layout;
	if (T.cols() == 1) {
		const PhFactors f = unpack(layout, T.col(0));
		n.value = (f.J - f.R) * (f.Q * Z) + f.B * U;
	} else {
		n.value.resize(layout.r, Z.cols());
		for (Eigen::Index i = 0; i < Z.cols(); ++i) {
			const PhFactors f = unpack(layout, T.col(i));
			n.value.col(i) = (f.J - f.R) * (f.Q * Z.col(i)) + f.B * U.col(i);
		}
	}
	return push(std::move(n));
}

double Graph::scalar(NodeId n) const
{
	const Mat& v = value(n);
	if (v.rows() != 1 || v.cols() != 1)
		throw ContractError("scalar(): node is " + shape(v));
	return v(0, 0);
}

Mat Graph::adjoint(NodeId n) const
{
	const Node& nd = nodes_.at(n.index);
	if (!nd.has_adjoint)
		return Mat::Zero(nd.value.rows(), nd.value.cols());
	return nd.adjoint;
}

void Graph::accumulate(std::size_t index, const Mat& contribution)
{
	Node& n = nodes_[index];
	if (!n.needs_grad)
		return;
	if (!n.has_adjoint) {
		n.adjoint = contribution;
		n.has_adjoint = true;
	} else {
		n.adjoint += contribution;
	}
}

void Graph::reverse_grad(NodeId out)
{
	Node& seed = nodes_.at(out.index);
	if (seed.value.rows() != 1 || seed.value.cols() != 1)
		throw ContractError("reverse_grad: seed node must be scalar, got " + shape(seed.value));

	for (auto& n : nodes_) {
		n.has_adjoint = false;
		n.adjoint.resize(0, 0);
	}
	seed.adjoint = Mat::Ones(1, 1);
	seed.has_adjoint = true;

	for (std::size_t i = out.index + 1; i-- > 0;) {
		const Node& n = nodes_[i];
		if (n.has_adjoint && n.needs_grad && !n.parents.empty())
			backward(n);
	}
}

void Graph::backward(const Node& n)
{
	const Mat& G = n.adjoint;
	auto p = [&](int k) { return n.parents[k]; };
	auto pv = [&](int k) -> const Mat& { return nodes_[n.parents[k]].value; };

	switch (n.op) {
	case Op::Leaf:
	case Op::Constant:
		break;
	case Op::MatMul:
		if (nodes_[p(0)].needs_grad)
			accumulate(p(0), G * pv(1).transpose());
		if (nodes_[p(1)].needs_grad)
			accumulate(p(1), pv(0).transpose() * G);
		break;
	case Op::Add:
		accumulate(p(0), G);
		accumulate(p(1), G);
		break;
	case Op::Sub:
		accumulate(p(0), G);
		if (nodes_[p(1)].needs_grad)
			accumulate(p(1), -G);
		break;
	case Op::AddBias:
		accumulate(p(0), G);
		if (nodes_[p(1)].needs_grad)
			accumulate(p(1), G.rowwise().sum());
		break;
	case Op::Scale:
		accumulate(p(0), n.darg * G);
		break;
	case Op::Hadamard:
		if (nodes_[p(0)].needs_grad)
			accumulate(p(0), G.cwiseProduct(pv(1)));
		if (nodes_[p(1)].needs_grad)
			accumulate(p(1), G.cwiseProduct(pv(0)));
		break;
	case Op::Elu:
		accumulate(p(0), G.cwiseProduct(pv(0).unaryExpr([](double x) { return diffkit::elu_d(x); })));
		break;
	case Op::EluD:
		accumulate(p(0), G.cwiseProduct(pv(0).unaryExpr([](double x) { return diffkit::elu_dd(x); })));
		break;
	case Op::EluDD:
		// d/dx elu''(x) = e^x for x < 0, 0 otherwise; elu'' == elu''' on x < 0.
		accumulate(p(0), G.cwiseProduct(pv(0).unaryExpr([](double x) { return diffkit::elu_dd(x); })));
		break;
	case Op::Transpose:
		accumulate(p(0), G.transpose());
		break;
	case Op::SumSquares:
		accumulate(p(0), (2.0 * G(0, 0)) * pv(0));
		break;
	case Op::AbsSum:
		accumulate(p(0), G(0, 0) * pv(0).unaryExpr([](double x) {
			return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
		}));
		break;
	case Op::Triangular: {
		const int r = n.iarg0;
		const bool strict = n.iarg1 != 0;
		Mat g(pv(0).rows(), 1);
		int k = 0;
		for (int i = 0; i < r; ++i)
			for (int j = 0; j < (strict ? i : i + 1); ++j)
				g(k++, 0) = G(i, j);
		accumulate(p(0), g);
		break;
	}
	case Op::ReshapeRowMajor: {
		Mat g(pv(0).rows(), 1);
		for (int i = 0; i < n.iarg0; ++i)
			for (int j = 0; j < n.iarg1; ++j)
				g(i * n.iarg1 + j, 0) = G(i, j);
		accumulate(p(0), g);
		break;
	}
	case Op::AddScaledIdentity:
		accumulate(p(0), G);
		break;
	case Op::PhRhs:
		ph_rhs_backward(n);
		break;
	}
}

void Graph::ph_rhs_backward(const Node& n)
{
	const Mat& G = n.adjoint;
	const Mat& T = nodes_[n.parents[0]].value;
	const Mat& Z = nodes_[n.parents[1]].value;
	const Mat& U = nodes_[n.parents[2]].value;
	const ph::PhLayout& L = n.layout;
	const bool want_theta = nodes_[n.parents[0]].needs_grad;
	const bool want_z = nodes_[n.parents[1]].needs_grad;
	const bool want_u = nodes_[n.parents[2]].needs_grad;

	Mat gT = Mat::Zero(T.rows(), T.cols());
	Mat gZ;
	Mat gU;
	if (want_z)
		gZ.resize(Z.rows(), Z.cols());
	if (want_u)
		gU.resize(U.rows(), U.cols());

	if (T.cols() == 1) {
		const PhFactors f = unpack(L, T.col(0));
		const Mat A = f.J - f.R;
		const Mat W = f.Q * Z;
		const Mat AtG = A.transpose() * G;
		if (want_theta) {
			const Mat gA = G * W.transpose();
			const Mat gQ = AtG * Z.transpose();
			const Mat gB = G * U.transpose();
			pack_gradient(L, f, gA, -gA, gQ, gB, gT.col(0));
		}
		if (want_z)
			gZ = f.Q * AtG;
		if (want_u)
			gU = f.B.transpose() * G;
	} else {
		for (Eigen::Index i = 0; i < Z.cols(); ++i) {
			const PhFactors f = unpack(L, T.col(i));
			const Mat A = f.J - f.R;
			const Vec g = G.col(i);
			const Vec AtG = A.transpose() * g;
			if (want_theta) {
				const Mat gA = g * (f.Q * Z.col(i)).transpose();
				const Mat gQ = AtG * Z.col(i).transpose();
				const Mat gB = g * U.col(i).transpose();
				pack_gradient(L, f, gA, -gA, gQ, gB, gT.col(i));
			}
			if (want_z)
				gZ.col(i) = f.Q * AtG;
			if (want_u)
				gU.col(i) = f.B.transpose() * g;
		}
	}
	if (want_theta)
		accumulate(n.parents[0], gT);
	if (want_z)
		accumulate(n.parents[1], gZ);
	if (want_u)
		accumulate(n.parents[2], gU);
}

} // namespace phid::diffkit
