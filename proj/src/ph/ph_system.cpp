#include "phid/ph/ph_system.hpp"

#include "phid/errors.hpp"

#include <string>
#include <vector>

namespace phid::ph {

Vec PHSystem::rhs(const Vec& z, const Vec& u) const
{
	if (z.size() != r() || u.size() != n_p())
		throw DimensionError("pH rhs: expected |z| = " + std::to_string(r()) + " and |u| = " +
		                     std::to_string(n_p()));
	return (J - R) * (Q * z) + B * u;
}

Mat assemble_triangular(std::span<const double> theta, int r, bool strict)
{
	const std::size_t expected = strict ? r * (r - 1) / 2 : r * (r + 1) / 2;
	if (r < 0 || theta.size() != expected)
		throw DimensionError("assemble_triangular: expected " + std::to_string(expected) +
		                     " values for r = " + std::to_string(r) + (strict ? " (strict)" : "") +
		                     ", got " + std::to_string(theta.size()));

	Mat M = Mat::Zero(r, r);
	std::size_t k = 0;
	for (int i = 0; i < r; ++i) {
		const int last = strict ? i : i + 1;
		for (int j = 0; j < last; ++j)
			M(i, j) = theta[k++];
	}
	return M;
}

PHSystem build_ph_matrices(std::span<const double> theta_J, std::span<const double> theta_R,
                           std::span<const double> theta_Q, std::span<const double> theta_B, int r,
                           int n_p, double eps)
{
	if (theta_B.size() != static_cast<std::size_t>(r * n_p))
		throw DimensionError("build_ph_matrices: theta_B needs r*n_p = " + std::to_string(r * n_p) +
		                     " values, got " + std::to_string(theta_B.size()));

	PHSystem sys;
	const Mat tJ = assemble_triangular(theta_J, r, true);
	const Mat tR = assemble_triangular(theta_R, r, false);
	const Mat tQ = assemble_triangular(theta_Q, r, false);
	sys.J = tJ - tJ.transpose();
	sys.R = tR * tR.transpose();
	sys.Q = tQ * tQ.transpose() + eps * Mat::Identity(r, r);
	sys.B.resize(r, n_p);
	for (int i = 0; i < r; ++i)
		for (int j = 0; j < n_p; ++j)
			sys.B(i, j) = theta_B[i * n_p + j];
	return sys;
}

PHSystem build_ph_matrices(const PhLayout& layout, std::span<const double> theta)
{
	if (theta.size() != static_cast<std::size_t>(layout.total()))
		throw DimensionError("pH weight vector: expected " + std::to_string(layout.total()) +
		                     " values, got " + std::to_string(theta.size()));
	const int r = layout.r;
	auto seg = [&](int off, int len) { return theta.subspan(off, len); };

	if (!layout.frozen_Q)
		return build_ph_matrices(seg(layout.j_offset(), layout.j_size()),
		                         seg(layout.r_offset(), layout.r_size()),
		                         seg(layout.q_offset(), layout.q_size()),
		                         seg(layout.b_offset(), layout.b_size()), r, layout.n_p, layout.eps);

	// Frozen Q: build with a zero Q factor and eps = 0, then pin Q = I.
	const std::vector<double> zeros(r * (r + 1) / 2, 0.0);
	PHSystem sys = build_ph_matrices(seg(layout.j_offset(), layout.j_size()),
	                                 seg(layout.r_offset(), layout.r_size()), zeros,
	                                 seg(layout.b_offset(), layout.b_size()), r, layout.n_p, 0.0);
	sys.Q = Mat::Identity(r, r);
	return sys;
}

IdentityQTransform normalize_to_identity_Q(const PHSystem& sys)
{
	Eigen::LLT<Mat> llt(sys.Q);
	if (llt.info() != Eigen::Success)
		throw NumericalError("normalize_to_identity_Q: Q is not positive definite");

	IdentityQTransform out;
	out.L = llt.matrixL();
	const Mat Lt = out.L.transpose();
	out.system.J = Lt * sys.J * out.L;
	out.system.R = Lt * sys.R * out.L;
	out.system.B = Lt * sys.B;
	out.system.Q = Mat::Identity(sys.r(), sys.r());
	// Restore exact skew-symmetry / symmetry lost to rounding.
	out.system.J = 0.5 * (out.system.J - out.system.J.transpose()).eval();
	out.system.R = 0.5 * (out.system.R + out.system.R.transpose()).eval();
	return out;
}

double hamiltonian(const PHSystem& sys, const Vec& z)
{
	if (z.size() != sys.r())
		throw DimensionError("hamiltonian: state has wrong length");
	return 0.5 * z.dot(sys.Q * z);
}

} // namespace phid::ph
