#pragma once

#include <Eigen/Dense>

#include <span>

namespace phid::ph {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Partition of a flat pH weight vector into the segments
/// [theta_J | theta_R | theta_Q | theta_B]. theta_Q is absent when Q is
/// frozen to the identity.
struct PhLayout {
	int r = 0;
	int n_p = 0;
	double eps = 1e-6;
	bool frozen_Q = false;

	int j_size() const { return r * (r - 1) / 2; }
	int r_size() const { return r * (r + 1) / 2; }
	int q_size() const { return frozen_Q ? 0 : r * (r + 1) / 2; }
	int b_size() const { return r * n_p; }

	int j_offset() const { return 0; }
	int r_offset() const { return j_size(); }
	int q_offset() const { return j_size() + r_size(); }
	int b_offset() const { return q_offset() + q_size(); }
	int total() const { return b_offset() + b_size(); }
};

/// Linear time-invariant port-Hamiltonian system
///   z' = (J - R) Q z + B u,   y = B^T Q z.
struct PHSystem {
	Mat J;
	Mat R;
	Mat Q;
	Mat B;

	int r() const { return static_cast<int>(J.rows()); }
	int n_p() const { return static_cast<int>(B.cols()); }

	Mat system_matrix() const { return (J - R) * Q; }
	Vec rhs(const Vec& z, const Vec& u) const;
	Vec output(const Vec& z) const { return B.transpose() * (Q * z); }
};

/// Row-major fill of the (strict) lower triangle of an r x r matrix.
/// Expects r(r+1)/2 values, or r(r-1)/2 when strict.
Mat assemble_triangular(std::span<const double> theta, int r, bool strict);

/// J = T_J - T_J^T, R = T_R T_R^T, Q = T_Q T_Q^T + eps I, B row-major.
PHSystem build_ph_matrices(std::span<const double> theta_J, std::span<const double> theta_R,
                           std::span<const double> theta_Q, std::span<const double> theta_B, int r,
                           int n_p, double eps);

/// Same construction from one flat vector partitioned by `layout`; a
/// frozen layout materializes Q = I.
PHSystem build_ph_matrices(const PhLayout& layout, std::span<const double> theta);

struct IdentityQTransform {
	PHSystem system;
	/// Cholesky factor of the original Q (Q = L L^T); new states are L^T z.
	Mat L;
};

/// Change of state coordinates z~ = L^T z with Q = L L^T, giving Q~ = I.
/// Throws NumericalError if Q is not positive definite.
IdentityQTransform normalize_to_identity_Q(const PHSystem& sys);

double hamiltonian(const PHSystem& sys, const Vec& z);

} // namespace phid::ph
