#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <random>
#include <vector>

namespace phid::test {

inline Eigen::MatrixXd random_mat(int rows, int cols, std::mt19937_64& rng, double scale = 1.0)
{
	std::normal_distribution<double> nd(0.0, scale);
	return Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return nd(rng); });
}

inline Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& A)
{
	return Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues();
}

// Greedy nearest-neighbour matching of two spectra as multisets; returns the
// largest distance between matched pairs.
inline double spectrum_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
	if (a.size() != b.size())
		return std::numeric_limits<double>::infinity();
	std::vector<bool> used(static_cast<std::size_t>(b.size()), false);
	double worst = 0.0;
	for (Eigen::Index i = 0; i < a.size(); ++i) {
		double best = std::numeric_limits<double>::infinity();
		Eigen::Index arg = -1;
		for (Eigen::Index j = 0; j < b.size(); ++j) {
			if (used[static_cast<std::size_t>(j)])
				continue;
			const double d = std::abs(a(i) - b(j));
			if (d < best) {
				best = d;
				arg = j;
			}
		}
		used[static_cast<std::size_t>(arg)] = true;
		worst = std::max(worst, best);
	}
	return worst;
}

} // namespace phid::test
