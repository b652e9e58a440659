#include "phid/datasets/sampling.hpp"

#include "phid/errors.hpp"

#include <array>

namespace phid::data {

double halton(std::uint64_t index, int base)
{
	if (index < 1 || base < 2)
		throw ConfigError("halton: index must be >= 1 and base >= 2");
	double f = 1.0;
	double r = 0.0;
	while (index > 0) {
		f /= base;
		r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
		index /= static_cast<std::uint64_t>(base);
	}
	return r;
}

Eigen::MatrixXd halton_points(int n, int dims, std::uint64_t start)
{
	static constexpr std::array<int, 10> primes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
	if (dims < 1 || dims > static_cast<int>(primes.size()))
		throw ConfigError("halton_points: dims must lie in [1, 10]");
	Eigen::MatrixXd P(n, dims);
	for (int i = 0; i < n; ++i)
		for (int d = 0; d < dims; ++d)
			P(i, d) = halton(start + static_cast<std::uint64_t>(i), primes[static_cast<std::size_t>(d)]);
	return P;
}

Eigen::MatrixXd scale_to_box(const Eigen::MatrixXd& unit, const std::vector<double>& lo,
                             const std::vector<double>& hi)
{
	if (static_cast<Eigen::Index>(lo.size()) != unit.cols() || hi.size() != lo.size())
		throw DimensionError("scale_to_box: bounds do not match point dimension");
	Eigen::MatrixXd out = unit;
	for (Eigen::Index d = 0; d < unit.cols(); ++d)
		out.col(d) = (lo[static_cast<std::size_t>(d)] +
		              (hi[static_cast<std::size_t>(d)] - lo[static_cast<std::size_t>(d)]) *
		                  unit.col(d).array())
		                 .matrix();
	return out;
}

} // namespace phid::data
