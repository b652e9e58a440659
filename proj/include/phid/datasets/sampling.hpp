#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace phid::data {

/// Radical inverse of `index` (>= 1) in the given base (>= 2).
double halton(std::uint64_t index, int base);

/// n points of the Halton sequence in dims dimensions (bases 2, 3, 5, ...),
/// starting at index `start`; one point per row, in (0, 1)^dims.
Eigen::MatrixXd halton_points(int n, int dims, std::uint64_t start = 1);

/// Maps unit-cube rows affinely onto the box [lo, hi].
Eigen::MatrixXd scale_to_box(const Eigen::MatrixXd& unit, const std::vector<double>& lo,
                             const std::vector<double>& hi);

} // namespace phid::data
