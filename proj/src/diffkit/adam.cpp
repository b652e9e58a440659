#include "phid/diffkit/adam.hpp"

#include "phid/errors.hpp"

#include <cmath>

namespace phid::diffkit {

void adam_step(std::span<const NamedParam> weights, std::span<const Eigen::MatrixXd> grads,
               AdamState& s)
{
	if (weights.size() != grads.size())
		throw DimensionError("adam_step: " + std::to_string(weights.size()) + " weight segments but " +
		                     std::to_string(grads.size()) + " gradients");
	for (std::size_t i = 0; i < weights.size(); ++i) {
		const auto& w = *weights[i].value;
		if (grads[i].rows() != w.rows() || grads[i].cols() != w.cols())
			throw DimensionError("adam_step: gradient shape mismatch for '" + weights[i].name + "'");
		if (!grads[i].allFinite())
			throw NumericalError("adam_step: non-finite gradient in weight segment '" +
			                     weights[i].name + "'");
	}

	if (s.m.size() != weights.size()) {
		s.m.clear();
		s.v.clear();
		for (const auto& w : weights) {
			s.m.push_back(Eigen::MatrixXd::Zero(w.value->rows(), w.value->cols()));
			s.v.push_back(Eigen::MatrixXd::Zero(w.value->rows(), w.value->cols()));
		}
	}

	++s.step;
	const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
	const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
	for (std::size_t i = 0; i < weights.size(); ++i) {
		auto& m = s.m[i];
		auto& v = s.v[i];
		const auto& g = grads[i];
		m = s.beta1 * m + (1.0 - s.beta1) * g;
		v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseProduct(g);
		auto& w = *weights[i].value;
		for (Eigen::Index k = 0; k < w.size(); ++k) {
			const double mhat = m.data()[k] / c1;
			const double vhat = v.data()[k] / c2;
			w.data()[k] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
		}
	}
}

} // namespace phid::diffkit
