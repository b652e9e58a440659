#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace phid::diffkit {

/// A trainable weight segment: a name for diagnostics and a pointer into the
/// model that owns the values.
struct NamedParam {
	std::string name;
	Eigen::MatrixXd* value = nullptr;
};

struct AdamState {
	long step = 0;
	std::vector<Eigen::MatrixXd> m;
	std::vector<Eigen::MatrixXd> v;
	double beta1 = 0.9;
	double beta2 = 0.999;
	double eps = 1e-8;
	double lr = 1e-3;
};

/// One bias-corrected ADAM update of every segment in `weights`. Moment
/// buffers are created on the first call. Throws NumericalError naming the
/// segment if any gradient entry is not finite; nothing is updated then.
void adam_step(std::span<const NamedParam> weights, std::span<const Eigen::MatrixXd> grads,
               AdamState& state);

} // namespace phid::diffkit
