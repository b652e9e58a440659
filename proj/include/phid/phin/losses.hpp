#pragma once

#include "phid/autoencoder/autoencoder.hpp"
#include "phid/diffkit/graph.hpp"
#include "phid/phin/phin.hpp"

#include <vector>

namespace phid::phin {

struct LossWeights {
	double rec = 0.0;
	double ph = 1.0;
	double con = 0.0;
	double l1 = 0.0;

	/// Throws ConfigError on negative or non-finite factors.
	void validate() const;
};

/// Training samples stored as columns.
struct Batch {
	Mat X;    // N x b
	Mat Xdot; // N x b
	Mat U;    // n_p x b
	Mat Mu;   // n_mu x b (0 rows for non-parametric models)

	Eigen::Index size() const { return X.cols(); }
	void validate(int N, int n_p, int n_mu) const;
};

struct LossValues {
	double rec = 0.0;
	double ph = 0.0;
	double con = 0.0;
	double l1 = 0.0; // unweighted L1 norm of the regularized weights
	double total = 0.0;
};

struct LossGraph {
	diffkit::NodeId total;
	LossValues values;
	/// Autoencoder leaves followed by pHIN leaves (empty if not trainable).
	std::vector<diffkit::NodeId> leaves;
};

/// Records the overall loss
///   lam_rec L_rec + lam_pH L_pH + lam_con L_con + lam_L1 |theta|_1
/// on `g`. All three data terms are batch means of squared 2-norms:
///   L_rec = |x - dec(enc(x))|^2,
///   L_pH  = |D enc(x) xdot - f_pH(enc(x), u)|^2,
///   L_con = |xdot - D dec(z) f_pH(z, u)|^2.
/// Terms with a zero factor are skipped and reported as 0. The L1 term acts
/// on theta_pH, or on the hypernetwork weights for parametric models.
LossGraph build_loss(diffkit::Graph& g, const ae::Autoencoder& ae, const PhinModel& model,
                     const Batch& batch, const LossWeights& lambda, bool trainable);

/// Loss values without gradients.
LossValues evaluate_loss(const ae::Autoencoder& ae, const PhinModel& model, const Batch& batch,
                         const LossWeights& lambda);

struct LossGradient {
	LossValues values;
	std::vector<Mat> grads; // ae trainable_parameters then pHIN trainable_parameters
};

LossGradient loss_gradient(const ae::Autoencoder& ae, const PhinModel& model, const Batch& batch,
                           const LossWeights& lambda);

/// Standalone terms for direct use.
double loss_ph(const PhinModel& model, const Mat& Z, const Mat& Zdot, const Mat& U,
               const Mat& Mu = Mat());
double loss_rec(const ae::Autoencoder& ae, const Mat& X);
double loss_con(const ae::Autoencoder& ae, const PhinModel& model, const Mat& X, const Mat& Xdot,
                const Mat& U, const Mat& Mu = Mat());
double loss_total(const LossValues& parts, const LossWeights& lambda);

} // namespace phid::phin
