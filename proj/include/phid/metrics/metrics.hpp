#pragma once

#include "phid/autoencoder/autoencoder.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace phid::metrics {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// |ref_k - pred_k| / mean_i |ref_i| for each time row k. Throws
/// ConfigError if the reference has zero mean norm.
Vec relative_error(const Mat& ref, const Mat& pred);

/// Per-step errors of every simulation and their overall mean.
struct ErrorSeries {
	std::vector<Vec> per_sim;
	double mean = 0.0;
};

/// Mean over every (t, mu) pair, i.e. sum of all entries / total count.
double mean_of(const std::vector<Vec>& per_sim);

/// e_x. `columns` restricts the norms to a subset of state components
/// (empty: all components).
ErrorSeries state_error(const std::vector<Mat>& X_ref, const std::vector<Mat>& X_pred,
                        const std::vector<int>& columns = {});

/// e_z with reference latent states enc(x).
ErrorSeries latent_error(const ae::Autoencoder& ae, const std::vector<Mat>& X,
                         const std::vector<Mat>& Z_pred);

enum class JacobianNorm { Spectral, Frobenius };

struct ProjectionErrors {
	double e_proj = 0.0;
	double e_jac = 0.0;
	int n_samples = 0;
	int excluded_zero = 0; // samples with z = 0, left out of e_proj
};

/// Over latent samples z (columns of Z):
///   e_proj = mean |z - enc(dec(z))|^2 / |z|^2,
///   e_jac  = mean |I - D enc(dec z) D dec(z)|^2,
/// the Jacobian product assembled from nested JVP sweeps.
ProjectionErrors projection_errors(const ae::Autoencoder& ae, const Mat& Z,
                                   JacobianNorm norm = JacobianNorm::Spectral);

/// Table with columns t, <prefix>_<field>_<sim>..., and
/// <prefix>_<field>_mean (mean over simulations at each t).
void write_error_csv(const std::filesystem::path& path, const Vec& t, const ErrorSeries& err,
                     const std::string& field, const std::string& prefix = "error_state_error");

struct ErrorReport {
	ErrorSeries e_x;
	ErrorSeries e_z;
	std::vector<std::pair<std::string, ErrorSeries>> e_x_fields;
	ProjectionErrors projection;

	nlohmann::json summary() const;
};

} // namespace phid::metrics
