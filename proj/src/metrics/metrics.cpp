#include "phid/metrics/metrics.hpp"

#include "phid/errors.hpp"
#include "phid/io/csv.hpp"

namespace phid::metrics {

Vec relative_error(const Mat& ref, const Mat& pred)
{
	if (ref.rows() != pred.rows() || ref.cols() != pred.cols())
		throw DimensionError("relative_error: reference and prediction shapes differ");
	if (ref.rows() == 0)
		throw DimensionError("relative_error: empty trajectory");
	const double denom = ref.rowwise().norm().mean();
	if (!(denom > 0.0))
		throw ConfigError("relative_error: degenerate reference with zero mean norm");
	return (ref - pred).rowwise().norm() / denom;
}

double mean_of(const std::vector<Vec>& per_sim)
{
	double sum = 0.0;
	Eigen::Index count = 0;
	for (const auto& e : per_sim) {
		sum += e.sum();
		count += e.size();
	}
	return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

namespace {

Mat select(const Mat& X, const std::vector<int>& columns)
{
	if (columns.empty())
		return X;
	Mat out(X.rows(), static_cast<Eigen::Index>(columns.size()));
	for (std::size_t j = 0; j < columns.size(); ++j) {
		if (columns[j] < 0 || columns[j] >= X.cols())
			throw DimensionError("state_error: component index out of range");
		out.col(static_cast<Eigen::Index>(j)) = X.col(columns[j]);
	}
	return out;
}

} // namespace

ErrorSeries state_error(const std::vector<Mat>& X_ref, const std::vector<Mat>& X_pred,
                        const std::vector<int>& columns)
{
	if (X_ref.size() != X_pred.size())
		throw DimensionError("state_error: simulation counts differ");
	ErrorSeries out;
	for (std::size_t s = 0; s < X_ref.size(); ++s)
		out.per_sim.push_back(relative_error(select(X_ref[s], columns), select(X_pred[s], columns)));
	out.mean = mean_of(out.per_sim);
	return out;
}

ErrorSeries latent_error(const ae::Autoencoder& ae, const std::vector<Mat>& X,
                         const std::vector<Mat>& Z_pred)
{
	if (X.size() != Z_pred.size())
		throw DimensionError("latent_error: simulation counts differ");
	ErrorSeries out;
	for (std::size_t s = 0; s < X.size(); ++s) {
		const Mat Z_ref = ae.encode(Mat(X[s].transpose())).transpose();
		out.per_sim.push_back(relative_error(Z_ref, Z_pred[s]));
	}
	out.mean = mean_of(out.per_sim);
	return out;
}

ProjectionErrors projection_errors(const ae::Autoencoder& ae, const Mat& Z, JacobianNorm norm)
{
	if (Z.rows() != ae.r)
		throw DimensionError("projection_errors: latent samples must have " + std::to_string(ae.r) + " rows");
	ProjectionErrors out;
	const auto n = Z.cols();
	out.n_samples = static_cast<int>(n);
	if (n == 0)
		return out;

	const Mat Xd = ae.decode(Z);
	const Mat Zr = ae.encode(Xd);
	double proj_sum = 0.0;
	for (Eigen::Index i = 0; i < n; ++i) {
		const double zz = Z.col(i).squaredNorm();
		if (zz == 0.0) {
			++out.excluded_zero;
			continue;
		}
		proj_sum += (Z.col(i) - Zr.col(i)).squaredNorm() / zz;
	}
	const auto kept = n - out.excluded_zero;
	out.e_proj = kept > 0 ? proj_sum / static_cast<double>(kept) : 0.0;

	// Column j of D enc(dec z) D dec(z) for all samples at once.
	std::vector<Mat> cols;
	for (int j = 0; j < ae.r; ++j) {
		const Mat T = Vec::Unit(ae.r, j).replicate(1, n);
		cols.push_back(ae.encode_jvp(Xd, ae.decode_jvp(Z, T)));
	}
	double jac_sum = 0.0;
	Mat P(ae.r, ae.r);
	for (Eigen::Index i = 0; i < n; ++i) {
		for (int j = 0; j < ae.r; ++j)
			P.col(j) = cols[static_cast<std::size_t>(j)].col(i);
		const Mat D = Mat::Identity(ae.r, ae.r) - P;
		if (!D.allFinite())
			throw NumericalError("projection_errors: non-finite Jacobian product");
		if (norm == JacobianNorm::Frobenius) {
			jac_sum += D.squaredNorm();
		} else {
			const double s = Eigen::JacobiSVD<Mat>(D).singularValues()(0);
			jac_sum += s * s;
		}
	}
	out.e_jac = jac_sum / static_cast<double>(n);
	return out;
}

void write_error_csv(const std::filesystem::path& path, const Vec& t, const ErrorSeries& err,
                     const std::string& field, const std::string& prefix)
{
	io::Table table;
	table.columns.push_back("t");
	const auto n_sims = static_cast<Eigen::Index>(err.per_sim.size());
	for (Eigen::Index s = 0; s < n_sims; ++s)
		table.columns.push_back(prefix + "_" + field + "_" + std::to_string(s));
	table.columns.push_back(prefix + "_" + field + "_mean");
	table.values.resize(n_sims > 0 ? t.size() : 0, n_sims + 2);
	if (n_sims > 0) {
		table.values.col(0) = t;
		for (Eigen::Index s = 0; s < n_sims; ++s) {
			if (err.per_sim[static_cast<std::size_t>(s)].size() != t.size())
				throw DimensionError("write_error_csv: error series length differs from time axis");
			table.values.col(1 + s) = err.per_sim[static_cast<std::size_t>(s)];
		}
		table.values.col(n_sims + 1) = table.values.middleCols(1, n_sims).rowwise().mean();
	}
	io::write_csv(path, table);
}

nlohmann::json ErrorReport::summary() const
{
	nlohmann::json fields = nlohmann::json::object();
	for (const auto& [name, e] : e_x_fields)
		fields[name] = e.mean;
	return {{"mean_state_error", e_x.mean},
	        {"mean_latent_error", e_z.mean},
	        {"mean_state_error_fields", fields},
	        {"e_proj", projection.e_proj},
	        {"e_jac", projection.e_jac},
	        {"projection_samples", projection.n_samples},
	        {"projection_excluded_zero", projection.excluded_zero}};
}

} // namespace phid::metrics
