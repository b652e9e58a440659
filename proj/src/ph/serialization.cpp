#include "phid/ph/serialization.hpp"

#include "phid/errors.hpp"

#include <fstream>

namespace phid::ph {

std::vector<double> flatten_row_major(const Mat& M)
{
	std::vector<double> out;
	out.reserve(static_cast<std::size_t>(M.size()));
	for (Eigen::Index i = 0; i < M.rows(); ++i)
		for (Eigen::Index j = 0; j < M.cols(); ++j)
			out.push_back(M(i, j));
	return out;
}

Mat unflatten_row_major(const std::vector<double>& v, int rows, int cols)
{
	if (static_cast<long>(v.size()) != static_cast<long>(rows) * cols)
		throw DimensionError("expected " + std::to_string(rows * cols) + " matrix entries, got " +
		                     std::to_string(v.size()));
	Mat M(rows, cols);
	for (int i = 0; i < rows; ++i)
		for (int j = 0; j < cols; ++j)
			M(i, j) = v[static_cast<std::size_t>(i) * cols + j];
	return M;
}

nlohmann::json to_json(const PHSystem& sys)
{
	return {{"r", sys.r()},
	        {"n_p", sys.n_p()},
	        {"J", flatten_row_major(sys.J)},
	        {"R", flatten_row_major(sys.R)},
	        {"Q", flatten_row_major(sys.Q)},
	        {"B", flatten_row_major(sys.B)}};
}

PHSystem system_from_json(const nlohmann::json& j)
{
	try {
		const int r = j.at("r").get<int>();
		const int n_p = j.at("n_p").get<int>();
		PHSystem sys;
		sys.J = unflatten_row_major(j.at("J").get<std::vector<double>>(), r, r);
		sys.R = unflatten_row_major(j.at("R").get<std::vector<double>>(), r, r);
		sys.Q = unflatten_row_major(j.at("Q").get<std::vector<double>>(), r, r);
		sys.B = unflatten_row_major(j.at("B").get<std::vector<double>>(), r, n_p);
		return sys;
	} catch (const nlohmann::json::exception& e) {
		throw ConfigError(std::string("malformed pH system document: ") + e.what());
	}
}

void save_system(const PHSystem& sys, const std::filesystem::path& path)
{
	std::ofstream os(path);
	os << to_json(sys).dump(2) << '\n';
	if (!os)
		throw std::runtime_error("cannot write " + path.string());
}

PHSystem load_system(const std::filesystem::path& path)
{
	std::ifstream is(path);
	if (!is)
		throw ConfigError("cannot open " + path.string());
	try {
		return system_from_json(nlohmann::json::parse(is));
	} catch (const nlohmann::json::parse_error& e) {
		throw ConfigError(path.string() + ": " + e.what());
	}
}

} // namespace phid::ph
