#pragma once

#include "phid/ph/ph_system.hpp"

#include <json.hpp>

#include <filesystem>

namespace phid::ph {

/// {r, n_p, J, R, Q, B} with matrices as row-major flat arrays.
nlohmann::json to_json(const PHSystem& sys);
PHSystem system_from_json(const nlohmann::json& j);

void save_system(const PHSystem& sys, const std::filesystem::path& path);
PHSystem load_system(const std::filesystem::path& path);

/// Row-major flattening helpers shared by the JSON writers.
std::vector<double> flatten_row_major(const Mat& M);
Mat unflatten_row_major(const std::vector<double>& v, int rows, int cols);

} // namespace phid::ph
