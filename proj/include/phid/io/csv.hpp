#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace phid::io {

/// Column-labelled table of doubles; one row per sample.
struct Table {
	std::vector<std::string> columns;
	Eigen::MatrixXd values; // rows x columns.size()
};

/// %.17g, comma separated, header row, LF line endings.
std::string format_csv(const Table& table);
void write_csv(const std::filesystem::path& path, const Table& table);

Table parse_csv(const std::string& text);
Table read_csv(const std::filesystem::path& path);

/// Shortest-round-trip-safe text for one value ("%.17g").
std::string format_double(double v);

} // namespace phid::io
