#include "phid/io/csv.hpp"

#include "phid/errors.hpp"
#include "phid/io/hashing.hpp"

#include <charconv>
#include <cstdio>

namespace phid::io {

std::string format_double(double v)
{
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

std::string format_csv(const Table& table)
{
	if (table.values.cols() != static_cast<Eigen::Index>(table.columns.size()))
		throw DimensionError("csv: " + std::to_string(table.columns.size()) + " column names for " +
		                     std::to_string(table.values.cols()) + " columns");
	std::string out;
	for (std::size_t j = 0; j < table.columns.size(); ++j) {
		if (j)
			out += ',';
		out += table.columns[j];
	}
	out += '\n';
	char buf[32];
	for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
		for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
			if (j)
				out += ',';
			const int n = std::snprintf(buf, sizeof buf, "%.17g", table.values(i, j));
			out.append(buf, static_cast<std::size_t>(n));
		}
		out += '\n';
	}
	return out;
}

void write_csv(const std::filesystem::path& path, const Table& table)
{
	write_file(path, format_csv(table));
}

Table parse_csv(const std::string& text)
{
	Table t;
	std::size_t pos = text.find('\n');
	if (pos == std::string::npos)
		throw ConfigError("csv: missing header line");
	{
		std::string header = text.substr(0, pos);
		std::size_t start = 0;
		while (true) {
			const auto comma = header.find(',', start);
			t.columns.push_back(header.substr(start, comma - start));
			if (comma == std::string::npos)
				break;
			start = comma + 1;
		}
	}
	const std::size_t n_cols = t.columns.size();
	std::vector<double> vals;
	std::size_t rows = 0;
	const char* p = text.data() + pos + 1;
	const char* end = text.data() + text.size();
	while (p < end) {
		for (std::size_t j = 0; j < n_cols; ++j) {
			double v = 0.0;
			const auto res = std::from_chars(p, end, v);
			if (res.ec != std::errc())
				throw ConfigError("csv: malformed number in row " + std::to_string(rows + 1));
			vals.push_back(v);
			p = res.ptr;
			const char expected = j + 1 < n_cols ? ',' : '\n';
			if (p >= end || *p != expected)
				throw ConfigError("csv: row " + std::to_string(rows + 1) + " has the wrong number of fields");
			++p;
		}
		++rows;
	}
	t.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n_cols));
	for (std::size_t i = 0; i < rows; ++i)
		for (std::size_t j = 0; j < n_cols; ++j)
			t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[i * n_cols + j];
	return t;
}

Table read_csv(const std::filesystem::path& path)
{
	return parse_csv(read_file(path));
}

} // namespace phid::io
