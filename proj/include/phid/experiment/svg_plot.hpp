#pragma once

#include <string>
#include <vector>

namespace phid::exp {

struct Series {
	std::string label; // empty: not listed in the legend
	std::vector<double> x;
	std::vector<double> y;
	std::string color = "#1f77b4";
	double width = 1.5;
	bool dashed = false;
};

struct PlotSpec {
	std::string title;
	std::string xlabel;
	std::string ylabel;
	bool log_x = false;
	bool log_y = false;
	int width = 720;
	int height = 432;
	std::vector<Series> series;
};

/// Self-contained SVG line plot with axes, ticks and a legend. Throws
/// ConfigError for an empty plot, mismatched x/y lengths, or non-positive
/// values on a logarithmic axis.
std::string render_plot(const PlotSpec& spec);

} // namespace phid::exp
