#include "phid/experiment/svg_plot.hpp"

#include "phid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace phid::exp {

namespace {

std::string escape(const std::string& s)
{
	std::string out;
	for (char c : s) {
		switch (c) {
		case '&':
			out += "&amp;";
			break;
		case '<':
			out += "&lt;";
			break;
		case '>':
			out += "&gt;";
			break;
		case '"':
			out += "&quot;";
			break;
		default:
			out += c;
		}
	}
	return out;
}

std::string num(double v)
{
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.2f", v);
	return buf;
}

std::string tick_label(double v)
{
	char buf[32];
	if (v != 0.0 && (std::abs(v) < 1e-3 || std::abs(v) >= 1e4))
		std::snprintf(buf, sizeof buf, "%.0e", v);
	else
		std::snprintf(buf, sizeof buf, "%g", v);
	return buf;
}

struct Axis {
	bool log = false;
	double lo = 0.0;
	double hi = 1.0;

	double map(double v) const { return log ? std::log10(v) : v; }

	void finalize()
	{
		if (hi == lo) {
			const double pad = lo == 0.0 ? 1.0 : 0.5 * std::abs(lo);
			lo -= pad;
			hi += pad;
		}
		if (log) {
			lo = std::floor(lo);
			hi = std::ceil(hi);
			if (hi == lo)
				hi = lo + 1.0;
		}
	}

	std::vector<double> ticks() const
	{
		std::vector<double> t;
		if (log) {
			const int step = std::max(1, static_cast<int>(std::ceil((hi - lo) / 8.0)));
			for (double e = lo; e <= hi + 1e-9; e += step)
				t.push_back(e);
			return t;
		}
		const double raw = (hi - lo) / 6.0;
		const double mag = std::pow(10.0, std::floor(std::log10(raw)));
		double step = mag;
		for (double m : {1.0, 2.0, 5.0, 10.0})
			if (m * mag >= raw) {
				step = m * mag;
				break;
			}
		for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
			t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
		return t;
	}
};

} // namespace

std::string render_plot(const PlotSpec& spec)
{
	if (spec.series.empty())
		throw ConfigError("render_plot: no series");
	Axis ax{spec.log_x, std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
	Axis ay{spec.log_y, ax.lo, ax.hi};
	for (const auto& s : spec.series) {
		if (s.x.size() != s.y.size())
			throw ConfigError("render_plot: series '" + s.label + "' has mismatched x/y lengths");
		if (s.x.empty())
			throw ConfigError("render_plot: series '" + s.label + "' is empty");
		for (std::size_t i = 0; i < s.x.size(); ++i) {
			if ((spec.log_x && !(s.x[i] > 0.0)) || (spec.log_y && !(s.y[i] > 0.0)))
				throw ConfigError("render_plot: non-positive value on a logarithmic axis in '" + s.label + "'");
			if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
				throw ConfigError("render_plot: non-finite value in '" + s.label + "'");
			ax.lo = std::min(ax.lo, ax.map(s.x[i]));
			ax.hi = std::max(ax.hi, ax.map(s.x[i]));
			ay.lo = std::min(ay.lo, ay.map(s.y[i]));
			ay.hi = std::max(ay.hi, ay.map(s.y[i]));
		}
	}
	ax.finalize();
	ay.finalize();

	const double W = spec.width, H = spec.height;
	const double left = 72, right = 24, top = 36, bottom = 52;
	const double pw = W - left - right, ph = H - top - bottom;
	auto px = [&](double v) { return left + (ax.map(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
	auto py = [&](double v) { return top + ph - (ay.map(v) - ay.lo) / (ay.hi - ay.lo) * ph; };

	std::string svg;
	svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
	       "\" viewBox=\"0 0 " + num(W) + " " + num(H) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
	svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
	if (!spec.title.empty())
		svg += "<text x=\"" + num(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
		       escape(spec.title) + "</text>\n";

	svg += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
	std::string labels;
	for (double t : ax.ticks()) {
		const double x = left + (t - ax.lo) / (ax.hi - ax.lo) * pw;
		svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(top) + "\" x2=\"" + num(x) + "\" y2=\"" + num(top + ph) + "\"/>\n";
		labels += "<text x=\"" + num(x) + "\" y=\"" + num(top + ph + 16) + "\" text-anchor=\"middle\">" +
		          tick_label(ax.log ? std::pow(10.0, t) : t) + "</text>\n";
	}
	for (double t : ay.ticks()) {
		const double y = top + ph - (t - ay.lo) / (ay.hi - ay.lo) * ph;
		svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left + pw) + "\" y2=\"" + num(y) + "\"/>\n";
		labels += "<text x=\"" + num(left - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" +
		          tick_label(ay.log ? std::pow(10.0, t) : t) + "</text>\n";
	}
	svg += "</g>\n";
	svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
	       "\" fill=\"none\" stroke=\"black\"/>\n";
	svg += labels;
	if (!spec.xlabel.empty())
		svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(H - 12) + "\" text-anchor=\"middle\">" +
		       escape(spec.xlabel) + "</text>\n";
	if (!spec.ylabel.empty())
		svg += "<text transform=\"translate(16," + num(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
		       escape(spec.ylabel) + "</text>\n";

	for (const auto& s : spec.series) {
		svg += "<polyline fill=\"none\" stroke=\"" + escape(s.color) + "\" stroke-width=\"" + num(s.width) + "\"";
		if (s.dashed)
			svg += " stroke-dasharray=\"6 4\"";
		svg += " points=\"";
		for (std::size_t i = 0; i < s.x.size(); ++i) {
			if (i)
				svg += ' ';
			svg += num(px(s.x[i])) + "," + num(py(s.y[i]));
		}
		svg += "\"/>\n";
	}

	double ly = top + 12;
	for (const auto& s : spec.series) {
		if (s.label.empty())
			continue;
		const double lx = left + pw - 150;
		svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 24) + "\" y2=\"" + num(ly) +
		       "\" stroke=\"" + escape(s.color) + "\" stroke-width=\"2\"" + (s.dashed ? " stroke-dasharray=\"6 4\"" : "") +
		       "/>\n";
		svg += "<text x=\"" + num(lx + 30) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.label) + "</text>\n";
		ly += 16;
	}
	svg += "</svg>\n";
	return svg;
}

} // namespace phid::exp
