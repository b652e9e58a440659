#include "phid/phin/serialization.hpp"

#include "phid/errors.hpp"
#include "phid/ph/serialization.hpp"

#include <fstream>

namespace phid::phin {

using nlohmann::json;

namespace {

std::vector<double> segment(const Mat& theta, int offset, int size)
{
	return std::vector<double>(theta.data() + offset, theta.data() + offset + size);
}

} // namespace

json to_json(const diffkit::MLPWeights& w)
{
	json layers = json::array();
	for (const auto& l : w.layers)
		layers.push_back({{"out", l.W.rows()},
		                  {"in", l.W.cols()},
		                  {"W", ph::flatten_row_major(l.W)},
		                  {"b", ph::flatten_row_major(l.b)}});
	return {{"activation", diffkit::to_string(w.activation)},
	        {"activate_last", w.activate_last},
	        {"layers", layers}};
}

diffkit::MLPWeights mlp_from_json(const json& j)
{
	diffkit::MLPWeights w;
	w.activation = diffkit::activation_from_string(j.at("activation").get<std::string>());
	w.activate_last = j.value("activate_last", false);
	for (const auto& l : j.at("layers")) {
		const int out = l.at("out").get<int>();
		const int in = l.at("in").get<int>();
		w.layers.push_back({ph::unflatten_row_major(l.at("W").get<std::vector<double>>(), out, in),
		                    ph::unflatten_row_major(l.at("b").get<std::vector<double>>(), out, 1)});
	}
	w.validate();
	return w;
}

json to_json(const PhinModel& m)
{
	const auto& L = m.layout;
	json j = {{"r", L.r}, {"n_p", L.n_p}, {"eps", L.eps}, {"frozen_Q", L.frozen_Q}};
	if (m.hyper) {
		j["hypernetwork"] = to_json(m.hyper->mlp);
		j["hypernetwork"]["n_mu"] = m.hyper->n_mu;
	} else {
		json theta = {{"J", segment(m.theta, L.j_offset(), L.j_size())},
		              {"R", segment(m.theta, L.r_offset(), L.r_size())},
		              {"B", segment(m.theta, L.b_offset(), L.b_size())}};
		if (!L.frozen_Q)
			theta["Q"] = segment(m.theta, L.q_offset(), L.q_size());
		j["theta"] = theta;
	}
	return j;
}

PhinModel phin_from_json(const json& j)
{
	PhinModel m;
	m.layout.r = j.at("r").get<int>();
	m.layout.n_p = j.at("n_p").get<int>();
	m.layout.eps = j.at("eps").get<double>();
	m.layout.frozen_Q = j.at("frozen_Q").get<bool>();
	const auto& L = m.layout;
	if (j.contains("hypernetwork")) {
		m.hyper = HyperNetwork{mlp_from_json(j.at("hypernetwork")),
		                       j.at("hypernetwork").at("n_mu").get<int>()};
	} else {
		const auto& t = j.at("theta");
		m.theta.resize(L.total(), 1);
		auto put = [&](const char* key, int offset, int size) {
			const auto v = t.at(key).get<std::vector<double>>();
			if (static_cast<int>(v.size()) != size)
				throw DimensionError(std::string("theta_") + key + " has " + std::to_string(v.size()) +
				                     " entries, expected " + std::to_string(size));
			for (int i = 0; i < size; ++i)
				m.theta(offset + i, 0) = v[static_cast<std::size_t>(i)];
		};
		put("J", L.j_offset(), L.j_size());
		put("R", L.r_offset(), L.r_size());
		if (!L.frozen_Q)
			put("Q", L.q_offset(), L.q_size());
		put("B", L.b_offset(), L.b_size());
	}
	m.validate();
	return m;
}

json to_json(const ae::Autoencoder& a, const std::string& basis_stem)
{
	json j = {{"mode", ae::to_string(a.mode)}, {"N", a.N}, {"n_v", a.n_v}, {"r", a.r}};
	if (a.V)
		j["basis"] = basis_stem;
	if (a.mode == ae::Mode::Nonlinear) {
		j["encoder"] = to_json(a.encoder);
		j["decoder"] = to_json(a.decoder);
	}
	return j;
}

ae::Autoencoder autoencoder_from_json(const json& j, const std::filesystem::path& dir)
{
	ae::Autoencoder a;
	a.mode = ae::mode_from_string(j.at("mode").get<std::string>());
	a.N = j.at("N").get<int>();
	a.n_v = j.at("n_v").get<int>();
	a.r = j.at("r").get<int>();
	if (j.contains("basis")) {
		auto pca = ae::load_basis(dir / j.at("basis").get<std::string>());
		a.V = std::move(pca.V);
		a.singular_values = std::move(pca.singular_values);
	}
	if (a.mode == ae::Mode::Nonlinear) {
		a.encoder = mlp_from_json(j.at("encoder"));
		a.decoder = mlp_from_json(j.at("decoder"));
	}
	a.validate();
	return a;
}

void save_model(const TrainedModel& m, const std::filesystem::path& path)
{
	const std::string stem = path.stem().string() + "_basis";
	if (m.autoencoder.V)
		ae::save_basis({*m.autoencoder.V, m.autoencoder.singular_values}, path.parent_path() / stem);
	const json j = {{"schema_version", kModelSchemaVersion},
	                {"autoencoder", to_json(m.autoencoder, stem)},
	                {"phin", to_json(m.phin)},
	                {"metadata", m.metadata}};
	std::ofstream os(path);
	os << j.dump(2) << '\n';
	if (!os)
		throw std::runtime_error("cannot write " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path)
{
	std::ifstream is(path);
	if (!is)
		throw ConfigError("cannot open model file " + path.string());
	try {
		const json j = json::parse(is);
		const int version = j.at("schema_version").get<int>();
		if (version != kModelSchemaVersion)
			throw ConfigError("unsupported model schema version " + std::to_string(version));
		TrainedModel m;
		m.autoencoder = autoencoder_from_json(j.at("autoencoder"), path.parent_path());
		m.phin = phin_from_json(j.at("phin"));
		m.metadata = j.value("metadata", json::object());
		return m;
	} catch (const json::exception& e) {
		throw ConfigError(path.string() + ": malformed model file: " + e.what());
	}
}

} // namespace phid::phin
