#include "phid/datasets/storage.hpp"

#include "phid/errors.hpp"
#include "phid/io/csv.hpp"
#include "phid/io/hashing.hpp"

#include <cstdio>

namespace phid::data {

using nlohmann::json;

namespace {

std::vector<double> to_vector(const Vec& v)
{
	return std::vector<double>(v.data(), v.data() + v.size());
}

Vec to_vec(const json& j)
{
	const auto v = j.get<std::vector<double>>();
	return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string sim_name(std::size_t i)
{
	char buf[32];
	std::snprintf(buf, sizeof buf, "sim_%04zu.csv", i);
	return buf;
}

} // namespace

json to_json(const Scaling& s)
{
	json fields = json::array();
	for (const auto& f : s.fields)
		fields.push_back({{"name", f.name}, {"begin", f.begin}, {"size", f.size}, {"factor", f.factor}});
	json j = {{"fields", fields}, {"scale_mu", s.scale_mu}, {"scale_u", s.scale_u}, {"applied", s.applied}};
	if (s.scale_mu)
		j["mu"] = {{"min", to_vector(s.mu.min)}, {"max", to_vector(s.mu.max)}};
	if (s.scale_u)
		j["u"] = {{"min", to_vector(s.u.min)}, {"max", to_vector(s.u.max)}};
	return j;
}

Scaling scaling_from_json(const json& j)
{
	Scaling s;
	for (const auto& f : j.at("fields"))
		s.fields.push_back({f.at("name").get<std::string>(), f.at("begin").get<int>(), f.at("size").get<int>(),
		                    f.at("factor").get<double>()});
	s.scale_mu = j.at("scale_mu").get<bool>();
	s.scale_u = j.at("scale_u").get<bool>();
	s.applied = j.at("applied").get<bool>();
	if (s.scale_mu)
		s.mu = {to_vec(j.at("mu").at("min")), to_vec(j.at("mu").at("max"))};
	if (s.scale_u)
		s.u = {to_vec(j.at("u").at("min")), to_vec(j.at("u").at("max"))};
	return s;
}

void save_dataset(const TrajectoryDataset& ds, const std::filesystem::path& dir)
{
	ds.validate();
	std::filesystem::create_directories(dir);
	const int N = ds.N(), n_p = ds.n_p(), n_mu = ds.n_mu();

	std::vector<std::string> columns{"t"};
	for (int i = 0; i < n_mu; ++i)
		columns.push_back("mu_" + std::to_string(i));
	for (int i = 0; i < n_p; ++i)
		columns.push_back("u_" + std::to_string(i));
	for (int i = 0; i < N; ++i)
		columns.push_back("x_" + std::to_string(i));
	for (int i = 0; i < N; ++i)
		columns.push_back("xdot_" + std::to_string(i));

	json files = json::array();
	std::string listing;
	for (std::size_t s = 0; s < ds.sims.size(); ++s) {
		const auto& sim = ds.sims[s];
		io::Table t;
		t.columns = columns;
		t.values.resize(sim.t.size(), static_cast<Eigen::Index>(columns.size()));
		t.values.col(0) = sim.t;
		for (int i = 0; i < n_mu; ++i)
			t.values.col(1 + i).setConstant(sim.mu(i));
		t.values.middleCols(1 + n_mu, n_p) = sim.U;
		t.values.middleCols(1 + n_mu + n_p, N) = sim.X;
		t.values.middleCols(1 + n_mu + n_p + N, N) = sim.Xdot;
		const std::string text = io::format_csv(t);
		const std::string name = sim_name(s);
		io::write_file(dir / name, text);
		const std::string hash = io::git_blob_hash(text);
		files.push_back({{"name", name}, {"hash", hash}});
		listing += name + ' ' + hash + '\n';
	}

	const json meta = {{"schema_version", kDatasetSchemaVersion},
	                   {"kind", ds.kind},
	                   {"n_sims", ds.sims.size()},
	                   {"N", N},
	                   {"n_p", n_p},
	                   {"n_mu", n_mu},
	                   {"n_t", ds.n_t()},
	                   {"scaling", to_json(ds.scaling)},
	                   {"generation", ds.generation},
	                   {"files", files},
	                   {"content_hash", io::git_blob_hash(listing)}};
	io::write_file(dir / "meta.json", meta.dump(2) + '\n');
}

TrajectoryDataset load_dataset(const std::filesystem::path& dir)
{
	json meta;
	try {
		meta = json::parse(io::read_file(dir / "meta.json"));
	} catch (const json::parse_error& e) {
		throw ConfigError((dir / "meta.json").string() + ": " + e.what());
	}
	try {
		if (meta.at("schema_version").get<int>() != kDatasetSchemaVersion)
			throw ConfigError("unsupported dataset schema version in " + dir.string());
		TrajectoryDataset ds;
		ds.kind = meta.at("kind").get<std::string>();
		ds.scaling = scaling_from_json(meta.at("scaling"));
		ds.generation = meta.at("generation");
		const int N = meta.at("N").get<int>();
		const int n_p = meta.at("n_p").get<int>();
		const int n_mu = meta.at("n_mu").get<int>();
		const auto width = static_cast<Eigen::Index>(1 + n_mu + n_p + 2 * N);
		for (const auto& f : meta.at("files")) {
			const auto name = f.at("name").get<std::string>();
			const std::string text = io::read_file(dir / name);
			if (io::git_blob_hash(text) != f.at("hash").get<std::string>())
				throw ConfigError(name + ": content hash does not match meta.json");
			const auto t = io::parse_csv(text);
			if (t.values.cols() != width)
				throw DimensionError(name + ": expected " + std::to_string(width) + " columns");
			Simulation sim;
			sim.t = t.values.col(0);
			sim.mu = t.values.rows() > 0 ? Vec(t.values.row(0).segment(1, n_mu).transpose()) : Vec::Zero(n_mu);
			sim.U = t.values.middleCols(1 + n_mu, n_p);
			sim.X = t.values.middleCols(1 + n_mu + n_p, N);
			sim.Xdot = t.values.middleCols(1 + n_mu + n_p + N, N);
			ds.sims.push_back(std::move(sim));
		}
		ds.validate();
		return ds;
	} catch (const json::exception& e) {
		throw ConfigError(dir.string() + ": malformed meta.json: " + e.what());
	}
}

} // namespace phid::data
