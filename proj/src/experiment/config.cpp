#include "phid/experiment/config.hpp"

#include "phid/errors.hpp"
#include "phid/io/hashing.hpp"

#include <toml.hpp>

#include <set>

namespace phid::exp {

std::string to_string(ModelKind k)
{
	switch (k) {
	case ModelKind::Phin:
		return "phin";
	case ModelKind::AphinLinear:
		return "aphin_linear";
	case ModelKind::AphinNonlinear:
		return "aphin_nonlinear";
	}
	return "phin";
}

ModelKind model_kind_from_string(const std::string& s)
{
	if (s == "phin")
		return ModelKind::Phin;
	if (s == "aphin_linear")
		return ModelKind::AphinLinear;
	if (s == "aphin_nonlinear")
		return ModelKind::AphinNonlinear;
	throw ConfigError("model.mode must be phin, aphin_linear or aphin_nonlinear, got '" + s + "'");
}

int DatasetSpec::state_dim() const
{
	if (kind == "msd")
		return 2 * msd.n_links;
	if (kind == "pendulum")
		return 4;
	return 3 * wave.n_nodes;
}

int DatasetSpec::n_mu() const
{
	if (kind == "msd")
		return 3;
	if (kind == "wave")
		return 2;
	return 0;
}

int DatasetSpec::n_p() const
{
	return kind == "pendulum" ? 0 : 1;
}

void ExperimentConfig::validate() const
{
	if (dataset.kind != "msd" && dataset.kind != "pendulum" && dataset.kind != "wave")
		throw ConfigError("dataset.kind must be msd, pendulum or wave, got '" + dataset.kind + "'");
	loss.validate();
	const int N = dataset.state_dim();
	if (model.r < 1)
		throw ConfigError("model.r must be >= 1");
	switch (model.kind) {
	case ModelKind::Phin:
		if (model.r != N)
			throw ConfigError("model.mode = phin identifies in the state space: r must equal N = " +
			                  std::to_string(N));
		if (loss.rec > 0.0 || loss.con > 0.0)
			throw ConfigError("phin mode has no autoencoder: loss.rec and loss.con must be 0");
		break;
	case ModelKind::AphinLinear:
		if (model.r > N)
			throw ConfigError("model.r exceeds the state dimension");
		if (model.n_v != 0 && model.n_v != model.r)
			throw ConfigError("aphin_linear uses a PCA layer of width r; model.n_v must be 0 or r");
		break;
	case ModelKind::AphinNonlinear:
		if (model.autoencoder_layers.empty())
			throw ConfigError("aphin_nonlinear needs model.autoencoder_layers");
		if (model.r > N)
			throw ConfigError("model.r exceeds the state dimension");
		if (N > ae::kPcaThreshold && model.n_v == 0)
			throw ConfigError("state dimension " + std::to_string(N) + " > " +
			                  std::to_string(ae::kPcaThreshold) + " requires model.n_v (PCA width)");
		if (model.n_v < 0 || model.n_v > N || (model.n_v > 0 && model.n_v < model.r))
			throw ConfigError("model.n_v must lie in [r, N]");
		break;
	}
	for (int w : model.autoencoder_layers)
		if (w < 1)
			throw ConfigError("layer widths must be positive");
	for (int w : model.hypernetwork_layers)
		if (w < 1)
			throw ConfigError("layer widths must be positive");
	if (parametric() && dataset.n_mu() == 0)
		throw ConfigError("model.hypernetwork_layers given but dataset '" + dataset.kind + "' has no parameters");
	if (model.eps < 0.0)
		throw ConfigError("model.eps must be non-negative");
	if (optimizer.epochs < 1)
		throw ConfigError("optimizer.epochs must be >= 1");
	if (optimizer.batch_size < 1)
		throw ConfigError("optimizer.batch_size must be >= 1");
	if (!(optimizer.lr > 0.0))
		throw ConfigError("optimizer.lr must be positive");
	const auto& es = optimizer.early_stopping;
	if (!(es.val_fraction > 0.0 && es.val_fraction < 1.0))
		throw ConfigError("optimizer.early_stopping.val_fraction must lie in (0, 1)");
	if (es.patience < 1 || es.min_delta < 0.0)
		throw ConfigError("early stopping needs patience >= 1 and min_delta >= 0");
	if (evaluation.statespace_points < 0)
		throw ConfigError("evaluation.statespace_points must be >= 0");
}

namespace {

class Reader {
public:
	Reader(const toml::table* table, std::string path) : table_(table), path_(std::move(path)) {}

	bool present() const { return table_ != nullptr; }
	bool has(const std::string& key) const { return table_ && table_->get(key); }

	Reader sub(const std::string& key)
	{
		seen_.insert(key);
		if (!table_)
			return {nullptr, qualify(key)};
		const auto* node = table_->get(key);
		if (node && !node->is_table())
			throw ConfigError(qualify(key) + " must be a table");
		return {node ? node->as_table() : nullptr, qualify(key)};
	}

	template <typename T>
	void get(const std::string& key, T& out)
	{
		seen_.insert(key);
		if (!table_)
			return;
		const auto* node = table_->get(key);
		if (!node)
			return;
		if constexpr (std::is_same_v<T, bool>) {
			if (!node->is_boolean())
				throw ConfigError(qualify(key) + " must be a boolean");
			out = node->as_boolean()->get();
		} else if constexpr (std::is_integral_v<T>) {
			if (!node->is_integer())
				throw ConfigError(qualify(key) + " must be an integer");
			const auto v = node->as_integer()->get();
			if (std::is_unsigned_v<T> && v < 0)
				throw ConfigError(qualify(key) + " must be non-negative");
			out = static_cast<T>(v);
		} else if constexpr (std::is_floating_point_v<T>) {
			if (node->is_integer())
				out = static_cast<T>(node->as_integer()->get());
			else if (node->is_floating_point())
				out = static_cast<T>(node->as_floating_point()->get());
			else
				throw ConfigError(qualify(key) + " must be a number");
		} else {
			if (!node->is_string())
				throw ConfigError(qualify(key) + " must be a string");
			out = node->as_string()->get();
		}
	}

	void get_ints(const std::string& key, std::vector<int>& out)
	{
		seen_.insert(key);
		if (!table_)
			return;
		const auto* node = table_->get(key);
		if (!node)
			return;
		const auto* arr = node->as_array();
		if (!arr)
			throw ConfigError(qualify(key) + " must be an array of integers");
		out.clear();
		for (const auto& el : *arr) {
			if (!el.is_integer())
				throw ConfigError(qualify(key) + " must be an array of integers");
			out.push_back(static_cast<int>(el.as_integer()->get()));
		}
	}

	void get_range(const std::string& key, data::Range& out)
	{
		seen_.insert(key);
		if (!table_)
			return;
		const auto* node = table_->get(key);
		if (!node)
			return;
		const auto* arr = node->as_array();
		if (!arr || arr->size() != 2)
			throw ConfigError(qualify(key) + " must be a [lo, hi] pair");
		double v[2];
		for (std::size_t i = 0; i < 2; ++i) {
			const auto& el = (*arr)[i];
			if (el.is_integer())
				v[i] = static_cast<double>(el.as_integer()->get());
			else if (el.is_floating_point())
				v[i] = el.as_floating_point()->get();
			else
				throw ConfigError(qualify(key) + " must hold numbers");
		}
		out = {v[0], v[1]};
	}

	/// Rejects keys that no getter asked for.
	void finish() const
	{
		if (!table_)
			return;
		for (const auto& [key, node] : *table_)
			if (!seen_.count(std::string(key.str())))
				throw ConfigError("unknown configuration key '" + qualify(std::string(key.str())) + "'");
	}

private:
	std::string qualify(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

	const toml::table* table_;
	std::string path_;
	std::set<std::string> seen_;
};

} // namespace

ExperimentConfig parse_config(const std::string& toml_text)
{
	toml::table root;
	try {
		root = toml::parse(toml_text);
	} catch (const toml::parse_error& e) {
		throw ConfigError(std::string("TOML parse error: ") + std::string(e.description()));
	}

	ExperimentConfig cfg;
	Reader top(&root, "");
	top.get("name", cfg.name);
	top.get("seed", cfg.seed);

	{
		auto ds = top.sub("dataset");
		if (!ds.present())
			throw ConfigError("missing [dataset] table");
		ds.get("kind", cfg.dataset.kind);
		ds.get("normalize", cfg.dataset.normalize);
		ds.get("path", cfg.dataset.path);
		auto& m = cfg.dataset.msd;
		auto& p = cfg.dataset.pendulum;
		auto& w = cfg.dataset.wave;
		if (cfg.dataset.kind == "msd") {
			ds.get("n_train", m.n_train);
			ds.get("n_test", m.n_test);
			ds.get("n_links", m.n_links);
			ds.get("n_t", m.n_t);
			ds.get("t_end", m.t_end);
			ds.get("seed", m.seed);
			ds.get("random_z0", m.random_z0);
			ds.get_range("m", m.m);
			ds.get_range("k", m.k);
			ds.get_range("c", m.c);
			ds.get_range("delta", m.delta);
			ds.get_range("omega", m.omega);
		} else if (cfg.dataset.kind == "pendulum") {
			ds.get("n_train", p.n_train);
			ds.get("n_test", p.n_test);
			ds.get("n_t_train", p.n_t_train);
			ds.get("n_t_test", p.n_t_test);
			ds.get("dt", p.dt);
			ds.get("substeps", p.substeps);
			ds.get("max_deflection", p.max_deflection);
			ds.get("g", p.g);
			ds.get("l", p.l);
			ds.get("seed", p.seed);
		} else if (cfg.dataset.kind == "wave") {
			ds.get("n_train", w.n_train);
			ds.get("n_test", w.n_test);
			ds.get("n_nodes", w.n_nodes);
			ds.get("n_t", w.n_t);
			ds.get("t_end", w.t_end);
			ds.get("diffusivity", w.diffusivity);
			ds.get("coupling", w.coupling);
			ds.get_range("stiffness", w.stiffness);
			ds.get_range("damping", w.damping);
			ds.get("input_amplitude", w.input_amplitude);
			ds.get("input_time_constant", w.input_time_constant);
			ds.get("seed", w.seed);
		}
		ds.finish();
	}
	{
		auto md = top.sub("model");
		if (!md.present())
			throw ConfigError("missing [model] table");
		std::string mode = "phin";
		md.get("mode", mode);
		cfg.model.kind = model_kind_from_string(mode);
		md.get("r", cfg.model.r);
		md.get("n_v", cfg.model.n_v);
		md.get_ints("autoencoder_layers", cfg.model.autoencoder_layers);
		md.get_ints("hypernetwork_layers", cfg.model.hypernetwork_layers);
		md.get("eps", cfg.model.eps);
		md.get("frozen_Q", cfg.model.frozen_Q);
		md.get("init_scale", cfg.model.init_scale);
		md.finish();
	}
	{
		auto ls = top.sub("loss");
		ls.get("rec", cfg.loss.rec);
		ls.get("ph", cfg.loss.ph);
		ls.get("con", cfg.loss.con);
		ls.get("l1", cfg.loss.l1);
		ls.finish();
	}
	{
		auto op = top.sub("optimizer");
		op.get("lr", cfg.optimizer.lr);
		op.get("batch_size", cfg.optimizer.batch_size);
		op.get("epochs", cfg.optimizer.epochs);
		auto es = op.sub("early_stopping");
		es.get("enabled", cfg.optimizer.early_stopping.enabled);
		es.get("patience", cfg.optimizer.early_stopping.patience);
		es.get("min_delta", cfg.optimizer.early_stopping.min_delta);
		es.get("val_fraction", cfg.optimizer.early_stopping.val_fraction);
		es.finish();
		op.finish();
	}
	{
		auto ev = top.sub("evaluation");
		std::string norm = "spectral";
		ev.get("jacobian_norm", norm);
		if (norm == "spectral")
			cfg.evaluation.jacobian_norm = metrics::JacobianNorm::Spectral;
		else if (norm == "frobenius")
			cfg.evaluation.jacobian_norm = metrics::JacobianNorm::Frobenius;
		else
			throw ConfigError("evaluation.jacobian_norm must be spectral or frobenius");
		if (ev.has("export_trajectories")) {
			bool flag = false;
			ev.get("export_trajectories", flag);
			cfg.evaluation.export_trajectories = flag;
		}
		ev.get("statespace_points", cfg.evaluation.statespace_points);
		ev.finish();
	}
	{
		auto out = top.sub("output");
		out.get("dir", cfg.output_dir);
		out.finish();
	}
	top.finish();
	cfg.validate();
	return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
	return parse_config(io::read_file(path));
}

} // namespace phid::exp
