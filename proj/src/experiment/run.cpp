#include "phid/experiment/run.hpp"

#include "phid/datasets/generators.hpp"
#include "phid/datasets/preprocessing.hpp"
#include "phid/datasets/reference_systems.hpp"
#include "phid/datasets/storage.hpp"
#include "phid/errors.hpp"
#include "phid/experiment/svg_plot.hpp"
#include "phid/io/csv.hpp"
#include "phid/io/hashing.hpp"
#include "phid/ph/serialization.hpp"
#include "phid/ph/statespace.hpp"
#include "phid/phin/serialization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

namespace phid::exp {

using nlohmann::json;
namespace fs = std::filesystem;

data::ScalingSpec default_scaling(const std::string& kind, int N)
{
	data::ScalingSpec s;
	if (kind == "msd") {
		s.fields = {{"state", N, 0.0}};
		s.scale_mu = true;
	} else if (kind == "wave") {
		const int n = N / 3;
		s.fields = {{"temperature", n, 0.0}, {"displacement", n, 0.0}, {"velocity", n, 0.0}};
		s.scale_mu = true;
		s.scale_u = true;
	} else if (kind == "pendulum") {
		s.fields = {{"position", 2, 0.0}, {"velocity", 2, 0.0}};
	}
	return s;
}

data::DatasetPair prepare_data(const ExperimentConfig& cfg, int jobs)
{
	data::DatasetPair pair;
	if (!cfg.dataset.path.empty()) {
		pair.train = data::load_dataset(fs::path(cfg.dataset.path) / "train");
		pair.test = data::load_dataset(fs::path(cfg.dataset.path) / "test");
		if (pair.train.kind != cfg.dataset.kind)
			throw ConfigError("dataset at " + cfg.dataset.path + " is of kind '" + pair.train.kind + "', config says '" +
			                  cfg.dataset.kind + "'");
		if (pair.train.N() != cfg.dataset.state_dim())
			throw ConfigError("dataset state dimension " + std::to_string(pair.train.N()) +
			                  " does not match the configuration");
	} else if (cfg.dataset.kind == "msd") {
		pair = data::generate_msd(cfg.dataset.msd, jobs);
	} else if (cfg.dataset.kind == "pendulum") {
		pair = data::generate_pendulum(cfg.dataset.pendulum, jobs);
	} else {
		pair = data::generate_wave_standin(cfg.dataset.wave, jobs);
	}
	if (cfg.dataset.normalize && !pair.train.scaling.applied)
		data::normalize_dataset(pair, default_scaling(cfg.dataset.kind, pair.train.N()));
	return pair;
}

SplitIndices validation_split(std::size_t n_sims, double val_fraction)
{
	std::size_t n_val = 0;
	if (n_sims >= 2)
		n_val = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(n_sims))),
		                                1, n_sims - 1);
	SplitIndices s;
	for (std::size_t i = 0; i < n_sims; ++i)
		(i + n_val < n_sims ? s.fit : s.val).push_back(i);
	return s;
}

namespace {

data::TrajectoryDataset subset(const data::TrajectoryDataset& ds, const std::vector<std::size_t>& idx)
{
	data::TrajectoryDataset out;
	out.kind = ds.kind;
	out.scaling = ds.scaling;
	out.generation = ds.generation;
	for (auto i : idx)
		out.sims.push_back(ds.sims[i]);
	return out;
}

data::SampleMatrix empty_samples(const data::TrajectoryDataset& ds)
{
	return {Mat(ds.N(), 0), Mat(ds.N(), 0), Mat(ds.n_p(), 0), Mat(ds.n_mu(), 0)};
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
	return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string mode_file_stem(ModelKind k)
{
	switch (k) {
	case ModelKind::Phin:
		return "phin";
	case ModelKind::AphinLinear:
		return "linear";
	case ModelKind::AphinNonlinear:
		return "nonlinear";
	}
	return "phin";
}

json loss_json(const phin::LossValues& v)
{
	return {{"total", v.total}, {"rec", v.rec}, {"ph", v.ph}, {"con", v.con}, {"l1", v.l1}};
}

void write_loss_curve(const fs::path& path, const std::vector<EpochRecord>& history)
{
	io::Table t;
	t.columns = {"epoch",     "train_total", "train_rec", "train_ph", "train_con", "train_l1",
	             "val_total", "val_rec",     "val_ph",    "val_con",  "val_l1"};
	t.values.resize(static_cast<Eigen::Index>(history.size()), static_cast<Eigen::Index>(t.columns.size()));
	for (std::size_t i = 0; i < history.size(); ++i) {
		const auto& h = history[i];
		t.values.row(static_cast<Eigen::Index>(i)) << h.epoch, h.train.total, h.train.rec, h.train.ph, h.train.con,
		    h.train.l1, h.val.total, h.val.rec, h.val.ph, h.val.con, h.val.l1;
	}
	io::write_csv(path, t);
}

std::vector<double> to_std(const Vec& v)
{
	return std::vector<double>(v.data(), v.data() + v.size());
}

void plot_errors(const fs::path& path, const Vec& t, const metrics::ErrorSeries& err, const std::string& title)
{
	PlotSpec spec;
	spec.title = title;
	spec.xlabel = "t";
	spec.ylabel = "relative error";
	spec.log_y = true;
	const double floor = 1e-16;
	Vec mean = Vec::Zero(t.size());
	for (const auto& e : err.per_sim) {
		spec.series.push_back({"", to_std(t), to_std(e.cwiseMax(floor)), "#b0b0b0", 1.0, false});
		mean += e / static_cast<double>(err.per_sim.size());
	}
	spec.series.push_back({"mean", to_std(t), to_std(mean.cwiseMax(floor)), "#d62728", 2.0, false});
	io::write_file(path, render_plot(spec));
}

void plot_loss(const fs::path& path, const std::vector<EpochRecord>& history)
{
	PlotSpec spec;
	spec.title = "training loss";
	spec.xlabel = "epoch";
	spec.ylabel = "loss";
	spec.log_y = true;
	Series tr{"train", {}, {}, "#1f77b4", 1.5, false};
	Series va{"validation", {}, {}, "#ff7f0e", 1.5, true};
	for (const auto& h : history) {
		tr.x.push_back(h.epoch);
		tr.y.push_back(std::max(h.train.total, 1e-300));
		va.x.push_back(h.epoch);
		va.y.push_back(std::max(h.val.total, 1e-300));
	}
	spec.series = {tr, va};
	io::write_file(path, render_plot(spec));
}

void plot_trajectory(const fs::path& path, const data::Simulation& sim, const Prediction& p)
{
	static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
	PlotSpec spec;
	spec.title = "test simulation 0: reference (solid) and prediction (dashed)";
	spec.xlabel = "t";
	spec.ylabel = "state";
	const auto t = to_std(sim.t);
	for (Eigen::Index i = 0; i < sim.X.cols(); ++i) {
		const std::string c = colors[i % 6];
		spec.series.push_back({"x_" + std::to_string(i), t, to_std(sim.X.col(i)), c, 1.5, false});
		spec.series.push_back({"", t, to_std(p.X.col(i)), c, 1.5, true});
	}
	io::write_file(path, render_plot(spec));
}

json statespace_check(const ae::Autoencoder& ae, const phin::PhinModel& model, const data::TrajectoryDataset& ds,
                      int n_points)
{
	json out = {{"points", 0}, {"max_skew_defect", 0.0}, {"min_eig_R", nullptr}};
	if (n_points == 0 || ds.sims.empty())
		return out;
	const auto total = static_cast<std::size_t>(ds.sims.size()) * static_cast<std::size_t>(ds.n_t());
	double max_skew = 0.0;
	double min_eig = INFINITY;
	for (int k = 0; k < n_points; ++k) {
		const std::size_t flat = total * static_cast<std::size_t>(k) / static_cast<std::size_t>(n_points);
		const auto& sim = ds.sims[flat / static_cast<std::size_t>(ds.n_t())];
		const auto row = static_cast<Eigen::Index>(flat % static_cast<std::size_t>(ds.n_t()));
		const Vec z = ae.encode(Vec(sim.X.row(row).transpose()));
		const auto ss = ph::reconstruct_statespace_ph(ae, model.system(sim.mu), z);
		max_skew = std::max(max_skew, ss.skew_defect);
		min_eig = std::min(min_eig, ss.min_eig_R);
	}
	out["points"] = n_points;
	out["max_skew_defect"] = max_skew;
	out["min_eig_R"] = min_eig;
	return out;
}

json msd_matrices(const phin::PhinModel& model, const data::TrajectoryDataset& test, int n_links, int count)
{
	json out = json::array();
	const auto& sc = test.scaling;
	for (int s = 0; s < std::min<int>(count, static_cast<int>(test.sims.size())); ++s) {
		const Vec mu = test.sims[static_cast<std::size_t>(s)].mu;
		const Vec raw = sc.scale_mu && sc.applied ? Vec(mu.cwiseProduct(sc.mu.max - sc.mu.min) + sc.mu.min) : mu;
		auto ref = ph::normalize_to_identity_Q(
		               data::msd_reference_system(data::MSDParameters::uniform(raw(0), raw(1), raw(2), n_links)))
		               .system;
		// a uniform state factor leaves J and R unchanged and scales B
		if (sc.applied && sc.fields.size() == 1)
			ref.B *= sc.fields.front().factor;
		out.push_back({{"sim", s},
		               {"mu", to_std(raw)},
		               {"identified", ph::to_json(model.system(mu))},
		               {"reference", ph::to_json(ref)}});
	}
	return out;
}

} // namespace

json split_metrics(const Evaluation& ev)
{
	json j = ev.report.summary();
	j["dissipation_violations"] = ev.dissipation_violations;
	j["max_energy_balance_residual"] = ev.max_balance_residual;
	return j;
}

void write_trajectory_csv(const fs::path& path, const Vec& t, const std::vector<Mat>& X, const std::vector<Mat>& Xdot)
{
	io::Table table;
	table.columns.push_back("t");
	Eigen::Index width = 1;
	for (std::size_t s = 0; s < X.size(); ++s)
		width += 2 * X[s].cols();
	table.values.resize(t.size(), width);
	table.values.col(0) = t;
	Eigen::Index c = 1;
	for (std::size_t s = 0; s < X.size(); ++s) {
		if (X[s].rows() != t.size() || Xdot[s].rows() != t.size() || Xdot[s].cols() != X[s].cols())
			throw DimensionError("write_trajectory_csv: trajectory shapes disagree with the time axis");
		for (Eigen::Index i = 0; i < X[s].cols(); ++i) {
			table.columns.push_back("x_" + std::to_string(i) + "_" + std::to_string(s));
			table.columns.push_back("x_" + std::to_string(i) + "_dt_" + std::to_string(s));
			table.values.col(c++) = X[s].col(i);
			table.values.col(c++) = Xdot[s].col(i);
		}
	}
	io::write_csv(path, table);
}

void write_manifest(const fs::path& dir)
{
	std::vector<std::string> names;
	for (const auto& e : fs::directory_iterator(dir))
		if (e.is_regular_file() && e.path().filename() != "manifest.json")
			names.push_back(e.path().filename().string());
	std::sort(names.begin(), names.end());
	json files = json::array();
	for (const auto& n : names) {
		const std::string bytes = io::read_file(dir / n);
		files.push_back({{"name", n}, {"hash", io::git_blob_hash(bytes)}, {"bytes", bytes.size()}});
	}
	io::write_file(dir / "manifest.json", json{{"schema_version", 1}, {"files", files}}.dump(2) + '\n');
}

std::vector<std::string> verify_manifest(const fs::path& dir)
{
	std::vector<std::string> bad;
	const json m = json::parse(io::read_file(dir / "manifest.json"));
	for (const auto& f : m.at("files")) {
		const auto name = f.at("name").get<std::string>();
		if (!fs::exists(dir / name) || io::git_blob_hash_file(dir / name) != f.at("hash").get<std::string>())
			bad.push_back(name);
	}
	return bad;
}

InitialModels build_models(const ExperimentConfig& cfg, const data::TrajectoryDataset& fit)
{
	const int N = fit.N();
	const auto& m = cfg.model;
	InitialModels out;
	switch (m.kind) {
	case ModelKind::Phin:
		out.autoencoder = ae::make_identity(N);
		break;
	case ModelKind::AphinLinear:
		out.autoencoder = ae::make_linear(ae::fit_pca(fit.snapshot_matrix(), m.r));
		break;
	case ModelKind::AphinNonlinear: {
		std::optional<ae::PcaBasis> pca;
		if (m.n_v > 0)
			pca = ae::fit_pca(fit.snapshot_matrix(), m.n_v);
		out.autoencoder = ae::make_nonlinear(N, m.r, m.autoencoder_layers, pca, cfg.seed);
		break;
	}
	}
	ph::PhLayout layout;
	layout.r = m.r;
	layout.n_p = fit.n_p();
	layout.eps = m.eps;
	layout.frozen_Q = m.frozen_Q;
	if (cfg.parametric())
		out.phin = phin::make_parametric(layout, fit.n_mu(), m.hypernetwork_layers, cfg.seed + 2);
	else
		out.phin = phin::make_phin(layout, cfg.seed + 2, m.init_scale);
	return out;
}

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& opt)
{
	RunResult res;
	res.config = config;
	if (opt.seed)
		res.config.seed = *opt.seed;
	const auto& cfg = res.config;
	cfg.validate();
	if (opt.out_dir.empty())
		throw ConfigError("run_experiment: no output directory");
	res.out_dir = opt.out_dir;
	fs::create_directories(res.out_dir);
	const fs::path& dir = res.out_dir;
	auto log = [&](const std::string& msg) {
		if (opt.log)
			*opt.log << msg << std::endl;
	};

	if (!opt.config_text.empty())
		io::write_file(dir / "config.toml", opt.config_text);

	json timings;
	auto t0 = std::chrono::steady_clock::now();
	res.data = prepare_data(cfg, opt.jobs);
	timings["data_seconds"] = seconds_since(t0);
	log("data: " + std::to_string(res.data.train.sims.size()) + " train / " +
	    std::to_string(res.data.test.sims.size()) + " test sims, N = " + std::to_string(res.data.train.N()));

	const auto split = validation_split(res.data.train.sims.size(), cfg.optimizer.early_stopping.val_fraction);
	const auto fit = subset(res.data.train, split.fit);
	const auto val = subset(res.data.train, split.val);
	const auto fit_samples = data::flatten_samples(fit);
	const auto val_samples = val.sims.empty() ? empty_samples(fit) : data::flatten_samples(val);

	auto init = build_models(cfg, fit);
	TrainOptions topt;
	topt.lr = cfg.optimizer.lr;
	topt.batch_size = cfg.optimizer.batch_size;
	topt.epochs = cfg.optimizer.epochs;
	topt.early_stopping = cfg.optimizer.early_stopping;
	topt.shuffle_seed = cfg.seed + 3;
	if (opt.log)
		topt.on_epoch = [&](const EpochRecord& r) {
			if (r.epoch == 1 || r.epoch % 100 == 0)
				log("epoch " + std::to_string(r.epoch) + "  train " + io::format_double(r.train.total) + "  val " +
				    io::format_double(r.val.total));
		};

	auto model_metadata = [&](const TrainResult& tr) {
		return json{{"dataset_kind", cfg.dataset.kind},
		            {"model_mode", to_string(cfg.model.kind)},
		            {"scaling", data::to_json(res.data.train.scaling)},
		            {"best_epoch", tr.best_epoch},
		            {"epochs_run", tr.epochs_run}};
	};

	t0 = std::chrono::steady_clock::now();
	try {
		res.training = train(init.autoencoder, init.phin, fit_samples, val_samples, cfg.loss, topt);
	} catch (const TrainingDiverged& e) {
		phin::save_model({e.last_good.autoencoder, e.last_good.phin, model_metadata(e.last_good)},
		                 dir / "model_last_good.json");
		throw;
	}
	const double train_seconds = seconds_since(t0);
	timings["training_seconds"] = train_seconds;
	timings["training_seconds_per_epoch"] = train_seconds / std::max(1, res.training.epochs_run);
	log("training: " + std::to_string(res.training.epochs_run) + " epochs, best " +
	    std::to_string(res.training.best_epoch) + ", val loss " + io::format_double(res.training.best_val_loss));

	const auto& ae = res.training.autoencoder;
	const auto& model = res.training.phin;
	phin::save_model({ae, model, model_metadata(res.training)}, dir / "model.json");

	t0 = std::chrono::steady_clock::now();
	res.test_eval = evaluate(ae, model, res.data.test, cfg.evaluation.jacobian_norm, opt.jobs);
	const double eval_seconds = seconds_since(t0);
	timings["evaluation_seconds_per_run"] =
	    res.data.test.sims.empty() ? 0.0 : eval_seconds / static_cast<double>(res.data.test.sims.size());
	res.train_eval = evaluate(ae, model, res.data.train, cfg.evaluation.jacobian_norm, opt.jobs);

	res.metrics = {{"name", cfg.name},
	               {"seed", cfg.seed},
	               {"dataset", cfg.dataset.kind},
	               {"mode", to_string(cfg.model.kind)},
	               {"train", split_metrics(res.train_eval)},
	               {"test", split_metrics(res.test_eval)},
	               {"training",
	                {{"epochs_run", res.training.epochs_run},
	                 {"best_epoch", res.training.best_epoch},
	                 {"best_val_loss", res.training.best_val_loss},
	                 {"stopped_early", res.training.stopped_early},
	                 {"final", res.training.history.empty() ? json(nullptr)
	                                                        : json{{"train", loss_json(res.training.history.back().train)},
	                                                               {"val", loss_json(res.training.history.back().val)}}}}},
	               {"statespace", statespace_check(ae, model, res.data.test, cfg.evaluation.statespace_points)}};
	io::write_file(dir / "metrics.json", res.metrics.dump(2) + '\n');
	log("test: mean state error " + io::format_double(res.test_eval.report.e_x.mean) + ", mean latent error " +
	    io::format_double(res.test_eval.report.e_z.mean));

	write_loss_curve(dir / "loss_curve.csv", res.training.history);
	plot_loss(dir / "loss_curve.svg", res.training.history);
	for (const auto* split_name : {"train", "test"}) {
		const bool is_test = std::string(split_name) == "test";
		const auto& ev = is_test ? res.test_eval : res.train_eval;
		const auto& ds = is_test ? res.data.test : res.data.train;
		if (ds.sims.empty())
			continue;
		const Vec& t = ds.sims.front().t;
		metrics::write_error_csv(dir / ("rms_error_state_" + std::string(split_name) + ".csv"), t, ev.report.e_x, "all");
		metrics::write_error_csv(dir / ("rms_error_latent_" + std::string(split_name) + ".csv"), t, ev.report.e_z,
		                         "all", "error_latent_error");
		for (const auto& [field, err] : ev.report.e_x_fields)
			metrics::write_error_csv(dir / ("rms_error_state_" + field + "_" + split_name + ".csv"), t, err, field);
		if (is_test) {
			plot_errors(dir / "error_state_test.svg", t, ev.report.e_x, "relative state error (test)");
			for (const auto& [field, err] : ev.report.e_x_fields)
				plot_errors(dir / ("error_state_" + field + "_test.svg"), t, err,
				            "relative state error, " + field + " (test)");
		}
	}

	const bool export_traj = cfg.evaluation.export_trajectories.value_or(res.data.test.N() <= ae::kPcaThreshold);
	if (export_traj && !res.data.test.sims.empty()) {
		std::vector<Mat> X, Xdot, Xp, Xpd;
		for (std::size_t s = 0; s < res.data.test.sims.size(); ++s) {
			X.push_back(res.data.test.sims[s].X);
			Xdot.push_back(res.data.test.sims[s].Xdot);
			Xp.push_back(res.test_eval.predictions[s].X);
			Xpd.push_back(res.test_eval.predictions[s].Xdot);
		}
		const Vec& t = res.data.test.sims.front().t;
		write_trajectory_csv(dir / "reference.csv", t, X, Xdot);
		write_trajectory_csv(dir / (mode_file_stem(cfg.model.kind) + ".csv"), t, Xp, Xpd);
		plot_trajectory(dir / "trajectory_test_0.svg", res.data.test.sims.front(), res.test_eval.predictions.front());
	}
	if (cfg.dataset.kind == "msd")
		io::write_file(dir / "matrices.json",
		               msd_matrices(model, res.data.test, cfg.dataset.msd.n_links, 5).dump(2) + '\n');

	io::write_file(dir / "timings.json", timings.dump(2) + '\n');
	write_manifest(dir);
	return res;
}

} // namespace phid::exp
