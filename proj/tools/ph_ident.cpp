#include "phid/datasets/generators.hpp"
#include "phid/datasets/preprocessing.hpp"
#include "phid/datasets/storage.hpp"
#include "phid/errors.hpp"
#include "phid/experiment/config.hpp"
#include "phid/experiment/evaluation.hpp"
#include "phid/experiment/run.hpp"
#include "phid/io/hashing.hpp"
#include "phid/phin/serialization.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace phid;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

fs::path default_root()
{
	const char* env = std::getenv("PH_IDENT_OUT");
	return env && *env ? fs::path(env) : fs::path("runs");
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out, int jobs,
            bool quiet)
{
	const std::string text = io::read_file(config_path);
	const auto cfg = exp::parse_config(text);
	exp::RunOptions opt;
	opt.seed = seed;
	opt.jobs = jobs;
	opt.config_text = text;
	opt.log = quiet ? nullptr : &std::cerr;
	if (!out.empty())
		opt.out_dir = out;
	else if (!cfg.output_dir.empty())
		opt.out_dir = cfg.output_dir;
	else
		opt.out_dir = default_root() / cfg.name;
	const auto res = exp::run_experiment(cfg, opt);
	std::cout << "run written to " << res.out_dir.string() << '\n';
	std::cout << "test mean state error  " << res.test_eval.report.e_x.mean << '\n';
	std::cout << "test mean latent error " << res.test_eval.report.e_z.mean << '\n';
	std::cout << "test e_proj " << res.test_eval.report.projection.e_proj << "  e_jac "
	          << res.test_eval.report.projection.e_jac << '\n';
	return 0;
}

int cmd_generate(const std::string& kind, const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out, int jobs)
{
	exp::DatasetSpec spec;
	if (!config_path.empty()) {
		spec = exp::load_config(config_path).dataset;
		if (spec.kind != kind)
			throw ConfigError("--dataset " + kind + " conflicts with dataset.kind = " + spec.kind + " in " + config_path);
	}
	spec.kind = kind;
	data::DatasetPair pair;
	if (kind == "msd") {
		if (seed)
			spec.msd.seed = *seed;
		pair = data::generate_msd(spec.msd, jobs);
	} else if (kind == "pendulum") {
		if (seed)
			spec.pendulum.seed = *seed;
		pair = data::generate_pendulum(spec.pendulum, jobs);
	} else if (kind == "wave") {
		if (seed)
			spec.wave.seed = *seed;
		pair = data::generate_wave_standin(spec.wave, jobs);
	} else {
		throw ConfigError("--dataset must be msd, pendulum or wave");
	}
	const fs::path dir = out.empty() ? default_root() / ("data_" + kind) : fs::path(out);
	data::save_dataset(pair.train, dir / "train");
	data::save_dataset(pair.test, dir / "test");
	std::cout << "dataset written to " << dir.string() << " (" << pair.train.sims.size() << " train, "
	          << pair.test.sims.size() << " test simulations)\n";
	return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_dir, const std::string& out, int jobs,
                 const std::string& norm)
{
	const auto model = phin::load_model(model_path);
	fs::path dir = data_dir;
	if (!fs::exists(dir / "meta.json") && fs::exists(dir / "test" / "meta.json"))
		dir /= "test";
	auto ds = data::load_dataset(dir);
	if (!ds.scaling.applied && model.metadata.contains("scaling"))
		data::apply_scaling(ds, data::scaling_from_json(model.metadata.at("scaling")));

	metrics::JacobianNorm jn = metrics::JacobianNorm::Spectral;
	if (norm == "frobenius")
		jn = metrics::JacobianNorm::Frobenius;
	else if (norm != "spectral")
		throw ConfigError("--jacobian-norm must be spectral or frobenius");

	const auto ev = exp::evaluate(model.autoencoder, model.phin, ds, jn, jobs);
	const auto j = exp::split_metrics(ev);
	if (!out.empty()) {
		fs::create_directories(out);
		io::write_file(fs::path(out) / "metrics.json", j.dump(2) + '\n');
		if (!ds.sims.empty())
			metrics::write_error_csv(fs::path(out) / "rms_error_state.csv", ds.sims.front().t, ev.report.e_x, "all");
	}
	std::cout << j.dump(2) << '\n';
	return 0;
}

int cmd_report(const std::string& run_dir)
{
	const fs::path dir = run_dir;
	const auto m = nlohmann::json::parse(io::read_file(dir / "metrics.json"));
	std::cout << "run " << m.value("name", "?") << "  dataset " << m.value("dataset", "?") << "  mode "
	          << m.value("mode", "?") << "  seed " << m.value("seed", 0) << '\n';
	for (const char* split : {"train", "test"}) {
		if (!m.contains(split))
			continue;
		const auto& s = m.at(split);
		std::cout << split << ": mean state error " << s.at("mean_state_error") << ", mean latent error "
		          << s.at("mean_latent_error") << ", e_proj " << s.at("e_proj") << ", e_jac " << s.at("e_jac") << '\n';
	}
	if (m.contains("training"))
		std::cout << "training: " << m.at("training").at("epochs_run") << " epochs, best epoch "
		          << m.at("training").at("best_epoch") << '\n';
	if (fs::exists(dir / "timings.json")) {
		const auto t = nlohmann::json::parse(io::read_file(dir / "timings.json"));
		std::cout << "timings: " << t.dump() << '\n';
	}
	if (fs::exists(dir / "manifest.json")) {
		const auto bad = exp::verify_manifest(dir);
		if (!bad.empty()) {
			for (const auto& b : bad)
				std::cerr << "manifest mismatch: " << b << '\n';
			return 1;
		}
		std::cout << "manifest: all hashes match\n";
	}
	return 0;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Port-Hamiltonian system identification from trajectory data"};
	app.require_subcommand(1);
	int jobs = 1;
	app.add_option("--jobs", jobs, "Worker threads for data generation and evaluation")->check(CLI::PositiveNumber);

	auto* run = app.add_subcommand("run", "Train and evaluate from a TOML configuration");
	std::string config_path, out;
	std::uint64_t seed_value = 0;
	bool quiet = false;
	run->add_option("--config", config_path, "Experiment configuration")->required()->check(CLI::ExistingFile);
	auto* run_seed = run->add_option("--seed", seed_value, "Override the run seed");
	run->add_option("--out", out, "Output directory");
	run->add_flag("--quiet", quiet, "No progress output");

	auto* gen = app.add_subcommand("generate", "Generate a train/test dataset");
	std::string kind, gen_config, gen_out;
	std::uint64_t gen_seed_value = 0;
	gen->add_option("--dataset", kind, "msd, pendulum or wave")->required();
	gen->add_option("--config", gen_config, "Take generation parameters from this configuration")
	    ->check(CLI::ExistingFile);
	auto* gen_seed = gen->add_option("--seed", gen_seed_value, "Dataset seed");
	gen->add_option("--out", gen_out, "Output directory");

	auto* eval = app.add_subcommand("evaluate", "Evaluate a trained model on a dataset");
	std::string model_path, data_dir, eval_out, norm = "spectral";
	eval->add_option("--model", model_path, "Trained model file")->required()->check(CLI::ExistingFile);
	eval->add_option("--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
	eval->add_option("--out", eval_out, "Write metrics here");
	eval->add_option("--jacobian-norm", norm, "spectral or frobenius");

	auto* report = app.add_subcommand("report", "Summarize a finished run");
	std::string run_dir;
	report->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError& e) {
		const int code = app.exit(e);
		return code == 0 ? 0 : kExitConfig;
	}

	try {
		if (*run)
			return cmd_run(config_path, run_seed->count() ? std::optional(seed_value) : std::nullopt, out, jobs, quiet);
		if (*gen)
			return cmd_generate(kind, gen_config, gen_seed->count() ? std::optional(gen_seed_value) : std::nullopt,
			                    gen_out, jobs);
		if (*eval)
			return cmd_evaluate(model_path, data_dir, eval_out, jobs, norm);
		if (*report)
			return cmd_report(run_dir);
	} catch (const ConfigError& e) {
		std::cerr << "configuration error: " << e.what() << '\n';
		return kExitConfig;
	} catch (const NumericalError& e) {
		std::cerr << "numerical failure: " << e.what() << '\n';
		return kExitNumerical;
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << '\n';
		return 1;
	}
	return 0;
}
