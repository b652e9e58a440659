#include "phid/experiment/training.hpp"

#include "phid/diffkit/adam.hpp"
#include "phid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace phid::exp {

data::SampleMatrix gather(const data::SampleMatrix& s, const std::vector<Eigen::Index>& cols)
{
	const auto n = static_cast<Eigen::Index>(cols.size());
	data::SampleMatrix out{Mat(s.X.rows(), n), Mat(s.Xdot.rows(), n), Mat(s.U.rows(), n), Mat(s.Mu.rows(), n)};
	for (Eigen::Index j = 0; j < n; ++j) {
		const auto c = cols[static_cast<std::size_t>(j)];
		out.X.col(j) = s.X.col(c);
		out.Xdot.col(j) = s.Xdot.col(c);
		out.U.col(j) = s.U.col(c);
		out.Mu.col(j) = s.Mu.col(c);
	}
	return out;
}

phin::Batch to_batch(const data::SampleMatrix& s)
{
	return {s.X, s.Xdot, s.U, s.Mu};
}

namespace {

void accumulate(phin::LossValues& acc, const phin::LossValues& v, double w)
{
	acc.rec += w * v.rec;
	acc.ph += w * v.ph;
	acc.con += w * v.con;
	acc.l1 += w * v.l1;
	acc.total += w * v.total;
}

/// Validation loss in chunks so wide datasets stay within memory.
phin::LossValues chunked_loss(const ae::Autoencoder& ae, const phin::PhinModel& model,
                              const data::SampleMatrix& s, const phin::LossWeights& lambda)
{
	const Eigen::Index n = s.X.cols();
	const Eigen::Index chunk = 4096;
	phin::LossValues acc;
	for (Eigen::Index b = 0; b < n; b += chunk) {
		const auto m = std::min(chunk, n - b);
		const phin::Batch batch{s.X.middleCols(b, m), s.Xdot.middleCols(b, m), s.U.middleCols(b, m),
		                        s.Mu.middleCols(b, m)};
		auto v = phin::evaluate_loss(ae, model, batch, lambda);
		// The L1 term does not depend on the data; keep it unweighted.
		const double w = static_cast<double>(m) / static_cast<double>(n);
		const double l1 = v.l1;
		accumulate(acc, v, w);
		acc.total += lambda.l1 * l1 * (1.0 - w);
		acc.l1 += l1 * (1.0 - w);
	}
	return acc;
}

bool finite(const phin::LossValues& v)
{
	return std::isfinite(v.total) && std::isfinite(v.rec) && std::isfinite(v.ph) && std::isfinite(v.con);
}

} // namespace

TrainResult train(ae::Autoencoder ae, phin::PhinModel model, const data::SampleMatrix& train_set,
                  const data::SampleMatrix& val_set, const phin::LossWeights& lambda,
                  const TrainOptions& opt)
{
	const Eigen::Index n = train_set.X.cols();
	if (n < 1)
		throw ConfigError("training set is empty");
	if (opt.batch_size < 1 || opt.epochs < 1)
		throw ConfigError("batch_size and epochs must be >= 1");
	const bool has_val = val_set.X.cols() > 0;

	std::vector<diffkit::NamedParam> params = ae::trainable_parameters(ae);
	const auto ph_params = phin::trainable_parameters(model);
	params.insert(params.end(), ph_params.begin(), ph_params.end());

	diffkit::AdamState adam;
	adam.lr = opt.lr;
	std::mt19937_64 rng(opt.shuffle_seed);
	std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
	std::iota(order.begin(), order.end(), Eigen::Index{0});

	TrainResult best;
	best.autoencoder = ae;
	best.phin = model;
	best.best_val_loss = INFINITY;
	std::vector<EpochRecord> history;
	int since_best = 0;
	int epoch = 0;
	bool stopped = false;

	auto snapshot = [&] {
		TrainResult r = best;
		r.history = history;
		r.epochs_run = epoch;
		r.stopped_early = stopped;
		return r;
	};

	for (epoch = 1; epoch <= opt.epochs; ++epoch) {
		std::shuffle(order.begin(), order.end(), rng);
		EpochRecord rec;
		rec.epoch = epoch;
		for (Eigen::Index start = 0; start < n; start += opt.batch_size) {
			const auto m = std::min<Eigen::Index>(opt.batch_size, n - start);
			const std::vector<Eigen::Index> cols(order.begin() + start, order.begin() + start + m);
			const auto batch = to_batch(gather(train_set, cols));
			phin::LossGradient lg;
			try {
				lg = phin::loss_gradient(ae, model, batch, lambda);
				diffkit::adam_step(params, lg.grads, adam);
			} catch (const NumericalError& e) {
				throw TrainingDiverged(std::string("epoch ") + std::to_string(epoch) + ": " + e.what(),
				                       snapshot());
			}
			accumulate(rec.train, lg.values, static_cast<double>(m) / static_cast<double>(n));
		}
		rec.val = has_val ? chunked_loss(ae, model, val_set, lambda) : rec.train;
		if (!finite(rec.val) || !finite(rec.train))
			throw TrainingDiverged("epoch " + std::to_string(epoch) + ": loss is not finite", snapshot());
		history.push_back(rec);
		if (opt.on_epoch)
			opt.on_epoch(rec);

		if (rec.val.total < best.best_val_loss - opt.early_stopping.min_delta) {
			best.autoencoder = ae;
			best.phin = model;
			best.best_val_loss = rec.val.total;
			best.best_epoch = epoch;
			since_best = 0;
		} else if (++since_best >= opt.early_stopping.patience && opt.early_stopping.enabled) {
			stopped = true;
			break;
		}
	}
	if (epoch > opt.epochs)
		epoch = opt.epochs;
	return snapshot();
}

} // namespace phid::exp
