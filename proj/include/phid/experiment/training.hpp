#pragma once

#include "phid/autoencoder/autoencoder.hpp"
#include "phid/datasets/preprocessing.hpp"
#include "phid/errors.hpp"
#include "phid/experiment/config.hpp"
#include "phid/phin/losses.hpp"
#include "phid/phin/phin.hpp"

#include <functional>
#include <string>
#include <vector>

namespace phid::exp {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct EpochRecord {
	int epoch = 0;
	phin::LossValues train; // sample-weighted mean over the epoch's batches
	phin::LossValues val;   // on the validation sims (equal to train if none)
};

struct TrainOptions {
	double lr = 1e-3;
	int batch_size = 64;
	int epochs = 100;
	EarlyStopping early_stopping;
	std::uint64_t shuffle_seed = 1;
	/// Called after every epoch (progress reporting); may be empty.
	std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
	ae::Autoencoder autoencoder; // best checkpoint
	phin::PhinModel phin;
	std::vector<EpochRecord> history;
	int best_epoch = 0;
	double best_val_loss = 0.0;
	int epochs_run = 0;
	bool stopped_early = false;
};

/// Thrown when the loss turns non-finite; carries the last checkpoint whose
/// losses were finite.
class TrainingDiverged : public NumericalError {
public:
	TrainingDiverged(const std::string& what, TrainResult last_good)
	    : NumericalError(what), last_good(std::move(last_good))
	{
	}
	TrainResult last_good;
};

/// ADAM over minibatches of individual (t, mu) samples, reshuffled every
/// epoch. Early stopping tracks the total loss on `val`; the returned model
/// is the checkpoint with the lowest validation loss.
TrainResult train(ae::Autoencoder ae, phin::PhinModel model, const data::SampleMatrix& train_set,
                  const data::SampleMatrix& val_set, const phin::LossWeights& lambda,
                  const TrainOptions& opt);

/// Column subset of a sample matrix.
data::SampleMatrix gather(const data::SampleMatrix& s, const std::vector<Eigen::Index>& cols);
phin::Batch to_batch(const data::SampleMatrix& s);

} // namespace phid::exp
