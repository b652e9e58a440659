#pragma once

#include "phid/diffkit/adam.hpp"
#include "phid/diffkit/graph.hpp"
#include "phid/diffkit/mlp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace phid::ae {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class Mode { Identity, Linear, Nonlinear };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

/// Nonlinear autoencoders consume raw states up to this dimension and go
/// through a PCA outer layer above it.
inline constexpr int kPcaThreshold = 64;

struct PcaBasis {
	Mat V;               // N x n_v, orthonormal columns
	Vec singular_values; // all singular values of the snapshot matrix, descending

	/// Fraction of squared singular-value energy captured by the first n_v modes.
	double captured_energy() const;
};

/// Leading n_v left singular vectors of the uncentered N x n_data snapshot
/// matrix. Each column is signed so its largest-magnitude entry is positive.
PcaBasis fit_pca(const Mat& snapshots, int n_v);

/// Encoder/decoder pair. Identity: z = x. Linear: z = V^T x, x = V z.
/// Nonlinear: z = enc(V^T x), x = V dec(z) with PCA, or z = enc(x),
/// x = dec(z) without.
struct Autoencoder {
	Mode mode = Mode::Identity;
	int N = 0;
	int n_v = 0;
	int r = 0;
	std::optional<Mat> V;
	Vec singular_values;
	diffkit::MLPWeights encoder;
	diffkit::MLPWeights decoder;

	bool has_pca() const { return V.has_value(); }
	void validate() const;

	/// Batched maps; samples are columns.
	Mat encode(const Mat& X) const;
	Mat decode(const Mat& Z) const;
	Vec encode(const Vec& x) const;
	Vec decode(const Vec& z) const;

	/// D_x enc(x) v and D_z dec(z) v.
	Mat encode_jvp(const Mat& X, const Mat& V_tangent) const;
	Mat decode_jvp(const Mat& Z, const Mat& Z_tangent) const;
	Vec encode_jvp(const Vec& x, const Vec& v) const;
	Vec decode_jvp(const Vec& z, const Vec& v) const;

	/// N x r Jacobian of the decoder, one tangent sweep per latent direction.
	Mat decoder_jacobian(const Vec& z) const;
};

Autoencoder make_identity(int N);
Autoencoder make_linear(const PcaBasis& pca);
/// `hidden` lists the encoder hidden widths; the decoder mirrors them.
/// Pass a basis when N > kPcaThreshold (required then).
Autoencoder make_nonlinear(int N, int r, const std::vector<int>& hidden,
                           const std::optional<PcaBasis>& pca, std::uint64_t seed);

/// Graph handles for training: weights as leaves, V as a constant.
struct AutoencoderNodes {
	std::optional<diffkit::NodeId> V;
	std::optional<diffkit::NodeId> Vt;
	diffkit::MlpNodes encoder;
	diffkit::MlpNodes decoder;
};

AutoencoderNodes bind(diffkit::Graph& g, const Autoencoder& ae, bool trainable);

diffkit::NodeId encode(diffkit::Graph& g, const Autoencoder& ae, const AutoencoderNodes& n,
                       diffkit::NodeId X);
/// Encoder value and D_x enc(x) v.
diffkit::JvpNodes encode_jvp(diffkit::Graph& g, const Autoencoder& ae, const AutoencoderNodes& n,
                             diffkit::NodeId X, diffkit::NodeId V_tangent);
diffkit::JvpNodes decode_jvp(diffkit::Graph& g, const Autoencoder& ae, const AutoencoderNodes& n,
                             diffkit::NodeId Z, diffkit::NodeId Z_tangent);
diffkit::NodeId decode(diffkit::Graph& g, const Autoencoder& ae, const AutoencoderNodes& n,
                       diffkit::NodeId Z);

/// Trainable weight segments (empty for identity/linear modes).
std::vector<diffkit::NamedParam> trainable_parameters(Autoencoder& ae);
/// Leaf nodes in the same order as trainable_parameters().
std::vector<diffkit::NodeId> trainable_leaves(const AutoencoderNodes& n);

/// V as a row-major float64 file `<stem>.bin` plus `<stem>.json`
/// holding {N, n_v, singular_values}.
void save_basis(const PcaBasis& pca, const std::filesystem::path& stem);
PcaBasis load_basis(const std::filesystem::path& stem);

} // namespace phid::ae
