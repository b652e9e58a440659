#include "phid/autoencoder/autoencoder.hpp"

#include "phid/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace phid::ae {

std::string to_string(Mode m)
{
	switch (m) {
	case Mode::Identity:
		return "identity";
	case Mode::Linear:
		return "linear";
	case Mode::Nonlinear:
		return "nonlinear";
	}
	return "identity";
}

Mode mode_from_string(const std::string& s)
{
	if (s == "identity")
		return Mode::Identity;
	if (s == "linear")
		return Mode::Linear;
	if (s == "nonlinear")
		return Mode::Nonlinear;
	throw ConfigError("unknown autoencoder mode '" + s + "'");
}

double PcaBasis::captured_energy() const
{
	const double total = singular_values.squaredNorm();
	if (total == 0.0)
		return 1.0;
	return singular_values.head(V.cols()).squaredNorm() / total;
}

PcaBasis fit_pca(const Mat& snapshots, int n_v)
{
	const auto lim = std::min(snapshots.rows(), snapshots.cols());
	if (n_v < 1 || n_v > lim)
		throw ConfigError("fit_pca: n_v = " + std::to_string(n_v) + " must lie in [1, " +
		                  std::to_string(lim) + "]");
	if (!snapshots.allFinite())
		throw NumericalError("fit_pca: snapshot matrix contains non-finite values");

	Eigen::BDCSVD<Mat> svd(snapshots, Eigen::ComputeThinU);
	PcaBasis out;
	out.singular_values = svd.singularValues();
	out.V = svd.matrixU().leftCols(n_v);
	for (int j = 0; j < n_v; ++j) {
		Eigen::Index imax = 0;
		out.V.col(j).cwiseAbs().maxCoeff(&imax);
		if (out.V(imax, j) < 0.0)
			out.V.col(j) *= -1.0;
	}
	return out;
}

void Autoencoder::validate() const
{
	if (N < 1 || r < 1)
		throw ConfigError("autoencoder: dimensions must be positive");
	switch (mode) {
	case Mode::Identity:
		if (r != N)
			throw ConfigError("identity autoencoder requires r = N");
		break;
	case Mode::Linear:
		if (!V || V->rows() != N || V->cols() != r)
			throw ConfigError("linear autoencoder requires an N x r basis");
		break;
	case Mode::Nonlinear: {
		const int inner = V ? static_cast<int>(V->cols()) : N;
		if (V && V->rows() != N)
			throw ConfigError("autoencoder basis has wrong row count");
		encoder.validate();
		decoder.validate();
		if (encoder.input_width() != inner || encoder.output_width() != r)
			throw ConfigError("encoder must map " + std::to_string(inner) + " -> " + std::to_string(r));
		if (decoder.input_width() != r || decoder.output_width() != inner)
			throw ConfigError("decoder must map " + std::to_string(r) + " -> " + std::to_string(inner));
		break;
	}
	}
}

namespace {

void check_rows(const Mat& X, int rows, const char* what)
{
	if (X.rows() != rows)
		throw DimensionError(std::string(what) + ": expected " + std::to_string(rows) +
		                     " rows, got " + std::to_string(X.rows()));
}

} // namespace

Mat Autoencoder::encode(const Mat& X) const
{
	check_rows(X, N, "encode");
	switch (mode) {
	case Mode::Identity:
		return X;
	case Mode::Linear:
		return V->transpose() * X;
	case Mode::Nonlinear:
		return V ? diffkit::mlp_apply(encoder, Mat(V->transpose() * X)) : diffkit::mlp_apply(encoder, X);
	}
	return X;
}

Mat Autoencoder::decode(const Mat& Z) const
{
	check_rows(Z, r, "decode");
	switch (mode) {
	case Mode::Identity:
		return Z;
	case Mode::Linear:
		return *V * Z;
	case Mode::Nonlinear:
		return V ? Mat(*V * diffkit::mlp_apply(decoder, Z)) : diffkit::mlp_apply(decoder, Z);
	}
	return Z;
}

Vec Autoencoder::encode(const Vec& x) const { return encode(Mat(x)).col(0); }
Vec Autoencoder::decode(const Vec& z) const { return decode(Mat(z)).col(0); }

Mat Autoencoder::encode_jvp(const Mat& X, const Mat& T) const
{
	check_rows(X, N, "encode_jvp");
	check_rows(T, N, "encode_jvp tangent");
	switch (mode) {
	case Mode::Identity:
		return T;
	case Mode::Linear:
		return V->transpose() * T;
	case Mode::Nonlinear:
		if (V)
			return diffkit::jvp(encoder, Mat(V->transpose() * X), Mat(V->transpose() * T));
		return diffkit::jvp(encoder, X, T);
	}
	return T;
}

Mat Autoencoder::decode_jvp(const Mat& Z, const Mat& T) const
{
	check_rows(Z, r, "decode_jvp");
	check_rows(T, r, "decode_jvp tangent");
	switch (mode) {
	case Mode::Identity:
		return T;
	case Mode::Linear:
		return *V * T;
	case Mode::Nonlinear:
		if (V)
			return *V * diffkit::jvp(decoder, Z, T);
		return diffkit::jvp(decoder, Z, T);
	}
	return T;
}

Vec Autoencoder::encode_jvp(const Vec& x, const Vec& v) const
{
	return encode_jvp(Mat(x), Mat(v)).col(0);
}

Vec Autoencoder::decode_jvp(const Vec& z, const Vec& v) const
{
	return decode_jvp(Mat(z), Mat(v)).col(0);
}

Mat Autoencoder::decoder_jacobian(const Vec& z) const
{
	Mat D(N, r);
	for (int j = 0; j < r; ++j) {
		const Vec col = decode_jvp(z, Vec(Vec::Unit(r, j)));
		if (!col.allFinite())
			throw NumericalError("decoder_jacobian: non-finite entries in column " + std::to_string(j));
		D.col(j) = col;
	}
	return D;
}

Autoencoder make_identity(int N)
{
	Autoencoder ae;
	ae.mode = Mode::Identity;
	ae.N = N;
	ae.n_v = N;
	ae.r = N;
	ae.validate();
	return ae;
}

Autoencoder make_linear(const PcaBasis& pca)
{
	Autoencoder ae;
	ae.mode = Mode::Linear;
	ae.N = static_cast<int>(pca.V.rows());
	ae.n_v = static_cast<int>(pca.V.cols());
	ae.r = ae.n_v;
	ae.V = pca.V;
	ae.singular_values = pca.singular_values;
	ae.validate();
	return ae;
}

Autoencoder make_nonlinear(int N, int r, const std::vector<int>& hidden,
                           const std::optional<PcaBasis>& pca, std::uint64_t seed)
{
	if (N > kPcaThreshold && !pca)
		throw ConfigError("nonlinear autoencoder with N = " + std::to_string(N) + " > " +
		                  std::to_string(kPcaThreshold) + " requires a PCA outer layer");
	Autoencoder ae;
	ae.mode = Mode::Nonlinear;
	ae.N = N;
	ae.r = r;
	int inner = N;
	if (pca) {
		ae.V = pca->V;
		ae.singular_values = pca->singular_values;
		inner = static_cast<int>(pca->V.cols());
	}
	ae.n_v = inner;

	std::vector<int> enc{inner};
	enc.insert(enc.end(), hidden.begin(), hidden.end());
	enc.push_back(r);
	std::vector<int> dec(enc.rbegin(), enc.rend());
	ae.encoder = diffkit::make_mlp(enc, diffkit::Activation::Elu, seed);
	ae.decoder = diffkit::make_mlp(dec, diffkit::Activation::Elu, seed + 1);
	ae.validate();
	return ae;
}

AutoencoderNodes bind(diffkit::Graph& g, const Autoencoder& ae, bool trainable)
{
	AutoencoderNodes n;
	if (ae.V) {
		n.V = g.constant(*ae.V);
		n.Vt = g.constant(ae.V->transpose());
	}
	if (ae.mode == Mode::Nonlinear) {
		n.encoder = trainable ? diffkit::bind_leaves(g, ae.encoder) : diffkit::bind_constants(g, ae.encoder);
		n.decoder = trainable ? diffkit::bind_leaves(g, ae.decoder) : diffkit::bind_constants(g, ae.decoder);
	}
	return n;
}

diffkit::NodeId encode(diffkit::Graph& g, const Autoencoder& ae, const AutoencoderNodes& n,
                       diffkit::NodeId X)
{
	switch (ae.mode) {
	case Mode::Identity:
		return X;
	case Mode::Linear:
		return g.matmul(*n.Vt, X);
	case Mode::Nonlinear:
		return diffkit::mlp_forward(g, n.encoder, n.Vt ? g.matmul(*n.Vt, X) : X);
	}
	return X;
}

diffkit::JvpNodes encode_jvp(diffkit::Graph& g, const Autoencoder& ae, const AutoencoderNodes& n,
                             diffkit::NodeId X, diffkit::NodeId T)
{
	switch (ae.mode) {
	case Mode::Identity:
		return {X, T};
	case Mode::Linear:
		return {g.matmul(*n.Vt, X), g.matmul(*n.Vt, T)};
	case Mode::Nonlinear:
		if (n.Vt)
			return diffkit::mlp_jvp(g, n.encoder, g.matmul(*n.Vt, X), g.matmul(*n.Vt, T));
		return diffkit::mlp_jvp(g, n.encoder, X, T);
	}
	return {X, T};
}

diffkit::NodeId decode(diffkit::Graph& g, const Autoencoder& ae, const AutoencoderNodes& n,
                       diffkit::NodeId Z)
{
	switch (ae.mode) {
	case Mode::Identity:
		return Z;
	case Mode::Linear:
		return g.matmul(*n.V, Z);
	case Mode::Nonlinear: {
		const auto y = diffkit::mlp_forward(g, n.decoder, Z);
		return n.V ? g.matmul(*n.V, y) : y;
	}
	}
	return Z;
}

diffkit::JvpNodes decode_jvp(diffkit::Graph& g, const Autoencoder& ae, const AutoencoderNodes& n,
                             diffkit::NodeId Z, diffkit::NodeId T)
{
	switch (ae.mode) {
	case Mode::Identity:
		return {Z, T};
	case Mode::Linear:
		return {g.matmul(*n.V, Z), g.matmul(*n.V, T)};
	case Mode::Nonlinear: {
		const auto j = diffkit::mlp_jvp(g, n.decoder, Z, T);
		if (n.V)
			return {g.matmul(*n.V, j.y), g.matmul(*n.V, j.dy)};
		return j;
	}
	}
	return {Z, T};
}

std::vector<diffkit::NamedParam> trainable_parameters(Autoencoder& ae)
{
	std::vector<diffkit::NamedParam> out;
	if (ae.mode == Mode::Nonlinear) {
		diffkit::append_parameters(ae.encoder, "encoder", out);
		diffkit::append_parameters(ae.decoder, "decoder", out);
	}
	return out;
}

std::vector<diffkit::NodeId> trainable_leaves(const AutoencoderNodes& n)
{
	auto out = n.encoder.leaves();
	const auto dec = n.decoder.leaves();
	out.insert(out.end(), dec.begin(), dec.end());
	return out;
}

void save_basis(const PcaBasis& pca, const std::filesystem::path& stem)
{
	nlohmann::json header;
	header["N"] = pca.V.rows();
	header["n_v"] = pca.V.cols();
	header["singular_values"] =
	    std::vector<double>(pca.singular_values.data(), pca.singular_values.data() + pca.singular_values.size());
	std::ofstream js(stem.string() + ".json");
	js << header.dump(2) << '\n';

	std::ofstream bin(stem.string() + ".bin", std::ios::binary);
	for (Eigen::Index i = 0; i < pca.V.rows(); ++i)
		for (Eigen::Index j = 0; j < pca.V.cols(); ++j) {
			const double v = pca.V(i, j);
			bin.write(reinterpret_cast<const char*>(&v), sizeof(double));
		}
	if (!bin || !js)
		throw std::runtime_error("save_basis: failed writing " + stem.string());
}

PcaBasis load_basis(const std::filesystem::path& stem)
{
	std::ifstream js(stem.string() + ".json");
	if (!js)
		throw ConfigError("load_basis: cannot open " + stem.string() + ".json");
	const auto header = nlohmann::json::parse(js);
	const auto N = header.at("N").get<Eigen::Index>();
	const auto n_v = header.at("n_v").get<Eigen::Index>();
	const auto sv = header.at("singular_values").get<std::vector<double>>();

	PcaBasis out;
	out.singular_values = Eigen::Map<const Vec>(sv.data(), static_cast<Eigen::Index>(sv.size()));
	out.V.resize(N, n_v);
	std::ifstream bin(stem.string() + ".bin", std::ios::binary);
	for (Eigen::Index i = 0; i < N; ++i)
		for (Eigen::Index j = 0; j < n_v; ++j) {
			double v = 0.0;
			bin.read(reinterpret_cast<char*>(&v), sizeof(double));
			out.V(i, j) = v;
		}
	if (!bin)
		throw ConfigError("load_basis: truncated basis file " + stem.string() + ".bin");
	return out;
}

} // namespace phid::ae
