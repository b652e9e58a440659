#include "phid/ph/statespace.hpp"

#include "phid/errors.hpp"
#include "phid/ph/properties.hpp"

namespace phid::ph {

StateSpacePH reconstruct_statespace_ph(const ae::Autoencoder& ae, const PHSystem& sys,
                                       const Vec& z)
{
	if (z.size() != sys.r() || ae.r != sys.r())
		throw DimensionError("reconstruct_statespace_ph: latent dimension mismatch");
	StateSpacePH out;
	if (ae.mode == ae::Mode::Identity) {
		out.D = Mat::Identity(sys.r(), sys.r());
		out.J_bar = sys.J;
		out.R_bar = sys.R;
		out.B_bar = sys.B;
	} else {
		out.D = ae.decoder_jacobian(z);
		out.J_bar = out.D * sys.J * out.D.transpose();
		out.R_bar = out.D * sys.R * out.D.transpose();
		out.B_bar = out.D * sys.B;
	}
	if (!out.J_bar.allFinite() || !out.R_bar.allFinite() || !out.B_bar.allFinite())
		throw NumericalError("reconstruct_statespace_ph: non-finite reconstructed matrices");
	out.skew_defect = (out.J_bar + out.J_bar.transpose()).cwiseAbs().maxCoeff();
	out.min_eig_R = min_symmetric_eigenvalue(out.R_bar);
	return out;
}

} // namespace phid::ph
