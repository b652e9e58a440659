#pragma once

#include "phid/autoencoder/autoencoder.hpp"
#include "phid/ph/ph_system.hpp"

namespace phid::ph {

/// pH matrices pulled back to the original state space at x = dec(z):
///   J_bar = D J D^T,  R_bar = D R D^T,  B_bar = D B,
/// with D the decoder Jacobian at z.
struct StateSpacePH {
	Mat D;
	Mat J_bar;
	Mat R_bar;
	Mat B_bar;
	double skew_defect = 0.0; // max |J_bar + J_bar^T|
	double min_eig_R = 0.0;   // of the symmetric part of R_bar
};

/// Throws NumericalError if the decoder Jacobian has non-finite entries.
StateSpacePH reconstruct_statespace_ph(const ae::Autoencoder& ae, const PHSystem& sys,
                                       const Vec& z);

} // namespace phid::ph
