#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ionsim/crystal.hpp"

namespace ionsim {

enum class ModeAxis { transverse_z, in_plane };

struct ModeSpectrum {
  Eigen::VectorXd frequencies;   // rad/s, sorted descending; index 0 = COM
  Eigen::MatrixXd mode_matrix;   // column m = mode vector b_{.,m}
  std::vector<ModeAxis> axis;    // dominant axis per mode (full spectra)
  bool degenerate = false;       // some eigenvalue gap < 1 Hz
  std::string geometry_ref;

  int n_modes() const { return static_cast<int>(frequencies.size()); }
};

// Transverse (z) branch: diagonalizes the z-displacement Hessian about
// equilibrium. The highest mode is the center-of-mass mode at exactly omega_z.
// Throws InstabilityError if the crystal is not a minimum in z, DomainError if
// the geometry is not planar or not converged.
ModeSpectrum transverse_modes(const TrapConfig& cfg, const CrystalGeometry& geom,
                              double planarity_tol = 1e-9);

// All 3N modes of the full Hessian, labeled by dominant axis. Spectrum plots
// only; the coupling module consumes the transverse branch.
ModeSpectrum full_modes(const TrapConfig& cfg, const CrystalGeometry& geom);

// b_{i,m} for all ions i, sign-normalized (largest-|entry| positive).
Eigen::VectorXd mode_participation(const ModeSpectrum& spec, int mode_index);

}  // namespace ionsim
