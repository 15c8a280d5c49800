#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ionsim/modes.hpp"

namespace ionsim {

// Bichromatic Raman drive parameters. All angular frequencies.
struct RamanConfig {
  double wavelength = 355e-9;           // m
  double delta_k = 0.0;                 // rad/m; 0 -> default 2*pi*sqrt(2)/lambda
  Eigen::VectorXd rabi;                 // per-ion Omega_i, rad/s
  double detuning_mu = 0.0;             // rad/s from the carrier
  double b_field = 0.0;                 // rad/s, transverse field B0
  double sdf_carrier_phase_offset = -std::numbers::pi / 2.0;

  double effective_delta_k() const;
  void validate(int n_ions) const;
};

// Symmetric signed spin-spin couplings, rad/s. J > 0 is anti-ferromagnetic
// under H = sum_{i<j} J_ij sy_i sy_j + B sum_i sx_i.
struct CouplingMatrix {
  Eigen::MatrixXd j;        // N x N, zero diagonal
  double detuning_mu = 0;   // rad/s
  std::string spectrum_ref;

  int n_spins() const { return static_cast<int>(j.rows()); }
};

// J_ij = Omega_i Omega_j hbar dk^2 / (2M) * sum_m b_im b_jm / (mu^2 - w_m^2)
// over the transverse modes. Throws ResonanceError when mu falls within
// guard_band of a mode frequency.
CouplingMatrix compute_couplings(const ModeSpectrum& spec, const RamanConfig& raman,
                                 double mass, double guard_band = khz_to_rad(1.0));

struct SignedEdge {
  int i, j;
  double j_rad_s;
  bool antiferromagnetic;  // J > 0
};

// Edges with |J_ij| >= threshold * max|J|, labeled AFM/FM.
std::vector<SignedEdge> interaction_graph(const CouplingMatrix& jm, double edge_threshold);

struct ScanPoint {
  double mu = 0;  // rad/s
  CouplingMatrix couplings;
  int ground_degeneracy = 0;
  double classical_gap = 0;  // rad/s to first excited classical level
  std::vector<std::uint32_t> ground_configs;  // spin bitmasks, bit set = up
  bool skipped = false;  // inside a mode guard band
};

// Detuning scan; guard-band points are skipped (flagged) rather than fatal.
std::vector<ScanPoint> scan_detuning(const ModeSpectrum& spec, const RamanConfig& raman_template,
                                     double mass, double mu_lo, double mu_hi, double mu_step,
                                     double guard_band = khz_to_rad(1.0));

}  // namespace ionsim
