#include "ionsim/modes.hpp"

#include <cmath>

#include "ionsim/errors.hpp"

namespace ionsim {

namespace {

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  int imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0) v = -v;
}

// Eigenvalues of K/M -> frequencies, descending. Flags gaps < 1 Hz.
void spectrum_from_hessian(const Eigen::MatrixXd& k, double mass, ModeSpectrum& out) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  if (es.info() != Eigen::Success) throw DomainError("eigensolver failed");
  const int n = static_cast<int>(k.rows());
  out.frequencies.resize(n);
  out.mode_matrix.resize(n, n);
  for (int m = 0; m < n; ++m) {
    const double ev = es.eigenvalues()(n - 1 - m);  // descending
    if (ev < 0.0)
      throw InstabilityError("negative Hessian eigenvalue: crystal unstable");
    out.frequencies(m) = std::sqrt(ev / mass);
    out.mode_matrix.col(m) = es.eigenvectors().col(n - 1 - m);
    fix_sign(out.mode_matrix.col(m));
  }
  out.degenerate = false;
  for (int m = 0; m + 1 < n; ++m)
    if (out.frequencies(m) - out.frequencies(m + 1) < hz_to_rad(1.0))
      out.degenerate = true;
}

void require_equilibrium(const CrystalGeometry& geom) {
  // Spectra at non-equilibrium positions are meaningless; reject.
  if (geom.max_residual_force > 1e-18)
    throw DomainError("geometry not converged: residual force too large");
}

}  // namespace

ModeSpectrum transverse_modes(const TrapConfig& cfg, const CrystalGeometry& geom,
                              double planarity_tol) {
  cfg.validate();
  require_equilibrium(geom);
  if (!check_planarity(geom, planarity_tol))
    throw DomainError("geometry not planar: transverse-mode model invalid");

  ModeSpectrum spec;
  spectrum_from_hessian(transverse_hessian(cfg, geom.positions), cfg.mass, spec);
  spec.axis.assign(spec.n_modes(), ModeAxis::transverse_z);
  return spec;
}

ModeSpectrum full_modes(const TrapConfig& cfg, const CrystalGeometry& geom) {
  cfg.validate();
  require_equilibrium(geom);

  ModeSpectrum spec;
  spectrum_from_hessian(potential_hessian(cfg, geom.positions), cfg.mass, spec);
  spec.axis.resize(spec.n_modes());
  const int n = cfg.n_ions;
  for (int m = 0; m < spec.n_modes(); ++m) {
    double wz = 0.0, wxy = 0.0;
    for (int i = 0; i < n; ++i) {
      wxy += spec.mode_matrix(3 * i + 0, m) * spec.mode_matrix(3 * i + 0, m) +
             spec.mode_matrix(3 * i + 1, m) * spec.mode_matrix(3 * i + 1, m);
      wz += spec.mode_matrix(3 * i + 2, m) * spec.mode_matrix(3 * i + 2, m);
    }
    spec.axis[m] = (wz > wxy) ? ModeAxis::transverse_z : ModeAxis::in_plane;
  }
  return spec;
}

Eigen::VectorXd mode_participation(const ModeSpectrum& spec, int mode_index) {
  if (mode_index < 0 || mode_index >= spec.n_modes())
    throw DomainError("mode index out of range");
  return spec.mode_matrix.col(mode_index);
}

}  // namespace ionsim
