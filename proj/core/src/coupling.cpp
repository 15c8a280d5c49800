#include "ionsim/coupling.hpp"

#include <cmath>

#include "ionsim/analysis.hpp"
#include "ionsim/errors.hpp"

namespace ionsim {

double RamanConfig::effective_delta_k() const {
  return delta_k > 0 ? delta_k : two_pi * std::numbers::sqrt2 / wavelength;
}

void RamanConfig::validate(int n_ions) const {
  if (rabi.size() != n_ions)
    throw ConfigError("rabi must have one entry per ion");
  if ((rabi.array() < 0).any()) throw ConfigError("Rabi frequencies must be >= 0");
  if (wavelength <= 0) throw ConfigError("wavelength must be positive");
  if (effective_delta_k() <= 0) throw ConfigError("delta_k must be positive");
  if (detuning_mu <= 0) throw ConfigError("detuning_mu must be positive");
}

CouplingMatrix compute_couplings(const ModeSpectrum& spec, const RamanConfig& raman,
                                 double mass, double guard_band) {
  const int n = spec.n_modes();
  raman.validate(n);
  const double mu = raman.detuning_mu;
  for (int m = 0; m < n; ++m) {
    if (std::abs(mu - spec.frequencies(m)) < guard_band)
      throw ResonanceError("detuning within guard band of transverse mode " +
                               std::to_string(m) + " at " +
                               std::to_string(rad_to_mhz(spec.frequencies(m))) + " MHz",
                           m);
  }

  const double dk = raman.effective_delta_k();
  const double prefactor = constants::hbar * dk * dk / (2.0 * mass);

  CouplingMatrix out;
  out.detuning_mu = mu;
  out.spectrum_ref = spec.geometry_ref;
  out.j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      double sum = 0.0;
      for (int m = 0; m < n; ++m) {
        const double wm = spec.frequencies(m);
        sum += spec.mode_matrix(i, m) * spec.mode_matrix(k, m) / (mu * mu - wm * wm);
      }
      const double jik = raman.rabi(i) * raman.rabi(k) * prefactor * sum;
      out.j(i, k) = jik;
      out.j(k, i) = jik;
    }
  }
  return out;
}

std::vector<SignedEdge> interaction_graph(const CouplingMatrix& jm, double edge_threshold) {
  if (edge_threshold <= 0.0 || edge_threshold >= 1.0)
    throw ConfigError("edge_threshold must be in (0, 1)");
  std::vector<SignedEdge> edges;
  const double jmax = jm.j.cwiseAbs().maxCoeff();
  if (jmax == 0.0) return edges;  // empty graph, not an error
  const int n = jm.n_spins();
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k)
      if (std::abs(jm.j(i, k)) >= edge_threshold * jmax)
        edges.push_back({i, k, jm.j(i, k), jm.j(i, k) > 0});
  return edges;
}

std::vector<ScanPoint> scan_detuning(const ModeSpectrum& spec, const RamanConfig& raman_template,
                                     double mass, double mu_lo, double mu_hi, double mu_step,
                                     double guard_band) {
  if (mu_step <= 0 || mu_hi < mu_lo) throw ConfigError("empty or invalid detuning range");
  std::vector<ScanPoint> points;
  for (double mu = mu_lo; mu <= mu_hi + 0.5 * mu_step; mu += mu_step) {
    ScanPoint p;
    p.mu = mu;
    RamanConfig raman = raman_template;
    raman.detuning_mu = mu;
    try {
      p.couplings = compute_couplings(spec, raman, mass, guard_band);
    } catch (const ResonanceError&) {
      p.skipped = true;
      points.push_back(std::move(p));
      continue;
    }
    const GroundManifold gm = classical_ground_manifold(p.couplings);
    p.ground_degeneracy = static_cast<int>(gm.configurations.size());
    p.classical_gap = gm.gap;
    p.ground_configs = gm.configurations;
    points.push_back(std::move(p));
  }
  if (points.empty()) throw ConfigError("empty detuning range");
  return points;
}

}  // namespace ionsim
