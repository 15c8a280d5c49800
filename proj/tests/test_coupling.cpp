#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ionsim/coupling.hpp"
#include "ionsim/crystal.hpp"
#include "ionsim/errors.hpp"
#include "ionsim/modes.hpp"
#include "ionsim/units.hpp"

using namespace ionsim;

namespace {

struct Setup {
  TrapConfig trap;
  CrystalGeometry geom;
  ModeSpectrum spec;
};

Setup four_ion_setup() {
  Setup s;
  s.trap.n_ions = 4;
  s.trap.omega_x = mhz_to_rad(0.626);
  s.trap.omega_y = mhz_to_rad(0.404);
  s.trap.omega_z = mhz_to_rad(1.503);
  s.geom = solve_equilibrium(s.trap, 24, 1);
  s.spec = transverse_modes(s.trap, s.geom);
  return s;
}

RamanConfig uniform_raman(int n, double mu) {
  RamanConfig r;
  r.rabi = Eigen::VectorXd::Constant(n, khz_to_rad(50.0));
  r.detuning_mu = mu;
  return r;
}

// Independent brute-force evaluation of the mode sum.
Eigen::MatrixXd brute_force_j(const ModeSpectrum& spec, const RamanConfig& raman,
                              double mass) {
  const int n = spec.n_modes();
  const double dk = raman.effective_delta_k();
  const double prefactor = constants::hbar * dk * dk / (2.0 * mass);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      if (i == k) continue;
      double acc = 0.0;
      for (int m = 0; m < n; ++m)
        acc += spec.mode_matrix(i, m) * spec.mode_matrix(k, m) /
               (raman.detuning_mu * raman.detuning_mu -
                spec.frequencies(m) * spec.frequencies(m));
      j(i, k) = raman.rabi(i) * raman.rabi(k) * prefactor * acc;
    }
  return j;
}

}  // namespace

TEST_SUITE_BEGIN("coupling");

TEST_CASE("default delta_k is 2 pi sqrt(2) / lambda") {
  RamanConfig r;
  CHECK(r.effective_delta_k() ==
        doctest::Approx(2.0 * std::numbers::pi * std::sqrt(2.0) / 355e-9)
            .epsilon(1e-14));
  r.delta_k = 1.0e7;
  CHECK(r.effective_delta_k() == 1.0e7);
}

TEST_CASE("couplings match independent brute-force mode sum") {
  const Setup s = four_ion_setup();
  for (double offset_khz : {10.0, -10.0, 37.5, -120.0}) {
    const double mu = s.spec.frequencies(0) + khz_to_rad(offset_khz);
    const RamanConfig raman = uniform_raman(4, mu);
    const CouplingMatrix jm = compute_couplings(s.spec, raman, s.trap.mass);
    const Eigen::MatrixXd oracle = brute_force_j(s.spec, raman, s.trap.mass);

    CHECK(jm.j.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK((jm.j - jm.j.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const double scale = oracle.cwiseAbs().maxCoeff();
    CHECK((jm.j - oracle).cwiseAbs().maxCoeff() < 1e-12 * scale);
  }
}

TEST_CASE("rabi scaling: J proportional to Omega^2") {
  const Setup s = four_ion_setup();
  const double mu = s.spec.frequencies(0) + khz_to_rad(10.0);
  RamanConfig raman = uniform_raman(4, mu);
  const CouplingMatrix base = compute_couplings(s.spec, raman, s.trap.mass);
  raman.rabi *= 3.0;
  const CouplingMatrix scaled = compute_couplings(s.spec, raman, s.trap.mass);
  CHECK((scaled.j - 9.0 * base.j).cwiseAbs().maxCoeff() <
        1e-12 * scaled.j.cwiseAbs().maxCoeff());
}

TEST_CASE("blue of COM gives same-sign near-uniform couplings") {
  const Setup s = four_ion_setup();
  const double mu = s.spec.frequencies(0) + khz_to_rad(10.0);
  const CouplingMatrix jm =
      compute_couplings(s.spec, uniform_raman(4, mu), s.trap.mass);

  double mean = 0.0;
  int count = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      CHECK(jm.j(i, j) > 0.0);
      mean += jm.j(i, j);
      ++count;
    }
  mean /= count;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      CHECK(std::abs(jm.j(i, j) - mean) < 0.15 * mean);
}

TEST_CASE("detuning inside a guard band raises ResonanceError") {
  const Setup s = four_ion_setup();
  for (int m = 0; m < 4; ++m) {
    const double mu = s.spec.frequencies(m) + hz_to_rad(200.0);
    CHECK_THROWS_AS(compute_couplings(s.spec, uniform_raman(4, mu), s.trap.mass),
                    ResonanceError);
  }
  // just outside the band is fine
  const double mu = s.spec.frequencies(0) + khz_to_rad(1.5);
  CHECK_NOTHROW(compute_couplings(s.spec, uniform_raman(4, mu), s.trap.mass));
}

TEST_CASE("pole structure: sign of the COM contribution flips across the mode") {
  const Setup s = four_ion_setup();
  const double gap = khz_to_rad(5.0);
  const CouplingMatrix blue = compute_couplings(
      s.spec, uniform_raman(4, s.spec.frequencies(0) + gap), s.trap.mass);
  const CouplingMatrix red = compute_couplings(
      s.spec, uniform_raman(4, s.spec.frequencies(0) - gap), s.trap.mass);
  // near the COM pole the dominant term changes sign
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      CHECK(blue.j(i, j) > 0.0);
      CHECK(red.j(i, j) < 0.0);
    }
}

TEST_CASE("interaction graph thresholds by relative magnitude") {
  const Setup s = four_ion_setup();
  const double mu = s.spec.frequencies(2) - khz_to_rad(10.0);
  const CouplingMatrix jm =
      compute_couplings(s.spec, uniform_raman(4, mu), s.trap.mass);

  const auto all_edges = interaction_graph(jm, 1e-9);
  CHECK(all_edges.size() == 6);
  CHECK_THROWS_AS(interaction_graph(jm, 0.0), ConfigError);
  CHECK_THROWS_AS(interaction_graph(jm, 1.0), ConfigError);
  const double jmax = jm.j.cwiseAbs().maxCoeff();
  for (double thr : {0.3, 0.6}) {
    for (const auto& e : interaction_graph(jm, thr)) {
      CHECK(std::abs(jm.j(e.i, e.j)) >= thr * jmax);
      CHECK(e.j_rad_s == jm.j(e.i, e.j));
      CHECK(e.antiferromagnetic == (e.j_rad_s > 0));
    }
  }
}

TEST_CASE("scan skips guard-band points and reports manifolds") {
  const Setup s = four_ion_setup();
  const RamanConfig raman = uniform_raman(4, 0.0);
  const double lo = s.spec.frequencies(0) - khz_to_rad(5.0);
  const double hi = s.spec.frequencies(0) + khz_to_rad(5.0);
  const auto points =
      scan_detuning(s.spec, raman, s.trap.mass, lo, hi, khz_to_rad(0.5));

  REQUIRE(points.size() == 21);
  int skipped = 0, evaluated = 0;
  for (const auto& p : points) {
    if (p.skipped) {
      ++skipped;
      CHECK(std::abs(p.mu - s.spec.frequencies(0)) <= khz_to_rad(1.0) * 1.0000001);
    } else {
      ++evaluated;
      CHECK(p.ground_degeneracy == static_cast<int>(p.ground_configs.size()));
      CHECK(p.ground_degeneracy >= 2);
      CHECK(p.classical_gap > 0.0);
    }
  }
  CHECK(skipped >= 3);
  CHECK(evaluated >= 15);
}

TEST_SUITE_END();
