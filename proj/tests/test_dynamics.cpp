#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ionsim/analysis.hpp"
#include "ionsim/coupling.hpp"
#include "ionsim/crystal.hpp"
#include "ionsim/detail/rk45.hpp"
#include "ionsim/dynamics.hpp"
#include "ionsim/errors.hpp"
#include "ionsim/modes.hpp"
#include "ionsim/units.hpp"

using namespace ionsim;

namespace {

CouplingMatrix four_ion_couplings(double offset_khz, int reference_mode = 0) {
  TrapConfig trap;
  trap.n_ions = 4;
  trap.omega_x = mhz_to_rad(0.626);
  trap.omega_y = mhz_to_rad(0.404);
  trap.omega_z = mhz_to_rad(1.503);
  const CrystalGeometry geom = solve_equilibrium(trap, 24, 1);
  const ModeSpectrum spec = transverse_modes(trap, geom);
  RamanConfig raman;
  raman.rabi = Eigen::VectorXd::Constant(4, khz_to_rad(50.0));
  raman.detuning_mu = spec.frequencies(reference_mode) + khz_to_rad(offset_khz);
  return compute_couplings(spec, raman, trap.mass);
}

RampSchedule fm_schedule(double duration_us, double alpha, int samples) {
  RampSchedule s;
  s.b0 = khz_to_rad(29.0);
  s.ramp_alpha = alpha;
  s.duration = duration_us * 1e-6;
  for (int k = 0; k < samples; ++k)
    s.sample_times.push_back(s.duration * k / (samples - 1));
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("dynamics");

TEST_CASE("ramp profile and round-trip mirror") {
  RampSchedule s;
  s.b0 = 1.0e5;
  s.ramp_alpha = 2.0e4;
  s.duration = 3.0e-4;
  CHECK(s.field_at(0.0) == s.b0);
  CHECK(s.field_at(1.0e-4) == doctest::Approx(s.b0 / 3.0).epsilon(1e-14));

  s.direction = RampDirection::round_trip;
  CHECK(s.total_duration() == doctest::Approx(2.0 * s.duration));
  for (double t : {0.5e-4, 1.5e-4, 2.9e-4})
    CHECK(s.field_at(s.duration + t) ==
          doctest::Approx(s.field_at(s.duration - t)).epsilon(1e-13));

  SUBCASE("reverse runs the profile backwards") {
    RampSchedule r = s;
    r.direction = RampDirection::reverse;
    CHECK(r.field_at(0.0) == doctest::Approx(s.field_at(s.duration)));
    CHECK(r.field_at(r.duration) == doctest::Approx(s.b0));
  }
}

TEST_CASE("alpha_for_endpoint inverts the profile") {
  const double t = 3.0e-4;
  const double alpha = RampSchedule::alpha_for_endpoint(t, 1.0 / 20.0);
  CHECK(1.0 / (1.0 + alpha * t) == doctest::Approx(1.0 / 20.0).epsilon(1e-14));
}

TEST_CASE("schedule validation") {
  RampSchedule s = fm_schedule(300.0, 1.0e4, 3);
  CHECK_NOTHROW(s.validate());
  SUBCASE("negative alpha") {
    s.ramp_alpha = -1.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
  SUBCASE("sample outside the window") {
    s.sample_times.push_back(2.0 * s.duration);
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }
}

TEST_CASE("rk45 integrates a known linear ODE") {
  // y' = i w y on a 1-vector: |y(t)| = 1, phase w t.
  const double w = 2.0e5;
  Eigen::VectorXcd y(1);
  y(0) = 1.0;
  auto rhs = [&](double, const Eigen::VectorXcd& v, Eigen::VectorXcd& dv) {
    dv = std::complex<double>(0.0, w) * v;
  };
  detail::integrate_rk45(rhs, y, 0.0, 1.0e-3, 1e-12, 1e-15);
  CHECK(std::abs(y(0)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::arg(y(0)) ==
        doctest::Approx(std::remainder(w * 1.0e-3, 2 * std::numbers::pi))
            .epsilon(1e-7));
}

TEST_CASE("J = 0 with near-constant field keeps |-x> stationary") {
  CouplingMatrix jm;
  jm.j = Eigen::MatrixXd::Zero(4, 4);
  RampSchedule s = fm_schedule(100.0, 1.0e-3, 5);  // essentially constant B
  const Trajectory traj = evolve_tfim(jm, s, SpinState::product_x(4, -1), 1e-10);
  for (const auto& pt : traj.points) {
    const Eigen::VectorXd px = population_histogram(pt.state, PauliBasis::x);
    CHECK(px(0) == doctest::Approx(1.0).epsilon(1e-7));  // all ions -x
    CHECK(pt.ground_overlap == doctest::Approx(1.0).epsilon(1e-7));
  }
  CHECK(traj.final_norm_drift < 1e-7);
}

TEST_CASE("norm conservation and global-flip symmetry on a frustrated ramp") {
  const CouplingMatrix jm = four_ion_couplings(-10.0, 2);
  RampSchedule s = fm_schedule(300.0, 1.0e4, 7);
  const Trajectory traj = evolve_tfim(jm, s, SpinState::product_x(4, -1), 1e-10);
  CHECK(traj.final_norm_drift < 1e-7);

  for (const auto& pt : traj.points) {
    CHECK(std::abs(pt.state.norm() - 1.0) < 1e-7);
    const Eigen::VectorXd py = population_histogram(pt.state, PauliBasis::y);
    for (std::uint32_t c = 0; c < 16; ++c)
      CHECK(py(c) == doctest::Approx(py(15 - c)).epsilon(1e-6));
  }
}

TEST_CASE("adiabatic limit reaches the classical manifold") {
  const CouplingMatrix jm = four_ion_couplings(10.0, 0);
  // 10x the experimental duration at a gentler ramp rate
  RampSchedule s = fm_schedule(4000.0, 1.0e5, 3);
  const Trajectory traj = evolve_tfim(jm, s, SpinState::product_x(4, +1), 1e-9, -1);
  CHECK(traj.points.back().manifold_population >= 0.99);
  CHECK(traj.points.back().ground_overlap >= 0.99);
}

TEST_CASE("halving the tolerance leaves final populations unchanged") {
  const CouplingMatrix jm = four_ion_couplings(10.0, 0);
  RampSchedule s = fm_schedule(300.0, 3.0e5, 3);
  const SpinState init = SpinState::product_x(4, +1);
  const Trajectory a = evolve_tfim(jm, s, init, 1e-9, -1);
  const Trajectory b = evolve_tfim(jm, s, init, 5e-10, -1);
  const Eigen::VectorXd pa = population_histogram(a.points.back().state, PauliBasis::y);
  const Eigen::VectorXd pb = population_histogram(b.points.back().state, PauliBasis::y);
  CHECK((pa - pb).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("round trip with J = 0 returns the initial state") {
  CouplingMatrix jm;
  jm.j = Eigen::MatrixXd::Zero(3, 3);
  RampSchedule s = fm_schedule(200.0, 1.0e4, 3);
  const ReversalResult res = run_reversal_experiment(jm, s, SpinState::product_x(3, -1), 1e-11);
  // initial distribution is a delta at S_x = -N/2 and must return exactly
  CHECK(res.initial_sx(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(res.final_sx(0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("slow round trip restores the polarized state through a real ramp") {
  const CouplingMatrix jm = four_ion_couplings(-10.0, 2);
  RampSchedule s = fm_schedule(3000.0, 1.0e5, 3);
  const ReversalResult res = run_reversal_experiment(jm, s, SpinState::product_x(4, -1), 1e-10);
  CHECK(res.final_sx(0) >= 0.99);
  // mid-ramp magnetization stays near zero for a converged forward ramp
  double mid_mean = 0.0;
  for (int k = 0; k < res.mid_sx.size(); ++k)
    mid_mean += (k - 2.0) * res.mid_sx(k);
  CHECK(std::abs(mid_mean) < 0.05 * 4);
}

TEST_SUITE_END();
