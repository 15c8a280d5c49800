#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "ionsim/analysis.hpp"
#include "ionsim/coupling.hpp"
#include "ionsim/spins.hpp"

namespace ionsim {

enum class RampDirection { forward, reverse, round_trip };

// Transverse-field ramp B(t) = b0 / (1 + ramp_alpha t); a round trip mirrors
// the profile about t = duration.
struct RampSchedule {
  double b0 = 0;          // rad/s
  double ramp_alpha = 0;  // 1/s
  double duration = 0;    // s (one leg)
  RampDirection direction = RampDirection::forward;
  std::vector<double> sample_times;  // s, within [0, total_duration()]

  double total_duration() const {
    return direction == RampDirection::round_trip ? 2.0 * duration : duration;
  }
  double field_at(double t) const;
  void validate() const;

  // ramp_alpha such that B(duration)/b0 = endpoint_fraction.
  static double alpha_for_endpoint(double duration, double endpoint_fraction);
};

struct NoiseModel {
  double heating_rate = 0;  // quanta/s; Lindblad alpha = sqrt(heating_rate)
  int phonon_cutoff = 15;   // n_cut: Fock levels 0..n_cut
  double initial_nbar = 0;  // thermal occupation of the initial phonon state

  void validate() const;
};

struct TrajectoryPoint {
  double t = 0;
  SpinState state;
  double ground_overlap = 0;       // population in instantaneous exact ground level
  double manifold_population = 0;  // y-basis mass on the classical ground manifold
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  double final_norm_drift = 0;
};

// Schrodinger evolution i dpsi/dt = sign * H(t) psi with H(t) from the
// coupling matrix and the ramp profile. Emits instantaneous exact-ground
// overlap and classical-manifold population at the sample times.
Trajectory evolve_tfim(const CouplingMatrix& jm, const RampSchedule& schedule,
                       const SpinState& initial, double integrator_tol = 1e-9,
                       int hamiltonian_sign = 1);

struct SpinBosonMode {
  double frequency = 0;       // rad/s
  Eigen::VectorXd vector;     // b_{.,m}
};

struct SpinBosonTrajectoryPoint {
  double t = 0;
  Eigen::VectorXd spin_populations_y;  // reduced spin histogram, y basis
  Eigen::MatrixXcd spin_density;       // reduced spin density matrix
  double nbar = 0;
  double trace = 0;
};

struct SpinBosonResult {
  std::vector<SpinBosonTrajectoryPoint> points;
  Eigen::MatrixXcd final_density;  // full spin x phonon density matrix
  double max_top_fock_population = 0;
};

// Lindblad evolution of N spins coupled to one phonon mode in the frame
// rotating at the drive beatnote:
//   H(t) = sign * [ sum_i g_i sy_i (a e^{-i delta t} + a+ e^{i delta t})
//                   + B(t) sum_i sx_i ],  g_i = eta_i Omega_i / 2,
// with dissipators L(alpha a), L(alpha a+), alpha^2 = heating rate.
// delta = sign * (mode frequency - mu), which makes the emergent second-order
// sy sy coupling agree with the Eq. 2 value for either sign. Throws CutoffError if the top Fock level
// accumulates more than 1e-3 population (after one automatic retry with a
// doubled cutoff).
SpinBosonResult evolve_spin_boson(const Eigen::VectorXd& rabi, const SpinBosonMode& mode,
                                  double detuning_mu, double delta_k, double mass,
                                  const NoiseModel& noise, const RampSchedule& schedule,
                                  const SpinState& initial_spins,
                                  double integrator_tol = 1e-8, int hamiltonian_sign = 1);

struct ReversalResult {
  Eigen::VectorXd initial_sx;  // red curve
  Eigen::VectorXd mid_sx;      // black, end of ramp-down
  Eigen::VectorXd final_sx;    // green, after mirrored ramp-up
};

// Ramp down then mirrored ramp up; the three S_x distributions.
ReversalResult run_reversal_experiment(const CouplingMatrix& jm, const RampSchedule& schedule,
                                       const SpinState& initial, double integrator_tol = 1e-9,
                                       int hamiltonian_sign = 1);

// Round trip through the open-system engine (single mode plus heating).
ReversalResult run_reversal_spin_boson(const Eigen::VectorXd& rabi, const SpinBosonMode& mode,
                                       double detuning_mu, double delta_k, double mass,
                                       const NoiseModel& noise, const RampSchedule& schedule,
                                       const SpinState& initial,
                                       double integrator_tol = 1e-8,
                                       int hamiltonian_sign = 1);

}  // namespace ionsim
