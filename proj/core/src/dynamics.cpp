#include "ionsim/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "ionsim/detail/rk45.hpp"
#include "ionsim/errors.hpp"

namespace ionsim {

double RampSchedule::field_at(double t) const {
  const double clamp = [&] {
    switch (direction) {
      case RampDirection::forward:
        return std::clamp(t, 0.0, duration);
      case RampDirection::reverse:
        return duration - std::clamp(t, 0.0, duration);
      case RampDirection::round_trip:
        // mirrored about t = duration
        return t <= duration ? std::clamp(t, 0.0, duration)
                             : std::clamp(2.0 * duration - t, 0.0, duration);
    }
    return 0.0;
  }();
  return b0 / (1.0 + ramp_alpha * clamp);
}

void RampSchedule::validate() const {
  if (b0 <= 0) throw ConfigError("b0 must be > 0");
  if (ramp_alpha <= 0) throw ConfigError("ramp_alpha must be > 0");
  if (duration <= 0) throw ConfigError("duration must be > 0");
  for (double t : sample_times)
    if (t < 0 || t > total_duration() * (1 + 1e-12))
      throw ConfigError("sample time outside schedule");
}

double RampSchedule::alpha_for_endpoint(double duration, double endpoint_fraction) {
  return (1.0 / endpoint_fraction - 1.0) / duration;
}

void NoiseModel::validate() const {
  if (heating_rate < 0) throw ConfigError("heating_rate must be >= 0");
  if (phonon_cutoff < 1) throw ConfigError("phonon_cutoff must be >= 1");
  if (initial_nbar < 0) throw ConfigError("initial_nbar must be >= 0");
}

namespace {

std::vector<double> sorted_samples(const RampSchedule& schedule) {
  std::vector<double> ts = schedule.sample_times;
  ts.push_back(0.0);
  ts.push_back(schedule.total_duration());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-15; }),
           ts.end());
  return ts;
}

}  // namespace

Trajectory evolve_tfim(const CouplingMatrix& jm, const RampSchedule& schedule,
                       const SpinState& initial, double integrator_tol,
                       int hamiltonian_sign) {
  schedule.validate();
  const int n = jm.n_spins();
  if (initial.n_spins != n) throw DomainError("initial state / coupling size mismatch");
  if (std::abs(initial.norm() - 1.0) > 1e-8)
    throw DomainError("initial state not normalized");
  const double sgn = hamiltonian_sign < 0 ? -1.0 : 1.0;

  // Classical manifold of the effective Hamiltonian the ramp targets.
  CouplingMatrix jeff = jm;
  jeff.j *= sgn;
  const GroundManifold manifold = classical_ground_manifold(jeff);

  Eigen::VectorXcd hpsi(initial.amplitudes.size());
  auto rhs = [&](double t, const Eigen::VectorXcd& psi, Eigen::VectorXcd& dpsi) {
    apply_tfim(jm.j, schedule.field_at(t), psi, hpsi);
    dpsi = std::complex<double>(0.0, -sgn) * hpsi;
  };

  const std::vector<double> ts = sorted_samples(schedule);
  Trajectory traj;
  Eigen::VectorXcd psi = initial.amplitudes;
  double t_prev = 0.0;
  for (double t : ts) {
    detail::integrate_rk45(rhs, psi, t_prev, t, integrator_tol, integrator_tol * 1e-3);
    t_prev = t;

    TrajectoryPoint pt;
    pt.t = t;
    pt.state.n_spins = n;
    pt.state.amplitudes = psi;

    const GroundLevel gl = ground_state_tfim(jm, schedule.field_at(t), hamiltonian_sign);
    pt.ground_overlap = 0.0;
    for (const auto& g : gl.states) pt.ground_overlap += std::norm(g.dot(psi));

    const Eigen::VectorXd py = to_basis(pt.state, PauliBasis::y).cwiseAbs2();
    pt.manifold_population = manifold_population(py, manifold);
    traj.points.push_back(std::move(pt));
  }
  traj.final_norm_drift = std::abs(psi.norm() - 1.0);
  if (traj.final_norm_drift > 1e-7)
    throw IntegrationError("norm drift exceeded 1e-7");
  return traj;
}

ReversalResult run_reversal_experiment(const CouplingMatrix& jm, const RampSchedule& schedule,
                                       const SpinState& initial, double integrator_tol,
                                       int hamiltonian_sign) {
  RampSchedule rt = schedule;
  rt.direction = RampDirection::round_trip;
  rt.sample_times = {0.0, rt.duration, 2.0 * rt.duration};
  Trajectory traj = evolve_tfim(jm, rt, initial, integrator_tol, hamiltonian_sign);

  ReversalResult res;
  res.initial_sx = sx_distribution(traj.points.at(0).state);
  res.mid_sx = sx_distribution(traj.points.at(1).state);
  res.final_sx = sx_distribution(traj.points.at(2).state);
  return res;
}

}  // namespace ionsim
