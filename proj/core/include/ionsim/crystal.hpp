#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ionsim/units.hpp"

namespace ionsim {

// Secular trap confinement plus ion species. Angular frequencies, SI.
struct TrapConfig {
  int n_ions = 1;
  double omega_x = 0.0;  // rad/s
  double omega_y = 0.0;
  double omega_z = 0.0;
  double mass = constants::yb171_mass;        // kg
  double charge = constants::elementary_charge;  // C

  void validate() const;  // throws ConfigError

  // Characteristic length (k_C q^2 / (M w_y^2))^(1/3), used for reporting
  // and for scaling the minimization.
  double characteristic_length() const;
};

struct CrystalGeometry {
  Eigen::MatrixXd positions;     // N x 3, meters
  double potential_energy = 0;   // J
  double max_residual_force = 0; // N, max |component|
  double planarity_deviation = 0;  // m, max |z|
};

// Total potential: 3D harmonic pseudopotential plus pairwise Coulomb.
// gradient is dU/dr (force = -gradient). Throws DomainError on coincident ions.
double potential_and_gradient(const TrapConfig& cfg, const Eigen::MatrixXd& positions,
                              Eigen::MatrixXd& gradient);

// Full 3N x 3N Hessian of the potential, row/col index = 3*ion + axis.
Eigen::MatrixXd potential_hessian(const TrapConfig& cfg, const Eigen::MatrixXd& positions);

// N x N Hessian of z displacements about a planar configuration.
Eigen::MatrixXd transverse_hessian(const TrapConfig& cfg, const Eigen::MatrixXd& positions);

struct EquilibriumOptions {
  double force_threshold = 1e-18;  // N, max residual force component
  int max_iterations = 400;
  int saddle_retries = 3;
};

// Lowest-energy minimum over n_starts damped-Newton runs seeded from a
// deterministic lattice guess plus rng_seed perturbations. Deterministic for
// fixed (cfg, n_starts, rng_seed). Throws ConvergenceError / SaddlePointError.
CrystalGeometry solve_equilibrium(const TrapConfig& cfg, int n_starts, std::uint64_t rng_seed,
                                  const EquilibriumOptions& opts = {});

bool check_planarity(const CrystalGeometry& geom, double tol);

}  // namespace ionsim
