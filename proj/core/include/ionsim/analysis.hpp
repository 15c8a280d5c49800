#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ionsim/coupling.hpp"
#include "ionsim/spins.hpp"

namespace ionsim {

// Degenerate lowest-energy classical spin configurations of a J matrix.
// Configurations are bitmasks: ion i (0-based) at bit (N-1-i), bit set = up.
struct GroundManifold {
  std::vector<std::uint32_t> configurations;
  double energy = 0;  // rad/s
  double gap = 0;     // rad/s to first excited classical level
  int n_spins = 0;
};

// Exhaustive minimization of E(s) = sum_{i<j} J_ij s_i s_j over all 2^N
// sign assignments. N <= 24.
GroundManifold classical_ground_manifold(const CouplingMatrix& jm, double eps_deg = -1.0);

// Born-rule probabilities of a pure spin state in the requested basis,
// binary order, ion 1 = most significant bit.
Eigen::VectorXd population_histogram(const SpinState& state, PauliBasis basis);

// Probabilities of total-spin-x projection S_x in {-N/2, ..., +N/2};
// index k corresponds to S_x = k - N/2.
Eigen::VectorXd sx_distribution(const SpinState& state);

// Overlap coefficient sum_k sqrt(p_k q_k), in [0, 1], 1 iff p == q.
double bhattacharyya(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Product over ions of the single-ion overlap with the ideal 50/50 split:
// prod_i (sqrt(1/2) sqrt(p_i) + sqrt(1/2) sqrt(1 - p_i)), where p_i is the
// up-state probability of ion i.
double bhattacharyya_single_ion_product(const Eigen::VectorXd& p_up);

// Per-ion x-rotation by nominal_angle * Omega_i / mean(Omega) applied to
// |down>^N: models initial-state errors from non-uniform Rabi frequencies.
SpinState imperfect_global_rotation(const Eigen::VectorXd& rabi, double nominal_angle);

struct DetectionModel {
  Eigen::VectorXd per_ion_fidelity;  // each in (0.5, 1]
  long shots = 1;
  std::uint64_t rng_seed = 0;

  void validate(int n_ions) const;
};

struct SampledReadout {
  Eigen::VectorXd histogram;               // empirical frequencies, 2^N
  std::vector<std::uint32_t> bitstrings;   // one record per shot
};

// Draws shots from the distribution, then flips each bit independently with
// probability 1 - fidelity_i. Counter-based RNG: deterministic per
// (rng_seed, shot), independent of batching.
SampledReadout apply_detection_and_sample(const Eigen::VectorXd& probabilities,
                                          const DetectionModel& det);

// Infinite-shot limit of the detection model: per-ion symmetric bit-flip
// channel applied to an exact distribution.
Eigen::VectorXd apply_detection_exact(const Eigen::VectorXd& probabilities,
                                      const Eigen::VectorXd& per_ion_fidelity);

// Histogram mass on the manifold configurations (both flip partners).
double manifold_population(const Eigen::VectorXd& histogram, const GroundManifold& manifold);

// Partial trace over the phonon factor of a spin (x) phonon density matrix
// (spin index major, n_levels Fock states).
Eigen::MatrixXcd reduced_spin_density(const Eigen::MatrixXcd& rho, int n_spins, int n_levels);

// Diagonal of a spin density matrix in the requested basis.
Eigen::VectorXd density_histogram(const Eigen::MatrixXcd& rho_spin, PauliBasis basis);

Eigen::VectorXd sx_distribution_density(const Eigen::MatrixXcd& rho_spin);

}  // namespace ionsim
