#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "ionsim/coupling.hpp"

namespace ionsim {

enum class PauliBasis { z, x, y };

// Pure state of N spins. Basis index convention: ion i (0-based, geometry row
// order) lives at bit (N-1-i); bit set = up. The stored amplitudes are always
// in the z basis.
struct SpinState {
  int n_spins = 0;
  Eigen::VectorXcd amplitudes;  // length 2^N

  static SpinState all_down(int n);
  // Product eigenstate of sum_i sx_i: sign < 0 -> |-x>^N, sign > 0 -> |+x>^N.
  static SpinState product_x(int n, int sign);

  double norm() const { return amplitudes.norm(); }
};

// y . sy_i sy_j in the z basis is real: matrix-free H = sum_{i<j} J sy sy + b sum sx.
// out = H * psi; psi untouched.
void apply_tfim(const Eigen::MatrixXd& j, double b, const Eigen::VectorXcd& psi,
                Eigen::VectorXcd& out);

// Dense real-symmetric TFIM matrix (for N small enough to afford 4^N doubles).
Eigen::MatrixXd tfim_matrix(const Eigen::MatrixXd& j, double b);

// Amplitudes rotated into the requested single-ion Pauli basis.
Eigen::VectorXcd to_basis(const SpinState& state, PauliBasis basis);

struct GroundLevel {
  double energy = 0;                     // rad/s
  std::vector<Eigen::VectorXcd> states;  // orthonormal basis of the level
  bool degenerate = false;
};

// Exact lowest level of sign * [sum_{i<j} J sy sy + b sum sx]. sign = -1
// targets the highest excited level of +H. Dense for N <= 12, Lanczos above.
GroundLevel ground_state_tfim(const CouplingMatrix& jm, double b, int sign,
                              double degeneracy_tol = -1.0);

}  // namespace ionsim
