#include "ionsim/spins.hpp"

#include <bit>
#include <cmath>

#include "ionsim/errors.hpp"

namespace ionsim {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};

inline int bit_of_ion(int n, int ion) { return n - 1 - ion; }
}  // namespace

SpinState SpinState::all_down(int n) {
  SpinState s;
  s.n_spins = n;
  s.amplitudes = Eigen::VectorXcd::Zero(std::size_t{1} << n);
  s.amplitudes(0) = 1.0;
  return s;
}

SpinState SpinState::product_x(int n, int sign) {
  SpinState s;
  s.n_spins = n;
  const std::size_t dim = std::size_t{1} << n;
  s.amplitudes.resize(dim);
  const double amp = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t k = 0; k < dim; ++k) {
    const int parity = std::popcount(k) & 1;
    s.amplitudes(k) = (sign < 0 && parity) ? -amp : amp;
  }
  return s;
}

void apply_tfim(const Eigen::MatrixXd& j, double b, const Eigen::VectorXcd& psi,
                Eigen::VectorXcd& out) {
  const int n = static_cast<int>(j.rows());
  const std::size_t dim = std::size_t{1} << n;
  out.setZero(dim);

  for (int a = 0; a < n; ++a) {
    for (int c = a + 1; c < n; ++c) {
      const double jac = j(a, c);
      if (jac == 0.0) continue;
      const std::size_t mask = (std::size_t{1} << bit_of_ion(n, a)) |
                               (std::size_t{1} << bit_of_ion(n, c));
      for (std::size_t s = 0; s < dim; ++s) {
        // sy_a sy_c |s> = sign |s ^ mask>, sign = -1 when the two bits agree
        const bool ba = s >> bit_of_ion(n, a) & 1;
        const bool bc = s >> bit_of_ion(n, c) & 1;
        const double sign = (ba == bc) ? -1.0 : 1.0;
        out(s ^ mask) += jac * sign * psi(s);
      }
    }
  }
  if (b != 0.0) {
    for (int a = 0; a < n; ++a) {
      const std::size_t mask = std::size_t{1} << bit_of_ion(n, a);
      for (std::size_t s = 0; s < dim; ++s) out(s ^ mask) += b * psi(s);
    }
  }
}

Eigen::MatrixXd tfim_matrix(const Eigen::MatrixXd& j, double b) {
  const int n = static_cast<int>(j.rows());
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int a = 0; a < n; ++a) {
    for (int c = a + 1; c < n; ++c) {
      const double jac = j(a, c);
      if (jac == 0.0) continue;
      const std::size_t mask = (std::size_t{1} << bit_of_ion(n, a)) |
                               (std::size_t{1} << bit_of_ion(n, c));
      for (std::size_t s = 0; s < dim; ++s) {
        const bool ba = s >> bit_of_ion(n, a) & 1;
        const bool bc = s >> bit_of_ion(n, c) & 1;
        h(s ^ mask, s) += jac * ((ba == bc) ? -1.0 : 1.0);
      }
    }
  }
  if (b != 0.0) {
    for (int a = 0; a < n; ++a) {
      const std::size_t mask = std::size_t{1} << bit_of_ion(n, a);
      for (std::size_t s = 0; s < dim; ++s) h(s ^ mask, s) += b;
    }
  }
  return h;
}

Eigen::VectorXcd to_basis(const SpinState& state, PauliBasis basis) {
  Eigen::VectorXcd a = state.amplitudes;
  if (basis == PauliBasis::z) return a;
  const int n = state.n_spins;
  const std::size_t dim = std::size_t{1} << n;
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  // Per-qubit butterfly: project each qubit onto the +/- eigenstates of the
  // requested Pauli. Bit set in the output index = +1 eigenvalue (up).
  for (int q = 0; q < n; ++q) {
    const std::size_t mask = std::size_t{1} << q;
    for (std::size_t s = 0; s < dim; ++s) {
      if (s & mask) continue;
      const std::complex<double> lo = a(s), hi = a(s | mask);
      if (basis == PauliBasis::x) {
        a(s | mask) = inv_sqrt2 * (lo + hi);   // <+x| = (<0| + <1|)/sqrt2
        a(s) = inv_sqrt2 * (lo - hi);          // <-x|
      } else {
        a(s | mask) = inv_sqrt2 * (lo - kI * hi);  // <+y| = (<0| - i<1|)/sqrt2
        a(s) = inv_sqrt2 * (lo + kI * hi);         // <-y|
      }
    }
  }
  return a;
}

namespace {

// Lanczos with full reorthogonalization for the lowest few eigenpairs of the
// real-symmetric TFIM operator. Used only above the dense budget.
GroundLevel lanczos_lowest(const Eigen::MatrixXd& j, double b, int sign, double tol) {
  const int n = static_cast<int>(j.rows());
  const std::size_t dim = std::size_t{1} << n;
  const int max_iter = std::min<std::size_t>(dim, 400);

  Eigen::MatrixXcd v(dim, max_iter);
  Eigen::VectorXd alpha(max_iter), beta(max_iter);
  Eigen::VectorXcd w(dim), hv(dim);

  // Deterministic full-support start vector.
  Eigen::VectorXcd v0(dim);
  for (std::size_t k = 0; k < dim; ++k)
    v0(k) = std::complex<double>(std::cos(0.7 * double(k) + 0.3),
                                 std::sin(1.3 * double(k) + 0.1));
  v0.normalize();
  v.col(0) = v0;

  int m = 0;
  for (; m < max_iter; ++m) {
    apply_tfim(j, b, v.col(m), hv);
    if (sign < 0) hv = -hv;
    alpha(m) = hv.dot(v.col(m)).real();
    w = hv - alpha(m) * v.col(m);
    if (m > 0) w -= beta(m - 1) * v.col(m - 1);
    for (int k = 0; k <= m; ++k) w -= v.col(k).dot(w) * v.col(k);  // reorth
    beta(m) = w.norm();
    if (m + 1 == max_iter || beta(m) < 1e-12) {
      ++m;
      break;
    }
    v.col(m + 1) = w / beta(m);
  }

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    t(k, k) = alpha(k);
    if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = beta(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);

  GroundLevel gl;
  gl.energy = es.eigenvalues()(0);
  for (int k = 0; k < m; ++k) {
    if (es.eigenvalues()(k) - gl.energy > tol) break;
    Eigen::VectorXcd state = v.leftCols(m) * es.eigenvectors().col(k).cast<std::complex<double>>();
    state.normalize();
    gl.states.push_back(std::move(state));
  }
  gl.degenerate = gl.states.size() > 1;
  return gl;
}

}  // namespace

GroundLevel ground_state_tfim(const CouplingMatrix& jm, double b, int sign,
                              double degeneracy_tol) {
  const int n = jm.n_spins();
  if (n < 1 || n > 14) throw DomainError("ground_state_tfim: N out of range [1, 14]");
  const double scale = std::max(jm.j.cwiseAbs().maxCoeff(), std::abs(b));
  const double tol = degeneracy_tol > 0 ? degeneracy_tol : 1e-9 * std::max(scale, 1.0);

  if (n > 12) return lanczos_lowest(jm.j, b, sign, tol);

  Eigen::MatrixXd h = tfim_matrix(jm.j, b);
  if (sign < 0) h = -h;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);

  GroundLevel gl;
  gl.energy = es.eigenvalues()(0);
  const std::size_t dim = std::size_t{1} << n;
  for (std::size_t k = 0; k < dim; ++k) {
    if (es.eigenvalues()(k) - gl.energy > tol) break;
    gl.states.push_back(es.eigenvectors().col(k).cast<std::complex<double>>());
  }
  gl.degenerate = gl.states.size() > 1;
  return gl;
}

}  // namespace ionsim
