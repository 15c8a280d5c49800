#include "ionsim/crystal.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ionsim/errors.hpp"

namespace ionsim {

void TrapConfig::validate() const {
  if (n_ions < 1) throw ConfigError("n_ions must be >= 1");
  if (omega_x <= 0 || omega_y <= 0 || omega_z <= 0)
    throw ConfigError("trap frequencies must be strictly positive");
  if (mass <= 0 || charge <= 0)
    throw ConfigError("mass and charge must be strictly positive");
  // Planar crystals are rotationally pinned by the x/y anisotropy; a
  // degenerate trap leaves the mode vectors ill-defined.
  if (std::abs(omega_x - omega_y) < hz_to_rad(1.0) && n_ions > 1)
    throw ConfigError("omega_x and omega_y within 1 Hz: crystal orientation degenerate");
}

double TrapConfig::characteristic_length() const {
  const double kq2 = constants::coulomb_constant * charge * charge;
  return std::cbrt(kq2 / (mass * omega_y * omega_y));
}

double potential_and_gradient(const TrapConfig& cfg, const Eigen::MatrixXd& positions,
                              Eigen::MatrixXd& gradient) {
  const int n = static_cast<int>(positions.rows());
  const double kq2 = constants::coulomb_constant * cfg.charge * cfg.charge;
  const Eigen::Vector3d w2(cfg.omega_x * cfg.omega_x, cfg.omega_y * cfg.omega_y,
                           cfg.omega_z * cfg.omega_z);

  gradient.setZero(n, 3);
  double energy = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d r = positions.row(i);
    energy += 0.5 * cfg.mass * w2.dot(r.cwiseProduct(r));
    gradient.row(i) = cfg.mass * w2.cwiseProduct(r);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Eigen::Vector3d d = positions.row(i) - positions.row(j);
      const double rij = d.norm();
      if (rij == 0.0) throw DomainError("coincident ions: Coulomb term diverges");
      energy += kq2 / rij;
      const Eigen::Vector3d f = kq2 / (rij * rij * rij) * d;
      gradient.row(i) -= f;
      gradient.row(j) += f;
    }
  }
  return energy;
}

Eigen::MatrixXd potential_hessian(const TrapConfig& cfg, const Eigen::MatrixXd& positions) {
  const int n = static_cast<int>(positions.rows());
  const double kq2 = constants::coulomb_constant * cfg.charge * cfg.charge;
  const Eigen::Vector3d w2(cfg.omega_x * cfg.omega_x, cfg.omega_y * cfg.omega_y,
                           cfg.omega_z * cfg.omega_z);

  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) hess(3 * i + a, 3 * i + a) = cfg.mass * w2(a);

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Eigen::Vector3d d = positions.row(i) - positions.row(j);
      const double r = d.norm();
      if (r == 0.0) throw DomainError("coincident ions");
      const double r3 = r * r * r;
      const double r5 = r3 * r * r;
      // d^2 (1/r) / du_a du_b with u = r_i - r_j
      Eigen::Matrix3d block = kq2 * (3.0 / r5 * d * d.transpose() -
                                     Eigen::Matrix3d::Identity() / r3);
      hess.block<3, 3>(3 * i, 3 * i) += block;
      hess.block<3, 3>(3 * j, 3 * j) += block;
      hess.block<3, 3>(3 * i, 3 * j) -= block;
      hess.block<3, 3>(3 * j, 3 * i) -= block;
    }
  }
  return hess;
}

Eigen::MatrixXd transverse_hessian(const TrapConfig& cfg, const Eigen::MatrixXd& positions) {
  const int n = static_cast<int>(positions.rows());
  const double kq2 = constants::coulomb_constant * cfg.charge * cfg.charge;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) k(i, i) = cfg.mass * cfg.omega_z * cfg.omega_z;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Eigen::Vector3d d = positions.row(i) - positions.row(j);
      const double r = d.norm();
      const double inv_r3 = kq2 / (r * r * r);
      k(i, i) -= inv_r3;
      k(j, j) -= inv_r3;
      k(i, j) += inv_r3;
      k(j, i) += inv_r3;
    }
  }
  return k;
}

namespace {

// Minimization runs in dimensionless units: lengths in l0, energies in
// M w_y^2 l0^2. The scaled problem depends only on frequency ratios, which
// gives the s^(-2/3) scaling of equilibrium distances exactly.
struct ScaledProblem {
  Eigen::Vector3d a;  // (wx/wy)^2, 1, (wz/wy)^2
  int n;

  double energy_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
    g.setZero(x.size());
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) {
        const double v = x(3 * i + c);
        e += 0.5 * a(c) * v * v;
        g(3 * i + c) += a(c) * v;
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        Eigen::Vector3d d = x.segment<3>(3 * i) - x.segment<3>(3 * j);
        const double r = d.norm();
        if (r < 1e-12) return std::numeric_limits<double>::infinity();
        e += 1.0 / r;
        const Eigen::Vector3d f = d / (r * r * r);
        g.segment<3>(3 * i) -= f;
        g.segment<3>(3 * j) += f;
      }
    }
    return e;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) h(3 * i + c, 3 * i + c) = a(c);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        Eigen::Vector3d d = x.segment<3>(3 * i) - x.segment<3>(3 * j);
        const double r = d.norm();
        const double r3 = r * r * r;
        const double r5 = r3 * r * r;
        Eigen::Matrix3d block = 3.0 / r5 * d * d.transpose() -
                                Eigen::Matrix3d::Identity() / r3;
        h.block<3, 3>(3 * i, 3 * i) += block;
        h.block<3, 3>(3 * j, 3 * j) += block;
        h.block<3, 3>(3 * i, 3 * j) -= block;
        h.block<3, 3>(3 * j, 3 * i) -= block;
      }
    }
    return h;
  }
};

// Sunflower-spiral seed in the xy plane; spacing ~1 in scaled units.
Eigen::VectorXd lattice_guess(int n) {
  Eigen::VectorXd x(3 * n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double r = (n == 1) ? 0.0 : 0.9 * std::sqrt(i + 0.5);
    const double th = i * golden;
    x(3 * i + 0) = r * std::cos(th);
    x(3 * i + 1) = r * std::sin(th);
    x(3 * i + 2) = 0.0;
  }
  return x;
}

struct LocalResult {
  Eigen::VectorXd x;
  double energy = std::numeric_limits<double>::infinity();
  double grad_inf = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool is_minimum = false;
};

// Damped Newton with Levenberg-style regularization.
LocalResult minimize_local(const ScaledProblem& prob, Eigen::VectorXd x,
                           double gtol, int max_iter) {
  LocalResult res;
  Eigen::VectorXd g(x.size()), gn(x.size());
  double e = prob.energy_gradient(x, g);
  double lambda = 1e-3;
  for (int it = 0; it < max_iter; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < gtol) break;
    Eigen::MatrixXd h = prob.hessian(x);
    bool stepped = false;
    for (int tries = 0; tries < 60; ++tries) {
      Eigen::MatrixXd hreg = h;
      hreg.diagonal().array() += lambda;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hreg);
      if (ldlt.info() == Eigen::Success) {
        Eigen::VectorXd p = ldlt.solve(-g);
        Eigen::VectorXd xn = x + p;
        double en = prob.energy_gradient(xn, gn);
        if (std::isfinite(en) &&
            (en < e || (en == e && gn.lpNorm<Eigen::Infinity>() <
                                       g.lpNorm<Eigen::Infinity>()))) {
          x = xn;
          e = en;
          g = gn;
          lambda = std::max(lambda / 3.0, 1e-14);
          stepped = true;
          break;
        }
      }
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
    if (!stepped) break;
  }
  res.x = x;
  res.energy = e;
  res.grad_inf = g.lpNorm<Eigen::Infinity>();
  res.converged = res.grad_inf < gtol;
  return res;
}

}  // namespace

CrystalGeometry solve_equilibrium(const TrapConfig& cfg, int n_starts, std::uint64_t rng_seed,
                                  const EquilibriumOptions& opts) {
  cfg.validate();
  if (n_starts < 1) throw ConfigError("n_starts must be >= 1");

  const int n = cfg.n_ions;
  ScaledProblem prob{
      {std::pow(cfg.omega_x / cfg.omega_y, 2.0), 1.0,
       std::pow(cfg.omega_z / cfg.omega_y, 2.0)},
      n};

  const double l0 = cfg.characteristic_length();
  const double force_unit = cfg.mass * cfg.omega_y * cfg.omega_y * l0;
  // Converge well below both the SI certificate and the achievable floor.
  const double gtol = std::min(opts.force_threshold / force_unit, 1e-11);

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> perturb(0.0, 0.3);
  std::normal_distribution<double> z_jitter(0.0, 0.02);

  const Eigen::VectorXd base = lattice_guess(n);
  LocalResult best;
  bool have_any = false;
  double best_residual = std::numeric_limits<double>::infinity();

  for (int s = 0; s < n_starts; ++s) {
    Eigen::VectorXd x0 = base;
    for (int i = 0; i < n; ++i) {
      if (s > 0) {
        x0(3 * i + 0) += perturb(rng);
        x0(3 * i + 1) += perturb(rng);
      }
      x0(3 * i + 2) += z_jitter(rng);  // allow out-of-plane buckling
    }
    LocalResult r = minimize_local(prob, x0, gtol, opts.max_iterations);
    // Escape saddles by kicking along the most negative Hessian direction.
    for (int retry = 0; retry < opts.saddle_retries && r.converged; ++retry) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prob.hessian(r.x));
      if (es.eigenvalues()(0) > 1e-10) {
        r.is_minimum = true;
        break;
      }
      Eigen::VectorXd kicked = r.x + 0.05 * es.eigenvectors().col(0);
      r = minimize_local(prob, kicked, gtol, opts.max_iterations);
    }
    best_residual = std::min(best_residual, r.grad_inf * force_unit);
    if (r.converged && r.is_minimum) {
      if (!have_any || r.energy < best.energy) {
        best = r;
        have_any = true;
      }
    }
  }

  if (!have_any) {
    // Distinguish "never converged" from "converged only onto saddles".
    throw ConvergenceError("no start converged to a stable minimum; best residual " +
                               std::to_string(best_residual) + " N",
                           best_residual);
  }

  CrystalGeometry geom;
  geom.positions.resize(n, 3);
  for (int i = 0; i < n; ++i)
    geom.positions.row(i) = l0 * best.x.segment<3>(3 * i).transpose();

  // Canonical row order: sort by (x, y, z) so output labeling is stable
  // across seeds and start counts.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int c = 0; c < 3; ++c) {
      const double da = geom.positions(a, c), db = geom.positions(b, c);
      if (std::abs(da - db) > 1e-12 * std::max(1.0, std::abs(da) + std::abs(db)))
        return da < db;
    }
    return a < b;
  });
  Eigen::MatrixXd sorted(n, 3);
  for (int i = 0; i < n; ++i) sorted.row(i) = geom.positions.row(order[i]);
  geom.positions = sorted;

  Eigen::MatrixXd grad;
  geom.potential_energy = potential_and_gradient(cfg, geom.positions, grad);
  geom.max_residual_force = grad.cwiseAbs().maxCoeff();
  geom.planarity_deviation = geom.positions.col(2).cwiseAbs().maxCoeff();

  if (geom.max_residual_force > opts.force_threshold)
    throw ConvergenceError("converged minimum exceeds force threshold",
                           geom.max_residual_force);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(potential_hessian(cfg, geom.positions));
  if (es.eigenvalues()(0) < 0.0)
    throw SaddlePointError("returned configuration has an imaginary mode");

  return geom;
}

bool check_planarity(const CrystalGeometry& geom, double tol) {
  return geom.planarity_deviation <= tol;
}

}  // namespace ionsim
