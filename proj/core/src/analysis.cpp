#include "ionsim/analysis.hpp"

#include <bit>
#include <cmath>

#include "ionsim/errors.hpp"

namespace ionsim {

namespace {

// Classical Ising energy of bitmask config s under sum_{i<j} J_ij s_i s_j,
// ion i at bit (N-1-i), bit set = +1.
double config_energy(const Eigen::MatrixXd& j, std::uint32_t s, int n) {
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    const double si = (s >> (n - 1 - i) & 1u) ? 1.0 : -1.0;
    for (int k = i + 1; k < n; ++k) {
      const double sk = (s >> (n - 1 - k) & 1u) ? 1.0 : -1.0;
      e += j(i, k) * si * sk;
    }
  }
  return e;
}

}  // namespace

GroundManifold classical_ground_manifold(const CouplingMatrix& jm, double eps_deg) {
  const int n = jm.n_spins();
  if (n < 1 || n > 24) throw DomainError("classical_ground_manifold: N out of range [1, 24]");
  const double jmax = jm.j.cwiseAbs().maxCoeff();
  const double eps = eps_deg >= 0 ? eps_deg : 1e-6 * jmax;

  const std::uint32_t count = 1u << n;

  // Gray-code walk: flipping spin i changes E by -2 s_i h_i with the local
  // field h_i = sum_j J_ij s_j. Energy refreshed periodically against drift.
  Eigen::VectorXd s = -Eigen::VectorXd::Ones(n);  // config 0 = all down
  Eigen::VectorXd h = jm.j * s;
  double e = 0.5 * s.dot(h);
  std::uint32_t gray = 0;

  double e_min = e, e_next = std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> configs{0};

  for (std::uint32_t k = 1; k < count; ++k) {
    const int bit = std::countr_zero(k);
    const int ion = n - 1 - bit;
    e -= 2.0 * s(ion) * h(ion);
    h -= 2.0 * s(ion) * jm.j.col(ion);
    s(ion) = -s(ion);
    gray ^= 1u << bit;
    if ((k & 0xFFFFu) == 0) e = 0.5 * s.dot(jm.j * s);  // drift refresh

    if (e < e_min - eps) {
      e_next = std::min(e_next, e_min);
      e_min = e;
      configs.clear();
      configs.push_back(gray);
    } else if (e <= e_min + eps) {
      configs.push_back(gray);
    } else {
      e_next = std::min(e_next, e);
    }
  }

  GroundManifold gm;
  gm.n_spins = n;
  gm.energy = e_min;
  gm.gap = std::isfinite(e_next) ? e_next - e_min : 0.0;
  std::sort(configs.begin(), configs.end());
  gm.configurations = std::move(configs);
  return gm;
}

Eigen::VectorXd population_histogram(const SpinState& state, PauliBasis basis) {
  if (std::abs(state.norm() - 1.0) > 1e-6)
    throw DomainError("population_histogram: state not normalized");
  return to_basis(state, basis).cwiseAbs2();
}

Eigen::VectorXd sx_distribution(const SpinState& state) {
  const Eigen::VectorXd px = population_histogram(state, PauliBasis::x);
  const int n = state.n_spins;
  Eigen::VectorXd dist = Eigen::VectorXd::Zero(n + 1);
  for (std::uint32_t s = 0; s < px.size(); ++s)
    dist(std::popcount(s)) += px(s);  // S_x = n_up - N/2
  return dist;
}

double bhattacharyya(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw DomainError("bhattacharyya: size mismatch");
  if ((p.array() < 0).any() || (q.array() < 0).any())
    throw DomainError("bhattacharyya: negative entries");
  return (p.array() * q.array()).sqrt().sum();
}

double bhattacharyya_single_ion_product(const Eigen::VectorXd& p_up) {
  double prod = 1.0;
  const double half = std::sqrt(0.5);
  for (int i = 0; i < p_up.size(); ++i) {
    if (p_up(i) < 0 || p_up(i) > 1) throw DomainError("probability out of [0, 1]");
    prod *= half * std::sqrt(p_up(i)) + half * std::sqrt(1.0 - p_up(i));
  }
  return prod;
}

SpinState imperfect_global_rotation(const Eigen::VectorXd& rabi, double nominal_angle) {
  const int n = static_cast<int>(rabi.size());
  if ((rabi.array() <= 0).any()) throw DomainError("Rabi frequencies must be > 0");
  const double mean = rabi.mean();

  // Product state: each ion rotated from |down> by theta_i about the same
  // axis, chosen so the uniform pi/2 case lands on |-x>^N.
  SpinState state;
  state.n_spins = n;
  const std::size_t dim = std::size_t{1} << n;
  state.amplitudes.resize(dim);
  Eigen::VectorXd c(n), sgn(n);
  for (int i = 0; i < n; ++i) {
    const double theta = nominal_angle * rabi(i) / mean;
    c(i) = std::cos(theta / 2.0);
    sgn(i) = -std::sin(theta / 2.0);
  }
  for (std::size_t sidx = 0; sidx < dim; ++sidx) {
    double amp = 1.0;
    for (int i = 0; i < n; ++i)
      amp *= (sidx >> (n - 1 - i) & 1u) ? sgn(i) : c(i);
    state.amplitudes(sidx) = amp;
  }
  return state;
}

void DetectionModel::validate(int n_ions) const {
  if (per_ion_fidelity.size() != n_ions)
    throw ConfigError("per_ion_fidelity must have one entry per ion");
  if ((per_ion_fidelity.array() <= 0.5).any() || (per_ion_fidelity.array() > 1.0).any())
    throw ConfigError("detection fidelities must lie in (0.5, 1]");
  if (shots < 1) throw ConfigError("shots must be >= 1");
}

namespace {

// splitmix64: cheap counter-based generator, one stream per (seed, shot, draw).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline double uniform01(std::uint64_t seed, std::uint64_t shot, std::uint64_t draw) {
  const std::uint64_t h = splitmix64(seed ^ splitmix64(shot ^ splitmix64(draw + 0x51ull)));
  return (h >> 11) * 0x1.0p-53;
}

}  // namespace

SampledReadout apply_detection_and_sample(const Eigen::VectorXd& probabilities,
                                          const DetectionModel& det) {
  const std::size_t dim = probabilities.size();
  const int n = std::countr_zero(dim);
  det.validate(n);
  if (std::abs(probabilities.sum() - 1.0) > 1e-6)
    throw DomainError("input distribution not normalized");

  Eigen::VectorXd cdf(dim);
  double acc = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    acc += probabilities(k);
    cdf(k) = acc;
  }

  SampledReadout out;
  out.histogram = Eigen::VectorXd::Zero(dim);
  out.bitstrings.reserve(det.shots);
  for (long shot = 0; shot < det.shots; ++shot) {
    const double u = uniform01(det.rng_seed, shot, 0);
    std::uint32_t s = static_cast<std::uint32_t>(
        std::lower_bound(cdf.data(), cdf.data() + dim, u * acc) - cdf.data());
    if (s >= dim) s = static_cast<std::uint32_t>(dim - 1);
    for (int i = 0; i < n; ++i) {
      const double flip_p = 1.0 - det.per_ion_fidelity(i);
      if (uniform01(det.rng_seed, shot, 1 + i) < flip_p) s ^= 1u << (n - 1 - i);
    }
    out.bitstrings.push_back(s);
    out.histogram(s) += 1.0;
  }
  out.histogram /= static_cast<double>(det.shots);
  return out;
}

Eigen::MatrixXcd reduced_spin_density(const Eigen::MatrixXcd& rho, int n_spins, int n_levels) {
  const std::size_t sdim = std::size_t{1} << n_spins;
  if (rho.rows() != static_cast<Eigen::Index>(sdim * n_levels))
    throw DomainError("reduced_spin_density: dimension mismatch");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(sdim, sdim);
  for (std::size_t a = 0; a < sdim; ++a)
    for (std::size_t b = 0; b < sdim; ++b)
      for (int k = 0; k < n_levels; ++k)
        out(a, b) += rho(a * n_levels + k, b * n_levels + k);
  return out;
}

Eigen::VectorXd density_histogram(const Eigen::MatrixXcd& rho_spin, PauliBasis basis) {
  const std::size_t dim = rho_spin.rows();
  const int n = std::countr_zero(dim);
  if (basis == PauliBasis::z) return rho_spin.diagonal().real();
  // Probabilities <b_k| rho |b_k>: rotate each computational column and row.
  Eigen::MatrixXcd t(dim, dim);
  SpinState e;
  e.n_spins = n;
  for (std::size_t s = 0; s < dim; ++s) {
    e.amplitudes = Eigen::VectorXcd::Zero(dim);
    e.amplitudes(s) = 1.0;
    t.col(s) = to_basis(e, basis);
  }
  return (t * rho_spin * t.adjoint()).diagonal().real();
}

Eigen::VectorXd sx_distribution_density(const Eigen::MatrixXcd& rho_spin) {
  const Eigen::VectorXd px = density_histogram(rho_spin, PauliBasis::x);
  const int n = std::countr_zero(static_cast<std::size_t>(rho_spin.rows()));
  Eigen::VectorXd dist = Eigen::VectorXd::Zero(n + 1);
  for (std::uint32_t s = 0; s < px.size(); ++s) dist(std::popcount(s)) += px(s);
  return dist;
}

Eigen::VectorXd apply_detection_exact(const Eigen::VectorXd& probabilities,
                                      const Eigen::VectorXd& per_ion_fidelity) {
  const std::size_t dim = probabilities.size();
  const int n = std::countr_zero(dim);
  if (per_ion_fidelity.size() != n)
    throw DomainError("apply_detection_exact: fidelity/distribution size mismatch");
  Eigen::VectorXd p = probabilities;
  // per-qubit butterfly with the flip channel [f, 1-f; 1-f, f]
  for (int i = 0; i < n; ++i) {
    const double f = per_ion_fidelity(i);
    const std::size_t mask = std::size_t{1} << (n - 1 - i);
    for (std::size_t s = 0; s < dim; ++s) {
      if (s & mask) continue;
      const double lo = p(s), hi = p(s | mask);
      p(s) = f * lo + (1.0 - f) * hi;
      p(s | mask) = (1.0 - f) * lo + f * hi;
    }
  }
  return p;
}

double manifold_population(const Eigen::VectorXd& histogram, const GroundManifold& manifold) {
  if (manifold.configurations.empty()) throw DomainError("empty manifold");
  double mass = 0.0;
  for (std::uint32_t s : manifold.configurations) {
    if (s >= histogram.size()) throw DomainError("manifold/histogram size mismatch");
    mass += histogram(s);
  }
  return mass;
}

}  // namespace ionsim
