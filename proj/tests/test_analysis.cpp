#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>

#include "ionsim/analysis.hpp"
#include "ionsim/errors.hpp"
#include "ionsim/spins.hpp"

using namespace ionsim;

namespace {

CouplingMatrix random_couplings(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0e3);
  CouplingMatrix jm;
  jm.j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) jm.j(i, k) = jm.j(k, i) = dist(rng);
  return jm;
}

// Independent classical energy: ion i at bit (n-1-i), bit set = up (+1).
double classical_energy(const Eigen::MatrixXd& j, std::uint32_t config, int n) {
  double e = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) {
      const int si = (config >> (n - 1 - i)) & 1u ? 1 : -1;
      const int sk = (config >> (n - 1 - k)) & 1u ? 1 : -1;
      e += j(i, k) * si * sk;
    }
  return e;
}

}  // namespace

TEST_SUITE_BEGIN("analysis");

TEST_CASE("classical manifold matches exhaustive enumeration on random J") {
  std::mt19937_64 seeds(42);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(seeds() % 7);  // 2..8 ions
    const CouplingMatrix jm = random_couplings(n, seeds());
    const GroundManifold m = classical_ground_manifold(jm);

    // oracle: scan all configurations
    const std::uint32_t dim = 1u << n;
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t c = 0; c < dim; ++c)
      best = std::min(best, classical_energy(jm.j, c, n));
    const double tol = 1e-9 * std::max(1.0, std::abs(best));

    CHECK(m.energy == doctest::Approx(best).epsilon(1e-12));
    std::vector<std::uint32_t> oracle;
    double second = std::numeric_limits<double>::infinity();
    for (std::uint32_t c = 0; c < dim; ++c) {
      const double e = classical_energy(jm.j, c, n);
      if (e <= best + tol)
        oracle.push_back(c);
      else
        second = std::min(second, e);
    }
    REQUIRE(m.configurations.size() == oracle.size());
    std::vector<std::uint32_t> got = m.configurations;
    std::sort(got.begin(), got.end());
    std::sort(oracle.begin(), oracle.end());
    CHECK(got == oracle);
    CHECK(m.gap == doctest::Approx(second - best).epsilon(1e-9));
    CHECK(m.n_spins == n);

    // global-flip closure: the complement of every member is a member
    const std::uint32_t mask = dim - 1;
    for (std::uint32_t c : got)
      CHECK(std::binary_search(got.begin(), got.end(), c ^ mask));
  }
}

TEST_CASE("population histogram and sx distribution of product states") {
  for (int n : {1, 4, 6}) {
    const SpinState minus = SpinState::product_x(n, -1);
    const Eigen::VectorXd px = population_histogram(minus, PauliBasis::x);
    CHECK(px(0) == doctest::Approx(1.0).epsilon(1e-13));  // all ions -x
    CHECK(px.sum() == doctest::Approx(1.0).epsilon(1e-13));

    const Eigen::VectorXd sx = sx_distribution(minus);
    REQUIRE(sx.size() == n + 1);
    CHECK(sx(0) == doctest::Approx(1.0).epsilon(1e-12));  // S_x = -N/2

    const Eigen::VectorXd sx_plus = sx_distribution(SpinState::product_x(n, +1));
    CHECK(sx_plus(n) == doctest::Approx(1.0).epsilon(1e-12));

    // z basis: binomial over all configurations
    const Eigen::VectorXd pz = population_histogram(minus, PauliBasis::z);
    for (int c = 0; c < (1 << n); ++c)
      CHECK(pz(c) == doctest::Approx(std::pow(0.5, n)).epsilon(1e-12));
  }
}

TEST_CASE("bhattacharyya coefficient properties") {
  // dyadic distributions: identical inputs give exactly 1, no rounding slack
  Eigen::VectorXd p(4);
  p << 0.5, 0.25, 0.125, 0.125;
  CHECK(bhattacharyya(p, p) == 1.0);

  Eigen::VectorXd q(4);
  q << 0.25, 0.25, 0.25, 0.25;
  const double bc = bhattacharyya(p, q);
  CHECK(bc < 1.0);
  CHECK(bc > 0.0);
  CHECK(bc == doctest::Approx(bhattacharyya(q, p)).epsilon(1e-15));

  // disjoint supports give 0
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  CHECK(bhattacharyya(a, b) == 0.0);

  // analytic value for the half/uniform pair
  const double expected = std::sqrt(0.5 * 0.25) + std::sqrt(0.25 * 0.25) +
                          2.0 * std::sqrt(0.125 * 0.25);
  CHECK(bc == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("single-ion bhattacharyya product") {
  // ideal 50/50 ions contribute factors of exactly 1
  Eigen::VectorXd half = Eigen::VectorXd::Constant(5, 0.5);
  CHECK(bhattacharyya_single_ion_product(half) == doctest::Approx(1.0).epsilon(1e-14));

  Eigen::VectorXd skew(2);
  skew << 0.9, 0.5;
  const double f1 = std::sqrt(0.5 * 0.9) + std::sqrt(0.5 * 0.1);
  CHECK(bhattacharyya_single_ion_product(skew) == doctest::Approx(f1).epsilon(1e-14));
}

TEST_CASE("imperfect global rotation reduces to the ideal state for uniform rabi") {
  const int n = 4;
  const Eigen::VectorXd rabi = Eigen::VectorXd::Constant(n, 2.0e5);
  const SpinState st = imperfect_global_rotation(rabi, std::numbers::pi / 2);
  const SpinState ideal = SpinState::product_x(n, -1);
  CHECK((st.amplitudes - ideal.amplitudes).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(st.norm() == doctest::Approx(1.0).epsilon(1e-14));

  // non-uniform rabi: still normalized, fidelity strictly below 1
  Eigen::VectorXd skew = rabi;
  skew(0) *= 0.9;
  skew(3) *= 1.1;
  const SpinState bad = imperfect_global_rotation(skew, std::numbers::pi / 2);
  CHECK(bad.norm() == doctest::Approx(1.0).epsilon(1e-12));
  const double fid = std::norm(ideal.amplitudes.dot(bad.amplitudes));
  CHECK(fid < 1.0);
  CHECK(fid > 0.9);
}

TEST_CASE("detection model validation") {
  DetectionModel det;
  det.per_ion_fidelity = Eigen::VectorXd::Constant(3, 0.98);
  det.shots = 10;
  CHECK_NOTHROW(det.validate(3));
  SUBCASE("wrong length") { CHECK_THROWS_AS(det.validate(4), ConfigError); }
  SUBCASE("fidelity at or below one half") {
    det.per_ion_fidelity(1) = 0.5;
    CHECK_THROWS_AS(det.validate(3), ConfigError);
  }
  SUBCASE("no shots") {
    det.shots = 0;
    CHECK_THROWS_AS(det.validate(3), ConfigError);
  }
}

TEST_CASE("exact detection channel: identity at fidelity 1, exact flip algebra") {
  const int n = 3;
  std::mt19937_64 rng(5);
  Eigen::VectorXd p(1 << n);
  for (auto& v : p) v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  p /= p.sum();

  const Eigen::VectorXd id =
      apply_detection_exact(p, Eigen::VectorXd::Constant(n, 1.0));
  CHECK((id - p).cwiseAbs().maxCoeff() < 1e-15);

  // single ion, analytic: p' = F p + (1-F)(1-p)
  Eigen::VectorXd one(2);
  one << 0.3, 0.7;
  const Eigen::VectorXd out =
      apply_detection_exact(one, Eigen::VectorXd::Constant(1, 0.9));
  CHECK(out(0) == doctest::Approx(0.9 * 0.3 + 0.1 * 0.7).epsilon(1e-14));
  CHECK(out(1) == doctest::Approx(0.9 * 0.7 + 0.1 * 0.3).epsilon(1e-14));
  CHECK(out.sum() == doctest::Approx(1.0).epsilon(1e-14));

  // all-up retention with uniform fidelity f is f^n on a delta distribution
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(1 << n);
  delta((1 << n) - 1) = 1.0;
  const Eigen::VectorXd conv =
      apply_detection_exact(delta, Eigen::VectorXd::Constant(n, 0.98));
  CHECK(conv((1 << n) - 1) == doctest::Approx(std::pow(0.98, n)).epsilon(1e-12));
}

TEST_CASE("sampled detection: determinism and statistics") {
  const int n = 10;
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(1 << n);
  delta((1 << n) - 1) = 1.0;  // all ions up

  DetectionModel det;
  det.per_ion_fidelity = Eigen::VectorXd::Constant(n, 0.98);
  det.shots = 100000;
  det.rng_seed = 12345;

  const SampledReadout a = apply_detection_and_sample(delta, det);
  const SampledReadout b = apply_detection_and_sample(delta, det);
  REQUIRE(a.bitstrings.size() == static_cast<std::size_t>(det.shots));
  // byte-exact determinism for a fixed seed
  CHECK(a.bitstrings == b.bitstrings);
  CHECK((a.histogram - b.histogram).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.histogram.sum() == doctest::Approx(1.0).epsilon(1e-12));

  // retention of the all-up record: 0.98^10 within 0.005 at 1e5 shots
  CHECK(std::abs(a.histogram((1 << n) - 1) - std::pow(0.98, n)) < 0.005);

  // a different seed produces a different shot stream
  det.rng_seed = 54321;
  const SampledReadout c = apply_detection_and_sample(delta, det);
  CHECK(a.bitstrings != c.bitstrings);
}

TEST_CASE("manifold population counts both flip partners") {
  const int n = 4;
  GroundManifold m;
  m.n_spins = n;
  m.configurations = {0b0110, 0b1001};
  Eigen::VectorXd h = Eigen::VectorXd::Zero(1 << n);
  h(0b0110) = 0.4;
  h(0b1001) = 0.35;
  h(0b0000) = 0.25;
  CHECK(manifold_population(h, m) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("reduced spin density and density histogram agree with the pure state") {
  const int n = 3, levels = 4;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXcd psi(1 << n);
  for (auto& a : psi) a = std::complex<double>(dist(rng), dist(rng));
  psi.normalize();

  // spin (x) vacuum phonon state, spin index major
  Eigen::VectorXcd full = Eigen::VectorXcd::Zero((1 << n) * levels);
  for (int s = 0; s < (1 << n); ++s) full(s * levels) = psi(s);
  const Eigen::MatrixXcd rho = full * full.adjoint();

  const Eigen::MatrixXcd rho_spin = reduced_spin_density(rho, n, levels);
  const Eigen::MatrixXcd expected = psi * psi.adjoint();
  CHECK((rho_spin - expected).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(std::abs(rho_spin.trace().real() - 1.0) < 1e-13);

  SpinState st;
  st.n_spins = n;
  st.amplitudes = psi;
  for (auto basis : {PauliBasis::x, PauliBasis::y, PauliBasis::z}) {
    const Eigen::VectorXd from_density = density_histogram(rho_spin, basis);
    const Eigen::VectorXd from_state = population_histogram(st, basis);
    CHECK((from_density - from_state).cwiseAbs().maxCoeff() < 1e-12);
  }
  const Eigen::VectorXd sxd = sx_distribution_density(rho_spin);
  const Eigen::VectorXd sxs = sx_distribution(st);
  CHECK((sxd - sxs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_SUITE_END();
