// Microbenchmarks for the hot paths: equilibrium solve, mode computation,
// coupling evaluation, classical manifold enumeration, and the TFIM
// matrix-free apply / short evolution step.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <random>

#include "ionsim/analysis.hpp"
#include "ionsim/coupling.hpp"
#include "ionsim/crystal.hpp"
#include "ionsim/dynamics.hpp"
#include "ionsim/modes.hpp"
#include "ionsim/spins.hpp"
#include "ionsim/units.hpp"

using namespace ionsim;

namespace {

TrapConfig trap_for(int n_ions) {
  TrapConfig cfg;
  cfg.n_ions = n_ions;
  if (n_ions == 7) {
    cfg.omega_x = mhz_to_rad(0.486);
    cfg.omega_y = mhz_to_rad(0.407);
    cfg.omega_z = mhz_to_rad(1.482);
  } else {
    cfg.omega_x = mhz_to_rad(0.626);
    cfg.omega_y = mhz_to_rad(0.404);
    cfg.omega_z = mhz_to_rad(1.503);
  }
  return cfg;
}

void bm_solve_equilibrium(benchmark::State& state) {
  const TrapConfig cfg = trap_for(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_equilibrium(cfg, 8, 1));
  }
}
BENCHMARK(bm_solve_equilibrium)->Arg(4)->Arg(7)->Arg(10);

void bm_transverse_modes(benchmark::State& state) {
  const TrapConfig cfg = trap_for(static_cast<int>(state.range(0)));
  const CrystalGeometry geom = solve_equilibrium(cfg, 8, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(transverse_modes(cfg, geom));
  }
}
BENCHMARK(bm_transverse_modes)->Arg(4)->Arg(7)->Arg(10);

void bm_compute_couplings(benchmark::State& state) {
  const TrapConfig cfg = trap_for(static_cast<int>(state.range(0)));
  const ModeSpectrum spec = transverse_modes(cfg, solve_equilibrium(cfg, 8, 1));
  RamanConfig raman;
  raman.rabi = Eigen::VectorXd::Constant(cfg.n_ions, khz_to_rad(50.0));
  raman.detuning_mu = spec.frequencies(0) + khz_to_rad(10.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_couplings(spec, raman, cfg.mass));
  }
}
BENCHMARK(bm_compute_couplings)->Arg(4)->Arg(7)->Arg(10);

void bm_classical_manifold(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist(0.0, 1.0e3);
  CouplingMatrix jm;
  jm.j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) jm.j(i, k) = jm.j(k, i) = dist(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(classical_ground_manifold(jm));
  }
}
BENCHMARK(bm_classical_manifold)->Arg(7)->Arg(10)->Arg(16);

void bm_apply_tfim(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) j(i, k) = j(k, i) = 1.0e3 * dist(rng);
  const std::size_t dim = std::size_t{1} << n;
  Eigen::VectorXcd psi(dim), out(dim);
  for (auto& a : psi) a = std::complex<double>(dist(rng), dist(rng));
  psi.normalize();
  for (auto _ : state) {
    apply_tfim(j, khz_to_rad(10.0), psi, out);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(bm_apply_tfim)->Arg(4)->Arg(10)->Arg(14);

void bm_evolve_tfim_short(benchmark::State& state) {
  const TrapConfig cfg = trap_for(4);
  const ModeSpectrum spec = transverse_modes(cfg, solve_equilibrium(cfg, 8, 1));
  RamanConfig raman;
  raman.rabi = Eigen::VectorXd::Constant(4, khz_to_rad(50.0));
  raman.detuning_mu = spec.frequencies(0) + khz_to_rad(10.0);
  const CouplingMatrix jm = compute_couplings(spec, raman, cfg.mass);
  RampSchedule s;
  s.b0 = khz_to_rad(29.0);
  s.ramp_alpha = 3e5;
  s.duration = 50e-6;
  s.sample_times = {0.0, s.duration};
  const SpinState init = SpinState::product_x(4, +1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve_tfim(jm, s, init, 1e-8, -1));
  }
}
BENCHMARK(bm_evolve_tfim_short);

}  // namespace

BENCHMARK_MAIN();
