#include "ionsim/io.hpp"

#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ionsim/errors.hpp"

namespace ionsim::io {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot open output file: " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

std::string bitstring(std::uint32_t config, int n_spins) {
  std::string s(n_spins, '0');
  for (int i = 0; i < n_spins; ++i)
    if (config >> (n_spins - 1 - i) & 1u) s[i] = '1';
  return s;
}

void write_geometry_csv(const std::string& path, const CrystalGeometry& geom) {
  auto out = open_out(path);
  out << "ion_index,x,y,z\n";
  for (int i = 0; i < geom.positions.rows(); ++i)
    out << i + 1 << ',' << geom.positions(i, 0) << ',' << geom.positions(i, 1) << ','
        << geom.positions(i, 2) << '\n';
}

nlohmann::json geometry_json(const CrystalGeometry& geom) {
  nlohmann::json j;
  j["n_ions"] = geom.positions.rows();
  auto& pos = j["positions_m"];
  for (int i = 0; i < geom.positions.rows(); ++i)
    pos.push_back({geom.positions(i, 0), geom.positions(i, 1), geom.positions(i, 2)});
  j["potential_energy_j"] = geom.potential_energy;
  j["max_residual_force_n"] = geom.max_residual_force;
  j["planarity_deviation_m"] = geom.planarity_deviation;
  return j;
}

void write_spectrum_csv(const std::string& path, const ModeSpectrum& spec) {
  auto out = open_out(path);
  out << "mode_index,frequency_hz";
  for (int i = 0; i < spec.mode_matrix.rows(); ++i) out << ",b_" << i + 1;
  out << '\n';
  for (int m = 0; m < spec.n_modes(); ++m) {
    out << m + 1 << ',' << rad_to_hz(spec.frequencies(m));
    for (int i = 0; i < spec.mode_matrix.rows(); ++i) out << ',' << spec.mode_matrix(i, m);
    out << '\n';
  }
}

void write_coupling_csv(const std::string& path, const CouplingMatrix& jm) {
  auto out = open_out(path);
  const int n = jm.n_spins();
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) out << (k ? "," : "") << jm.j(i, k);
    out << '\n';
  }
}

nlohmann::json graph_json(const std::vector<SignedEdge>& edges) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : edges)
    j.push_back({{"i", e.i + 1},
                 {"j", e.j + 1},
                 {"J_rad_s", e.j_rad_s},
                 {"sign", e.antiferromagnetic ? "AFM" : "FM"}});
  return j;
}

void write_histogram_csv(const std::string& path, const Eigen::VectorXd& histogram,
                         int n_spins) {
  auto out = open_out(path);
  out << "index,bitstring,probability\n";
  for (Eigen::Index k = 0; k < histogram.size(); ++k)
    out << k << ',' << bitstring(static_cast<std::uint32_t>(k), n_spins) << ','
        << histogram(k) << '\n';
}

nlohmann::json manifold_json(const GroundManifold& manifold) {
  nlohmann::json j;
  j["energy_rad_s"] = manifold.energy;
  j["gap_rad_s"] = manifold.gap;
  j["degeneracy"] = manifold.configurations.size();
  auto& configs = j["configurations"];
  for (std::uint32_t c : manifold.configurations)
    configs.push_back(bitstring(c, manifold.n_spins));
  return j;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << "time_us,ground_manifold_pop,overlap_exact_ground\n";
  for (const auto& pt : traj.points)
    out << pt.t * 1e6 << ',' << pt.manifold_population << ',' << pt.ground_overlap << '\n';
}

void write_spin_boson_csv(const std::string& path, const SpinBosonResult& result) {
  auto out = open_out(path);
  if (result.points.empty()) throw DomainError("empty spin-boson trajectory");
  out << "time_us,nbar,trace";
  const auto n_pop = result.points.front().spin_populations_y.size();
  for (Eigen::Index k = 0; k < n_pop; ++k) out << ",p_y_" << k;
  out << '\n';
  for (const auto& pt : result.points) {
    out << pt.t * 1e6 << ',' << pt.nbar << ',' << pt.trace;
    for (Eigen::Index k = 0; k < n_pop; ++k) out << ',' << pt.spin_populations_y(k);
    out << '\n';
  }
}

void write_scan_csv(const std::string& path, const std::vector<ScanPoint>& points,
                    int n_spins) {
  auto out = open_out(path);
  out << "mu_mhz,skipped,ground_degeneracy,classical_gap_rad_s,max_abs_j_rad_s,configs\n";
  for (const auto& p : points) {
    out << rad_to_mhz(p.mu) << ',' << (p.skipped ? 1 : 0) << ',' << p.ground_degeneracy
        << ',' << p.classical_gap << ','
        << (p.skipped ? 0.0 : p.couplings.j.cwiseAbs().maxCoeff()) << ',';
    for (std::size_t k = 0; k < p.ground_configs.size(); ++k)
      out << (k ? ";" : "") << bitstring(p.ground_configs[k], n_spins);
    out << '\n';
  }
}

void write_sx_csv(const std::string& path, const ReversalResult& result) {
  auto out = open_out(path);
  const int n = static_cast<int>(result.initial_sx.size()) - 1;
  out << "sx,initial,mid,final\n";
  for (int k = 0; k <= n; ++k)
    out << k - n / 2.0 << ',' << result.initial_sx(k) << ',' << result.mid_sx(k) << ','
        << result.final_sx(k) << '\n';
}

void write_shot_records(const std::string& path, const std::vector<std::uint32_t>& shots,
                        int n_spins) {
  auto out = open_out(path);
  for (std::uint32_t s : shots) out << bitstring(s, n_spins) << '\n';
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace ionsim::io
