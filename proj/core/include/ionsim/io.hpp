#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "ionsim/analysis.hpp"
#include "ionsim/coupling.hpp"
#include "ionsim/crystal.hpp"
#include "ionsim/dynamics.hpp"
#include "ionsim/modes.hpp"

namespace ionsim::io {

std::string bitstring(std::uint32_t config, int n_spins);

void write_geometry_csv(const std::string& path, const CrystalGeometry& geom);
nlohmann::json geometry_json(const CrystalGeometry& geom);

void write_spectrum_csv(const std::string& path, const ModeSpectrum& spec);

void write_coupling_csv(const std::string& path, const CouplingMatrix& jm);
nlohmann::json graph_json(const std::vector<SignedEdge>& edges);

void write_histogram_csv(const std::string& path, const Eigen::VectorXd& histogram,
                         int n_spins);
nlohmann::json manifold_json(const GroundManifold& manifold);

void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_spin_boson_csv(const std::string& path, const SpinBosonResult& result);
void write_scan_csv(const std::string& path, const std::vector<ScanPoint>& points,
                    int n_spins);
void write_sx_csv(const std::string& path, const ReversalResult& result);
void write_shot_records(const std::string& path, const std::vector<std::uint32_t>& shots,
                        int n_spins);

void write_json(const std::string& path, const nlohmann::json& j);
void write_text(const std::string& path, const std::string& text);

}  // namespace ionsim::io
