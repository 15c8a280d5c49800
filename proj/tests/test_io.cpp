#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "ionsim/analysis.hpp"
#include "ionsim/crystal.hpp"
#include "ionsim/io.hpp"
#include "ionsim/modes.hpp"
#include "ionsim/units.hpp"

using namespace ionsim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ionsim_io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("bitstring renders msb-first with ion 1 leftmost") {
  CHECK(io::bitstring(0b0000, 4) == "0000");
  CHECK(io::bitstring(0b1001, 4) == "1001");
  CHECK(io::bitstring(0b0110, 4) == "0110");
  CHECK(io::bitstring(1, 7) == "0000001");
  CHECK(io::bitstring(1u << 6, 7) == "1000000");
}

TEST_CASE("histogram csv lists every configuration with its probability") {
  TempDir dir;
  Eigen::VectorXd h(4);
  h << 0.5, 0.0, 0.25, 0.25;
  const std::string path = dir.file("hist.csv");
  io::write_histogram_csv(path, h, 2);

  const auto lines = read_lines(path);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "index,bitstring,probability");
  CHECK(lines[1] == "0,00,0.5");
  CHECK(lines[3] == "2,10,0.25");

  // round trip the numeric column
  double total = 0.0;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    std::stringstream ss(lines[k]);
    std::string idx, bits, prob;
    std::getline(ss, idx, ',');
    std::getline(ss, bits, ',');
    std::getline(ss, prob, ',');
    CHECK(std::stoul(idx) == k - 1);
    total += std::stod(prob);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("geometry json and csv agree with the solved crystal") {
  TrapConfig trap;
  trap.n_ions = 4;
  trap.omega_x = mhz_to_rad(0.626);
  trap.omega_y = mhz_to_rad(0.404);
  trap.omega_z = mhz_to_rad(1.503);
  const CrystalGeometry geom = solve_equilibrium(trap, 24, 1);

  const nlohmann::json j = io::geometry_json(geom);
  CHECK(j["n_ions"] == 4);
  REQUIRE(j["positions_m"].size() == 4);
  CHECK(j["positions_m"][2][1].get<double>() == geom.positions(2, 1));
  CHECK(j["max_residual_force_n"].get<double>() == geom.max_residual_force);

  TempDir dir;
  const std::string path = dir.file("geom.csv");
  io::write_geometry_csv(path, geom);
  const auto lines = read_lines(path);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "ion_index,x,y,z");
  // full double precision survives the round trip
  std::stringstream ss(lines[1]);
  std::string tok;
  std::getline(ss, tok, ',');
  CHECK(tok == "1");
  std::getline(ss, tok, ',');
  CHECK(std::stod(tok) == geom.positions(0, 0));
}

TEST_CASE("manifold json carries degeneracy and bitstring configurations") {
  GroundManifold m;
  m.n_spins = 4;
  m.configurations = {0b0110, 0b1001};
  m.energy = -1234.5;
  m.gap = 67.8;
  const nlohmann::json j = io::manifold_json(m);
  CHECK(j["degeneracy"] == 2);
  CHECK(j["energy_rad_s"].get<double>() == -1234.5);
  CHECK(j["gap_rad_s"].get<double>() == 67.8);
  REQUIRE(j["configurations"].size() == 2);
  CHECK(j["configurations"][0] == "0110");
  CHECK(j["configurations"][1] == "1001");
}

TEST_CASE("json files survive a write/parse round trip") {
  TempDir dir;
  nlohmann::json j;
  j["a"] = 1;
  j["b"] = {1.5, 2.5};
  j["c"] = "text";
  const std::string path = dir.file("x.json");
  io::write_json(path, j);
  std::ifstream in(path);
  nlohmann::json back;
  in >> back;
  CHECK(back == j);
}

TEST_CASE("shot records render one bitstring per line") {
  TempDir dir;
  const std::vector<std::uint32_t> shots = {0b101, 0b000, 0b111};
  const std::string path = dir.file("shots.txt");
  io::write_shot_records(path, shots, 3);
  const auto lines = read_lines(path);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "101");
  CHECK(lines[1] == "000");
  CHECK(lines[2] == "111");
}

TEST_CASE("spectrum csv has one row per mode with participation columns") {
  TrapConfig trap;
  trap.n_ions = 4;
  trap.omega_x = mhz_to_rad(0.626);
  trap.omega_y = mhz_to_rad(0.404);
  trap.omega_z = mhz_to_rad(1.503);
  const ModeSpectrum spec = transverse_modes(trap, solve_equilibrium(trap, 24, 1));

  TempDir dir;
  const std::string path = dir.file("spec.csv");
  io::write_spectrum_csv(path, spec);
  const auto lines = read_lines(path);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "mode_index,frequency_hz,b_1,b_2,b_3,b_4");
  std::stringstream ss(lines[1]);
  std::string tok;
  std::getline(ss, tok, ',');
  CHECK(tok == "1");
  std::getline(ss, tok, ',');
  CHECK(std::stod(tok) == doctest::Approx(rad_to_hz(spec.frequencies(0))).epsilon(1e-15));
}

TEST_SUITE_END();
