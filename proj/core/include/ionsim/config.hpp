#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ionsim/analysis.hpp"
#include "ionsim/coupling.hpp"
#include "ionsim/crystal.hpp"
#include "ionsim/dynamics.hpp"

namespace ionsim {

// Minimal TOML-style value: scalars and flat numeric/string arrays.
using ConfigValue =
    std::variant<std::int64_t, double, bool, std::string, std::vector<double>,
                 std::vector<std::string>>;

// section -> key -> value; top-level keys live in section "".
using ConfigTable = std::map<std::string, std::map<std::string, ConfigValue>>;

ConfigTable parse_config_text(const std::string& text);
ConfigTable parse_config_file(const std::string& path);

// How the Raman detuning mu is specified in a config: absolute from the
// carrier, or as an offset from a transverse mode (0 = COM).
struct DetuningSpec {
  bool mode_relative = false;
  double absolute = 0;     // rad/s
  int reference_mode = 0;
  double offset = 0;       // rad/s, signed

  double resolve(const ModeSpectrum& spec) const;
};

// Full experiment description, mirroring the config file sections.
// Frequencies are entered in linear MHz/kHz and stored in rad/s.
struct ExperimentConfig {
  TrapConfig trap;
  RamanConfig raman;         // detuning_mu filled after mode computation
  DetuningSpec detuning;
  RampSchedule schedule;
  int hamiltonian_sign = 1;
  std::optional<NoiseModel> noise;
  std::optional<DetectionModel> detection;
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  int n_starts = 24;
  double edge_threshold = 0.3;
  int sample_points = 41;

  // Throws ConfigError naming the offending key; rejects unknown keys.
  static ExperimentConfig from_table(const ConfigTable& table);
  static ExperimentConfig from_file(const std::string& path);

  void fill_sample_times();
};

}  // namespace ionsim
