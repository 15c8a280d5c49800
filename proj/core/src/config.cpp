#include "ionsim/config.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "ionsim/errors.hpp"

namespace ionsim {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_quote = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quote = !in_quote;
    if (line[i] == '#' && !in_quote) return line.substr(0, i);
  }
  return line;
}

ConfigValue parse_scalar(const std::string& tok, int lineno) {
  if (tok.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value");
  if (tok == "true") return true;
  if (tok == "false") return false;
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"')
      throw ConfigError("line " + std::to_string(lineno) + ": unterminated string");
    return tok.substr(1, tok.size() - 2);
  }
  try {
    std::size_t pos = 0;
    if (tok.find_first_of(".eE") == std::string::npos) {
      const std::int64_t v = std::stoll(tok, &pos);
      if (pos == tok.size()) return v;
      throw ConfigError("line " + std::to_string(lineno) + ": bad number '" + tok + "'");
    }
    const double d = std::stod(tok, &pos);
    if (pos != tok.size())
      throw ConfigError("line " + std::to_string(lineno) + ": bad number '" + tok + "'");
    return d;
  } catch (const std::invalid_argument&) {
    throw ConfigError("line " + std::to_string(lineno) + ": bad value '" + tok + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("line " + std::to_string(lineno) + ": number out of range");
  }
}

ConfigValue parse_value(const std::string& raw, int lineno) {
  const std::string tok = trim(raw);
  if (!tok.empty() && tok.front() == '[') {
    if (tok.back() != ']')
      throw ConfigError("line " + std::to_string(lineno) + ": unterminated array");
    std::vector<double> nums;
    std::vector<std::string> strs;
    std::string inner = tok.substr(1, tok.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      ConfigValue v = parse_scalar(item, lineno);
      if (std::holds_alternative<std::string>(v))
        strs.push_back(std::get<std::string>(v));
      else if (std::holds_alternative<double>(v))
        nums.push_back(std::get<double>(v));
      else if (std::holds_alternative<std::int64_t>(v))
        nums.push_back(static_cast<double>(std::get<std::int64_t>(v)));
      else
        throw ConfigError("line " + std::to_string(lineno) + ": unsupported array element");
    }
    if (!strs.empty() && !nums.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": mixed array types");
    if (!strs.empty()) return strs;
    return nums;
  }
  return parse_scalar(tok, lineno);
}

}  // namespace

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable table;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      table[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (table[section].count(key))
      throw ConfigError("duplicate key '" + key + "'");
    table[section][key] = parse_value(line.substr(eq + 1), lineno);
  }
  return table;
}

ConfigTable parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

double DetuningSpec::resolve(const ModeSpectrum& spec) const {
  if (!mode_relative) return absolute;
  if (reference_mode < 0 || reference_mode >= spec.n_modes())
    throw ConfigError("detuning reference mode out of range");
  return spec.frequencies(reference_mode) + offset;
}

namespace {

// Typed accessors with key-qualified diagnostics.
class SectionReader {
 public:
  SectionReader(const ConfigTable& table, const std::string& section)
      : section_(section) {
    auto it = table.find(section);
    if (it != table.end()) map_ = &it->second;
  }

  bool present() const { return map_ != nullptr; }
  bool has(const std::string& key) const { return map_ && map_->count(key); }

  double number(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw ConfigError(qualify(key) + ": expected a number");
  }
  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::int64_t integer(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw ConfigError(qualify(key) + ": expected an integer");
  }
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }
  std::string text(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    throw ConfigError(qualify(key) + ": expected a string");
  }
  std::string text_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }
  // scalar-or-array numeric key broadcast to n entries
  Eigen::VectorXd numbers(const std::string& key, int n) const {
    const ConfigValue& v = require(key);
    if (auto* arr = std::get_if<std::vector<double>>(&v)) {
      if (static_cast<int>(arr->size()) != n)
        throw ConfigError(qualify(key) + ": expected " + std::to_string(n) + " entries");
      return Eigen::Map<const Eigen::VectorXd>(arr->data(), n);
    }
    return Eigen::VectorXd::Constant(n, number(key));
  }

  void mark_known(std::initializer_list<std::string> keys) {
    known_.insert(keys.begin(), keys.end());
  }
  void reject_unknown() const {
    if (!map_) return;
    for (const auto& [key, value] : *map_)
      if (!known_.count(key))
        throw ConfigError("unknown key '" + qualify(key) + "'");
  }

 private:
  const ConfigValue& require(const std::string& key) const {
    if (!map_ || !map_->count(key))
      throw ConfigError("missing key '" + qualify(key) + "'");
    return map_->at(key);
  }
  std::string qualify(const std::string& key) const {
    return section_.empty() ? key : section_ + "." + key;
  }

  const std::map<std::string, ConfigValue>* map_ = nullptr;
  std::string section_;
  std::set<std::string> known_;
};

}  // namespace

ExperimentConfig ExperimentConfig::from_table(const ConfigTable& table) {
  for (const auto& [section, keys] : table) {
    static const std::set<std::string> known_sections = {"", "trap", "raman", "schedule",
                                                         "noise", "detection"};
    if (!known_sections.count(section))
      throw ConfigError("unknown section '[" + section + "]'");
  }

  ExperimentConfig cfg;

  SectionReader top(table, "");
  top.mark_known({"seed", "output_dir", "n_starts", "edge_threshold"});
  cfg.seed = static_cast<std::uint64_t>(top.integer_or("seed", 0));
  cfg.output_dir = top.text_or("output_dir", ".");
  cfg.n_starts = static_cast<int>(top.integer_or("n_starts", 24));
  cfg.edge_threshold = top.number_or("edge_threshold", 0.3);
  top.reject_unknown();

  SectionReader trap(table, "trap");
  trap.mark_known({"n_ions", "omega_x_mhz", "omega_y_mhz", "omega_z_mhz", "mass_amu",
                   "charge_e"});
  if (!trap.present()) throw ConfigError("missing section '[trap]'");
  cfg.trap.n_ions = static_cast<int>(trap.integer("n_ions"));
  cfg.trap.omega_x = mhz_to_rad(trap.number("omega_x_mhz"));
  cfg.trap.omega_y = mhz_to_rad(trap.number("omega_y_mhz"));
  cfg.trap.omega_z = mhz_to_rad(trap.number("omega_z_mhz"));
  cfg.trap.mass = trap.number_or("mass_amu", 171.0) * constants::atomic_mass_unit;
  cfg.trap.charge = trap.number_or("charge_e", 1.0) * constants::elementary_charge;
  trap.reject_unknown();
  cfg.trap.validate();

  SectionReader raman(table, "raman");
  raman.mark_known({"wavelength_nm", "delta_k_rad_per_m", "rabi_khz", "detuning_mhz",
                    "detuning_reference_mode", "detuning_offset_khz"});
  if (raman.present()) {
    cfg.raman.wavelength = raman.number_or("wavelength_nm", 355.0) * 1e-9;
    cfg.raman.delta_k = raman.number_or("delta_k_rad_per_m", 0.0);
    cfg.raman.rabi = raman.has("rabi_khz")
                         ? (khz_to_rad(1.0) * raman.numbers("rabi_khz", cfg.trap.n_ions)).eval()
                         : Eigen::VectorXd::Zero(cfg.trap.n_ions).eval();
    if (raman.has("detuning_mhz") && raman.has("detuning_reference_mode"))
      throw ConfigError("raman: give either detuning_mhz or detuning_reference_mode");
    if (raman.has("detuning_mhz")) {
      cfg.detuning.mode_relative = false;
      cfg.detuning.absolute = mhz_to_rad(raman.number("detuning_mhz"));
    } else if (raman.has("detuning_reference_mode")) {
      cfg.detuning.mode_relative = true;
      cfg.detuning.reference_mode = static_cast<int>(raman.integer("detuning_reference_mode"));
      cfg.detuning.offset = khz_to_rad(raman.number("detuning_offset_khz"));
    }
  }
  raman.reject_unknown();

  SectionReader sched(table, "schedule");
  sched.mark_known({"b0_khz", "duration_us", "ramp_alpha_per_s", "endpoint_fraction",
                    "direction", "samples", "hamiltonian_sign"});
  if (sched.present()) {
    cfg.schedule.b0 = khz_to_rad(sched.number("b0_khz"));
    cfg.schedule.duration = sched.number_or("duration_us", 300.0) * 1e-6;
    if (sched.has("ramp_alpha_per_s")) {
      cfg.schedule.ramp_alpha = sched.number("ramp_alpha_per_s");
    } else {
      const double frac = sched.number_or("endpoint_fraction", 1.0 / 20.0);
      cfg.schedule.ramp_alpha = RampSchedule::alpha_for_endpoint(cfg.schedule.duration, frac);
    }
    const std::string dir = sched.text_or("direction", "forward");
    if (dir == "forward") cfg.schedule.direction = RampDirection::forward;
    else if (dir == "reverse") cfg.schedule.direction = RampDirection::reverse;
    else if (dir == "round_trip") cfg.schedule.direction = RampDirection::round_trip;
    else throw ConfigError("schedule.direction: unknown value '" + dir + "'");
    cfg.sample_points = static_cast<int>(sched.integer_or("samples", 41));
    if (cfg.sample_points < 2) throw ConfigError("schedule.samples must be >= 2");
    cfg.hamiltonian_sign = static_cast<int>(sched.integer_or("hamiltonian_sign", 1));
    if (cfg.hamiltonian_sign != 1 && cfg.hamiltonian_sign != -1)
      throw ConfigError("schedule.hamiltonian_sign must be 1 or -1");
    cfg.fill_sample_times();
  }
  sched.reject_unknown();

  SectionReader noise(table, "noise");
  noise.mark_known({"heating_rate_quanta_per_s", "phonon_cutoff", "initial_nbar"});
  if (noise.present()) {
    NoiseModel nm;
    nm.heating_rate = noise.number("heating_rate_quanta_per_s");
    nm.phonon_cutoff = static_cast<int>(noise.integer_or("phonon_cutoff", 15));
    nm.initial_nbar = noise.number_or("initial_nbar", 0.0);
    nm.validate();
    cfg.noise = nm;
  }
  noise.reject_unknown();

  SectionReader det(table, "detection");
  det.mark_known({"fidelity", "shots"});
  if (det.present()) {
    DetectionModel dm;
    dm.per_ion_fidelity = det.numbers("fidelity", cfg.trap.n_ions);
    dm.shots = det.integer("shots");
    dm.rng_seed = cfg.seed;
    dm.validate(cfg.trap.n_ions);
    cfg.detection = dm;
  }
  det.reject_unknown();

  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_table(parse_config_file(path));
}

void ExperimentConfig::fill_sample_times() {
  schedule.sample_times.clear();
  const double total = schedule.total_duration();
  for (int k = 0; k < sample_points; ++k)
    schedule.sample_times.push_back(total * k / (sample_points - 1));
}

}  // namespace ionsim
