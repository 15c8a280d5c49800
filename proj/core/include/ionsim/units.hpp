#pragma once

#include <numbers>

namespace ionsim {

// Physical constants (SI, CODATA 2018).
namespace constants {
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
inline constexpr double coulomb_constant = 8.9875517923e9;    // N m^2 / C^2
inline constexpr double yb171_mass = 171.0 * atomic_mass_unit;
}  // namespace constants

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Frequencies are angular (rad/s) everywhere inside the library; the
// conversions below are for config files and reports, which use linear units.
inline constexpr double mhz_to_rad(double f_mhz) { return two_pi * f_mhz * 1e6; }
inline constexpr double khz_to_rad(double f_khz) { return two_pi * f_khz * 1e3; }
inline constexpr double hz_to_rad(double f_hz) { return two_pi * f_hz; }
inline constexpr double rad_to_hz(double w) { return w / two_pi; }
inline constexpr double rad_to_mhz(double w) { return w / two_pi * 1e-6; }

}  // namespace ionsim
