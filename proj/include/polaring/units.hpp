// Unit conventions used across the toolkit.
//
// Model quantities are stored in spectroscopic cm^-1 (energies) and
// angstrom (lengths).  Time propagation works in angular frequency
// (rad/fs) with hbar = 1, so every energy crosses the boundary exactly
// once through cm1_to_radfs.

#pragma once

#include <numbers>

namespace polaring::units {

inline constexpr double pi = std::numbers::pi;

// speed of light in cm/fs
inline constexpr double c_cm_per_fs = 2.99792458e-5;

// 1 cm^-1 expressed as angular frequency: 2*pi*c = 1.88365156731e-4 rad/fs
inline constexpr double cm1_to_radfs = 2.0 * pi * c_cm_per_fs;

// Boltzmann constant in cm^-1 / K
inline constexpr double k_boltzmann_cm1 = 0.695034800;

inline constexpr double angstrom_to_nm = 0.1;

inline constexpr double deg_to_rad = pi / 180.0;

} // namespace polaring::units
