#pragma once

#include <numbers>

namespace nvpiezo::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Vacuum permeability (T·m/A).
inline constexpr double mu0 = 4.0e-7 * std::numbers::pi;
/// Boltzmann constant (J/K).
inline constexpr double k_boltzmann = 1.380649e-23;
/// Electron gyromagnetic ratio as a cyclic frequency, 2.8024 MHz/G (Hz/T).
inline constexpr double gamma_e_hz_per_tesla = 2.8024e10;
/// Electron gyromagnetic ratio in angular units (rad·s⁻¹·T⁻¹).
inline constexpr double gamma_e = two_pi * gamma_e_hz_per_tesla;

/// NV ground-state zero-field splitting (Hz).
inline constexpr double nv_zero_field_splitting = 2.87e9;

}  // namespace nvpiezo::constants
