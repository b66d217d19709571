#pragma once

// Boundary unit handling. Everything inside the library is SI; lab units
// (gauss, MHz, MPa, nm, ...) are accepted only when reading configuration.

#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>

#include "nvpiezo/core/constants.hpp"
#include "nvpiezo/core/error.hpp"

namespace nvpiezo::units {

inline constexpr double gauss = 1.0e-4;  // T
inline constexpr double millitesla = 1.0e-3;
inline constexpr double nanometer = 1.0e-9;
inline constexpr double picosecond = 1.0e-12;
inline constexpr double nanosecond = 1.0e-9;
inline constexpr double microsecond = 1.0e-6;
inline constexpr double kilohertz = 1.0e3;
inline constexpr double megahertz = 1.0e6;
inline constexpr double gigahertz = 1.0e9;
inline constexpr double kilopascal = 1.0e3;
inline constexpr double megapascal = 1.0e6;
inline constexpr double femtonewton = 1.0e-15;
inline constexpr double piconewton = 1.0e-12;

/// Physical dimension a configuration value is expected to carry.
enum class Dimension {
  dimensionless,
  length,
  time,
  frequency,
  stress,
  magnetic_h,  // A/m; flux-density units are converted through mu0
  flux_density,
  magnetization,
  temperature,
  energy_density,
  exchange,
  force,
};

namespace detail {

struct UnitEntry {
  std::string_view symbol;
  Dimension dim;
  double factor;
};

// flux-density entries listed under magnetic_h are divided by mu0 on use
inline constexpr UnitEntry unit_table[] = {
    {"m", Dimension::length, 1.0},
    {"mm", Dimension::length, 1e-3},
    {"um", Dimension::length, 1e-6},
    {"nm", Dimension::length, nanometer},
    {"s", Dimension::time, 1.0},
    {"ms", Dimension::time, 1e-3},
    {"us", Dimension::time, microsecond},
    {"ns", Dimension::time, nanosecond},
    {"ps", Dimension::time, picosecond},
    {"fs", Dimension::time, 1e-15},
    {"Hz", Dimension::frequency, 1.0},
    {"kHz", Dimension::frequency, kilohertz},
    {"MHz", Dimension::frequency, megahertz},
    {"GHz", Dimension::frequency, gigahertz},
    {"Pa", Dimension::stress, 1.0},
    {"kPa", Dimension::stress, kilopascal},
    {"MPa", Dimension::stress, megapascal},
    {"GPa", Dimension::stress, 1e9},
    {"A/m", Dimension::magnetic_h, 1.0},
    {"kA/m", Dimension::magnetic_h, 1e3},
    {"Oe", Dimension::magnetic_h, 1e3 / (4.0 * constants::pi)},
    {"T", Dimension::flux_density, 1.0},
    {"mT", Dimension::flux_density, millitesla},
    {"G", Dimension::flux_density, gauss},
    {"K", Dimension::temperature, 1.0},
    {"J/m^3", Dimension::energy_density, 1.0},
    {"J/m", Dimension::exchange, 1.0},
    {"N", Dimension::force, 1.0},
    {"pN", Dimension::force, piconewton},
    {"fN", Dimension::force, femtonewton},
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parse "2350 G", "3.75nm", "0.2 MPa" into SI for the requested dimension.
/// A bare number is taken as already SI. Flux densities are accepted where
/// an H-field is expected and converted with H = B/mu0; A/m is accepted
/// where a flux density is expected (B = mu0 H).
inline double parse_quantity(std::string_view text, Dimension dim) {
  const auto s = detail::trim(text);
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{}) throw DomainError("cannot parse a number from '" + std::string(text) + "'");
  const auto unit = detail::trim(std::string_view(ptr, static_cast<std::size_t>(last - ptr)));
  if (unit.empty()) return value;
  for (const auto& e : detail::unit_table) {
    if (e.symbol != unit) continue;
    if (e.dim == dim) return value * e.factor;
    if (dim == Dimension::magnetic_h && e.dim == Dimension::flux_density)
      return value * e.factor / constants::mu0;
    if (dim == Dimension::flux_density && e.dim == Dimension::magnetic_h)
      return value * e.factor * constants::mu0;
    if (dim == Dimension::magnetization && e.dim == Dimension::magnetic_h) return value * e.factor;
    break;
  }
  throw DomainError("unit '" + std::string(unit) + "' is not valid for this quantity");
}

}  // namespace nvpiezo::units
