#pragma once

#include <numbers>

namespace fluxbic {

inline constexpr double pi = std::numbers::pi;

// SI values (exact since the 2019 redefinition).
struct PhysicalConstants {
  double h = 6.62607015e-34;
  double hbar = 6.62607015e-34 / (2.0 * std::numbers::pi);
  double e_charge = 1.602176634e-19;
  double k_B = 1.380649e-23;
  double Phi0 = 6.62607015e-34 / (2.0 * 1.602176634e-19);
};

inline constexpr PhysicalConstants constants{};

// Energies are carried as E/h in GHz.
inline constexpr double ghz_to_joule(double e_ghz) { return constants.h * e_ghz * 1e9; }
inline constexpr double ghz_to_angular(double f_ghz) { return 2.0 * pi * f_ghz * 1e9; }

}  // namespace fluxbic
