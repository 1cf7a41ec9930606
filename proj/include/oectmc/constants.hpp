#pragma once

namespace oectmc::constants {

// CODATA 2018 exact values.
inline constexpr double avogadro = 6.02214076e23;         // 1/mol
inline constexpr double elementary_charge = 1.602176634e-19; // C
inline constexpr double boltzmann = 1.380649e-23;          // J/K

inline constexpr double pi = 3.141592653589793238462643383279502884;

// 1 M = 1000 mol/m^3, so one molecule per m^3 is 1/(1000 N_A) M.
inline constexpr double molar_per_number_density = 1.0 / (1000.0 * avogadro);

} // namespace oectmc::constants
