#pragma once

// CODATA 2018 values. e, k_B and h are exact by definition since the 2019
// SI redefinition.
namespace rydsim::si {

inline constexpr double electron_charge = 1.602176634e-19;   // C
inline constexpr double electron_mass   = 9.1093837015e-31;  // kg
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double hbar            = 1.054571817e-34;   // J s
inline constexpr double boltzmann       = 1.380649e-23;      // J/K

}  // namespace rydsim::si
