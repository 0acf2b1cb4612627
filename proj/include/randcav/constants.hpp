#ifndef RANDCAV_CONSTANTS_HPP
#define RANDCAV_CONSTANTS_HPP

namespace randcav::constants
{
// CODATA 2018 exact / recommended values, SI units.
inline constexpr double speed_of_light = 2.99792458e8;        // m/s
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double reduced_planck = 1.054571817e-34;     // J*s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double pi = 3.14159265358979323846;

// 0.64 e*nm style dipole moments convert through this factor.
inline constexpr double e_nm = elementary_charge * 1e-9; // C*m per (e*nm)

} // namespace randcav::constants

#endif // RANDCAV_CONSTANTS_HPP
