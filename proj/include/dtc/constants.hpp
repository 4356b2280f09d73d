#pragma once

#include <cmath>

// Internal unit convention: angular frequency in rad/ns, time in ns,
// capacitance in fF. Conversions to/from GHz, MHz, kHz happen only at
// I/O boundaries.
namespace dtc::constants {

inline constexpr double pi = 3.14159265358979323846;

// CODATA 2018 exact values.
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double hbar = 1.054571817e-34;               // J s

// e^2/(2*hbar), converts 1/fF to rad/ns: W = (e^2/2\hbar) M^{-1}.
// [C^2 / (J s)] * [1/fF -> 1/F: 1e15] * [rad/s -> rad/ns: 1e-9]
inline constexpr double charging_scale_rad_ns_per_inv_fF =
    elementary_charge * elementary_charge / (2.0 * hbar) * 1e6;

// Reduced flux quantum phi0 = hbar/(2e), used only for the informational
// critical-current display.
inline constexpr double phi0 = hbar / (2.0 * elementary_charge);  // Wb

inline constexpr double ghz_to_rad_ns = 2.0 * pi;       // f[GHz] -> omega[rad/ns]
inline constexpr double rad_ns_to_ghz = 1.0 / (2.0 * pi);
inline constexpr double rad_ns_to_mhz = 1e3 / (2.0 * pi);
inline constexpr double rad_ns_to_khz = 1e6 / (2.0 * pi);

}  // namespace dtc::constants
