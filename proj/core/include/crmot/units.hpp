#pragma once

namespace crmot::units {

// SI defining constants (2019 redefinition; h and kB are exact).
inline constexpr double h = 6.62607015e-34;         // J s
inline constexpr double hbar = h / 6.283185307179586476925286766559;
inline constexpr double kB = 1.380649e-23;          // J/K
inline constexpr double c = 299792458.0;            // m/s
inline constexpr double mu_B = 9.2740100783e-24;    // J/T  (CODATA 2018)
inline constexpr double mu_N = 5.0507837461e-27;    // J/T
inline constexpr double amu = 1.66053906660e-27;    // kg
inline constexpr double g_earth = 9.80665;          // m/s^2

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Bohr magneton in frequency units; the workhorse for Zeeman shifts.
inline constexpr double mu_B_Hz_per_G = mu_B / h * 1e-4;  // ~1.3996e6 Hz/G

// Everything below converts an interface unit to the SI value used internally
// (and back). Interface units: MHz for detunings/splittings, G for fields,
// G/cm for gradients, mW/cm^2 for intensities, um for cloud sizes, uK for
// temperatures, cm^3/s for two-body coefficients. Multiplications by exact
// powers of ten, so round-trips are exact to floating-point.
inline constexpr double MHz_to_Hz(double v) { return v * 1e6; }
inline constexpr double Hz_to_MHz(double v) { return v * 1e-6; }
inline constexpr double G_to_T(double v) { return v * 1e-4; }
inline constexpr double T_to_G(double v) { return v * 1e4; }
inline constexpr double Gcm_to_Tm(double v) { return v * 1e-2; }
inline constexpr double Tm_to_Gcm(double v) { return v * 1e2; }
inline constexpr double mWcm2_to_Wm2(double v) { return v * 10.0; }
inline constexpr double Wm2_to_mWcm2(double v) { return v * 0.1; }
inline constexpr double um_to_m(double v) { return v * 1e-6; }
inline constexpr double m_to_um(double v) { return v * 1e6; }
inline constexpr double uK_to_K(double v) { return v * 1e-6; }
inline constexpr double K_to_uK(double v) { return v * 1e6; }
inline constexpr double cm3_to_m3(double v) { return v * 1e-6; }
inline constexpr double m3_to_cm3(double v) { return v * 1e6; }
inline constexpr double cm3s_to_m3s(double v) { return v * 1e-6; }
inline constexpr double m3s_to_cm3s(double v) { return v * 1e6; }
inline constexpr double u_to_kg(double v) { return v * amu; }

inline constexpr double celsius_to_K(double v) { return v + 273.15; }

}  // namespace crmot::units
