#pragma once

#include <vector>

#include "crmot/species.hpp"

namespace crmot {

// Effective magnetic moment of the stretched cooling transition,
// (g_e J_e - g_g J_g) mu_B, in J/T.
double stretched_effective_moment(const AtomicSpecies& species);

// Velocity resonant with a counter-propagating beam at field B:
// delta + k v / 2pi - mu' B / h = 0. k_angular is 2pi/lambda.
double resonance_velocity(double B_G, double detuning_MHz,
                          double mu_prime_J_T, double k_angular);

struct SlowerDesign {
  double B_max_G = 460;
  double B_min_G = -260;
  double detuning_MHz = -450;
  double rise_length_m = 0.1;    // branching zone: fast sin^2 rise to B_max
  double return_length_m = 0.03;  // coil-fringe return from B_min to zero
  double total_length_m = 0.9;   // exit plane; field is zero beyond this
  double eta = 0.5;              // design deceleration as a fraction of a_max
};

// Three-zone field: sin^2 rise to B_max over [z0,z1], square-root decrease to
// B_min over [z1,z2] (constant design deceleration mapped through the
// resonance condition), linear return to zero over [z2,z2r], field-free
// drift to the exit plane z3. B(z0) = 0 and B = 0 outside [z0,z2r].
struct SlowerProfile {
  double z0 = 0, z1 = 0, z2 = 0, z2r = 0, z3 = 0;  // m
  double B_max_G = 0, B_min_G = 0;
  double detuning_MHz = 0;
  double mu_prime_J_T = 0;
  double k_angular = 0;     // 2pi/lambda of the cooling line
  double gamma_rad = 0;     // angular linewidth, s^-1
  double mass_kg = 0;
  double design_decel = 0;  // m/s^2, eta * a_max

  double B(double z_m) const;
  double resonance_velocity_at(double B_G) const;
  double design_capture_velocity() const;  // resonance at B_max
  double design_final_velocity() const;    // resonance at B_min
  double max_deceleration() const;         // hbar k gamma / 2m
};

// Derives zone boundaries from the design; throws ConfigError if the
// square-root zone does not fit inside the total length or the design slows
// below zero velocity.
SlowerProfile make_slower_profile(const AtomicSpecies& species,
                                  const SlowerDesign& design = {});

struct SlowingBeam {
  double detuning_MHz = -450;
  double s0 = 5.0;  // peak saturation parameter; deceleration caps at
                    // a_max * s0/(1+s0)
};

struct TrajectoryPoint {
  double z_m = 0, v_mps = 0, t_s = 0, scatter_rate_per_s = 0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  double exit_velocity_mps = 0;
  bool captured = false;          // left the slower at <= 1.2x design final v
  double photons_scattered = 0;   // time integral of the scattering rate
};

struct IntegrationOptions {
  double dz_m = 2.5e-4;   // spatial resolution; dt = dz / max(v, v_floor)
  double v_floor_mps = 5.0;
  double t_max_s = 0.5;
  int record_every = 8;   // sample stride for Trajectory::points
};

// RK4 integration of dv/dt = -(hbar k/m)(gamma/2) s0/(1+s0+(2D/gamma)^2) with
// D(z,v) = 2pi delta + k v - mu' B(z)/hbar, from z0 until the exit plane z3.
// An atom pushed to v <= 0 inside the slower stops and is not captured.
Trajectory integrate_trajectory(double v0_mps, const SlowerProfile& profile,
                                const SlowingBeam& beam,
                                IntegrationOptions opts = {});

// Largest initial velocity that still exits captured, by bisection to 1 m/s.
double capture_velocity(const SlowerProfile& profile, const SlowingBeam& beam,
                        IntegrationOptions opts = {});

struct BeamSource {
  double temperature_K = 0;
  double mass_kg = 0;
  double gain = 1.0;  // transverse-cooling boost applied to loaded population

  double alpha() const;  // most-probable speed scale sqrt(2 kB T / m)
};

BeamSource make_beam_source(const AtomicSpecies& species, double temperature_K,
                            double gain = 1.0);

// Fraction of effusive-beam flux (~ v^3 exp(-v^2/alpha^2)) slower than V_c:
// 1 - (1+x) e^-x with x = (V_c/alpha)^2.
double capture_fraction(const BeamSource& source, double V_c_mps);

// Slowed-flux ratio of a pumped minority isotope against the majority:
// stretched-state fraction times the abundance ratio.
double slowed_flux_ratio(double stretched_fraction, double abundance_minor,
                         double abundance_major);

}  // namespace crmot
