#include "crmot/slower.hpp"

#include <algorithm>
#include <cmath>

#include "crmot/errors.hpp"
#include "crmot/units.hpp"

namespace crmot {

using units::hbar;
using units::pi;

double stretched_effective_moment(const AtomicSpecies& species) {
  const Level& lower = species.level(species.cooling.lower);
  const Level& upper = species.level(species.cooling.upper);
  return (upper.g_J * upper.J.value() - lower.g_J * lower.J.value()) *
         units::mu_B;
}

double resonance_velocity(double B_G, double detuning_MHz, double mu_prime_J_T,
                          double k_angular) {
  const double delta = 2 * pi * units::MHz_to_Hz(detuning_MHz);
  return (mu_prime_J_T * units::G_to_T(B_G) / hbar - delta) / k_angular;
}

double SlowerProfile::resonance_velocity_at(double B_G) const {
  return resonance_velocity(B_G, detuning_MHz, mu_prime_J_T, k_angular);
}

double SlowerProfile::design_capture_velocity() const {
  return resonance_velocity_at(B_max_G);
}

double SlowerProfile::design_final_velocity() const {
  return resonance_velocity_at(B_min_G);
}

double SlowerProfile::max_deceleration() const {
  return hbar * k_angular * gamma_rad / (2 * mass_kg);
}

double SlowerProfile::B(double z) const {
  if (z <= z0 || z >= z3) return 0.0;
  if (z < z1) {
    const double s = std::sin(0.5 * pi * (z - z0) / (z1 - z0));
    return B_max_G * s * s;
  }
  if (z < z2) {
    const double vc = design_capture_velocity();
    const double v2 = vc * vc - 2 * design_decel * (z - z1);
    const double v = std::sqrt(std::max(v2, 0.0));
    // Invert the resonance condition so the design atom stays resonant.
    const double delta = 2 * pi * units::MHz_to_Hz(detuning_MHz);
    return units::T_to_G(hbar * (delta + k_angular * v) / mu_prime_J_T);
  }
  if (z < z2r) return B_min_G * (z2r - z) / (z2r - z2);
  return 0.0;
}

SlowerProfile make_slower_profile(const AtomicSpecies& species,
                                  const SlowerDesign& d) {
  if (d.rise_length_m <= 0 || d.total_length_m <= d.rise_length_m)
    throw ConfigError("slower lengths must satisfy 0 < rise < total");
  if (d.return_length_m <= 0)
    throw ConfigError("slower return length must be positive");
  if (d.eta <= 0 || d.eta >= 1)
    throw ConfigError("design deceleration fraction eta must be in (0,1)");
  if (d.B_max_G <= d.B_min_G)
    throw ConfigError("slower needs B_max > B_min");

  SlowerProfile p;
  p.B_max_G = d.B_max_G;
  p.B_min_G = d.B_min_G;
  p.detuning_MHz = d.detuning_MHz;
  p.mu_prime_J_T = stretched_effective_moment(species);
  p.k_angular = species.cooling.wavenumber();
  p.gamma_rad = species.cooling.gamma_rad();
  p.mass_kg = species.mass_kg();
  p.design_decel = d.eta * p.max_deceleration();
  p.z0 = 0;
  p.z1 = d.rise_length_m;

  const double vc = p.design_capture_velocity();
  const double vf = p.design_final_velocity();
  if (vf <= 0 || vc <= vf)
    throw ConfigError("slower design gives a non-positive or non-decreasing "
                      "velocity range; check detuning and field endpoints");
  p.z2 = p.z1 + (vc * vc - vf * vf) / (2 * p.design_decel);
  p.z2r = p.z2 + d.return_length_m;
  p.z3 = d.total_length_m;
  if (p.z2 >= p.z3)
    throw ConfigError("square-root zone ends at " + std::to_string(p.z2) +
                      " m, beyond the total length; raise eta or shorten the "
                      "velocity span");
  if (p.z2r > p.z3)
    throw ConfigError("field return ends at " + std::to_string(p.z2r) +
                      " m, beyond the total length; shorten the return zone");
  return p;
}

namespace {

double scatter_rate(const SlowerProfile& p, const SlowingBeam& beam, double z,
                    double v) {
  const double delta = 2 * pi * units::MHz_to_Hz(beam.detuning_MHz);
  const double d_eff = delta + p.k_angular * v -
                       p.mu_prime_J_T * units::G_to_T(p.B(z)) / hbar;
  const double lor = 2 * d_eff / p.gamma_rad;
  return 0.5 * p.gamma_rad * beam.s0 / (1 + beam.s0 + lor * lor);
}

}  // namespace

Trajectory integrate_trajectory(double v0, const SlowerProfile& p,
                                const SlowingBeam& beam,
                                IntegrationOptions opts) {
  if (v0 <= 0) throw ConfigError("initial velocity must be positive");
  if (opts.dz_m <= 0 || opts.v_floor_mps <= 0 || opts.record_every < 1)
    throw ConfigError("bad integration options");

  const double recoil = hbar * p.k_angular / p.mass_kg;
  auto accel = [&](double z, double v) {
    return -recoil * scatter_rate(p, beam, z, v);
  };

  Trajectory tr;
  double z = p.z0, v = v0, t = 0;
  tr.points.push_back({z, v, t, scatter_rate(p, beam, z, v)});
  int step = 0;
  bool stopped = false;
  while (z < p.z3) {
    if (t > opts.t_max_s)
      throw NumericError("slower trajectory exceeded the time budget");
    const double dt = opts.dz_m / std::max(v, opts.v_floor_mps);
    const double r0 = scatter_rate(p, beam, z, v);

    const double k1v = accel(z, v), k1z = v;
    const double k2v = accel(z + 0.5 * dt * k1z, v + 0.5 * dt * k1v);
    const double k2z = v + 0.5 * dt * k1v;
    const double k3v = accel(z + 0.5 * dt * k2z, v + 0.5 * dt * k2v);
    const double k3z = v + 0.5 * dt * k2v;
    const double k4v = accel(z + dt * k3z, v + dt * k3v);
    const double k4z = v + dt * k3v;
    z += dt * (k1z + 2 * k2z + 2 * k3z + k4z) / 6;
    v += dt * (k1v + 2 * k2v + 2 * k3v + k4v) / 6;
    t += dt;
    tr.photons_scattered += 0.5 * dt * (r0 + scatter_rate(p, beam, z, v));

    if (++step % opts.record_every == 0)
      tr.points.push_back({z, v, t, scatter_rate(p, beam, z, v)});
    if (v <= 0) {
      stopped = true;
      v = 0;
      break;
    }
  }
  tr.points.push_back({z, v, t, scatter_rate(p, beam, z, v)});
  tr.exit_velocity_mps = v;
  tr.captured =
      !stopped && z >= p.z3 && v <= 1.2 * p.design_final_velocity();
  return tr;
}

double capture_velocity(const SlowerProfile& p, const SlowingBeam& beam,
                        IntegrationOptions opts) {
  auto captured = [&](double v0) {
    return integrate_trajectory(v0, p, beam, opts).captured;
  };
  double lo = std::max(1.0, 0.5 * p.design_final_velocity());
  double hi = 1.5 * p.design_capture_velocity();
  if (!captured(lo)) return 0.0;
  if (captured(hi)) return hi;
  while (hi - lo > 1.0) {
    const double mid = 0.5 * (lo + hi);
    (captured(mid) ? lo : hi) = mid;
  }
  return lo;
}

double BeamSource::alpha() const {
  return std::sqrt(2 * units::kB * temperature_K / mass_kg);
}

BeamSource make_beam_source(const AtomicSpecies& species, double temperature_K,
                            double gain) {
  if (temperature_K <= 0) throw ConfigError("oven temperature must be positive");
  if (gain < 1) throw ConfigError("transverse-cooling gain must be >= 1");
  return BeamSource{temperature_K, species.mass_kg(), gain};
}

double capture_fraction(const BeamSource& source, double V_c) {
  if (V_c <= 0) return 0.0;
  const double a = source.alpha();
  const double x = V_c * V_c / (a * a);
  return 1.0 - (1.0 + x) * std::exp(-x);
}

double slowed_flux_ratio(double stretched_fraction, double abundance_minor,
                         double abundance_major) {
  if (stretched_fraction < 0 || stretched_fraction > 1)
    throw ConfigError("stretched fraction must be in [0,1]");
  if (abundance_minor < 0 || abundance_minor > 1 || abundance_major <= 0 ||
      abundance_major > 1)
    throw ConfigError("abundances must be fractions in (0,1]");
  return stretched_fraction * abundance_minor / abundance_major;
}

}  // namespace crmot
