#pragma once

#include <string>
#include <vector>

#include "crmot/half_integer.hpp"

namespace crmot {

struct DecayChannel {
  std::string to;        // label of the destination level
  double rate_per_s = 0; // Einstein A coefficient for this branch
};

struct Level {
  std::string label;   // e.g. "7S3"
  HalfInt J;
  double g_J = 0;
  double A_MHz = 0;    // magnetic-dipole hyperfine constant
  double B_MHz = 0;    // electric-quadrupole hyperfine constant
  std::vector<DecayChannel> decays;
  // Splitting datum for levels whose hyperfine structure is stored but not
  // modeled dynamically (the metastable D states).
  double hyperfine_gap_MHz = 0;

  const DecayChannel* decay_to(const std::string& label) const;
};

struct TransitionLine {
  std::string lower, upper;
  double wavelength_nm = 0;
  double linewidth_MHz = 0;       // gamma / 2 pi
  double saturation_mW_cm2 = 0;

  double wavelength_m() const { return wavelength_nm * 1e-9; }
  double gamma_rad() const;       // angular linewidth, s^-1
  double wavenumber() const;      // 2 pi / lambda
};

struct AtomicSpecies {
  std::string name;     // e.g. "52Cr"
  double mass_u = 0;
  HalfInt I;            // nuclear spin
  double abundance = 0; // natural fraction
  double g_I = 0;       // nuclear g factor; Zeeman term is off by default
  std::vector<Level> levels;
  TransitionLine cooling;

  // Optical reference transition of this species and its measured offset from
  // the reference species' cooling line. For the reference species itself the
  // offset is zero and the F values are unused.
  std::string reference_species;
  HalfInt reference_lower_F;
  HalfInt reference_upper_F;
  double reference_offset_MHz = 0;

  const Level& level(const std::string& label) const;
  double mass_kg() const;
  // Total decay rate of the cooling line's upper level into anything other
  // than the lower level (the metastable leak).
  double leak_total_per_s() const;
};

struct SpeciesTable {
  std::vector<AtomicSpecies> species;

  const AtomicSpecies& get(const std::string& name) const;
  bool has(const std::string& name) const;
};

SpeciesTable load_species_table(const std::string& path);
void save_species_table(const SpeciesTable& table, const std::string& path);

// Path of the data file shipped with the source tree.
std::string default_species_file();

}  // namespace crmot
