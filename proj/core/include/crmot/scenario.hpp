#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crmot/field_structure.hpp"
#include "crmot/pumping.hpp"
#include "crmot/slower.hpp"
#include "crmot/species.hpp"
#include "crmot/trap.hpp"

namespace crmot {

// One scenario file drives every subcommand. Sections: [run], [structure],
// [slower], [beam NAME]..., [pump], [trap NAME]..., [mot], [schedule],
// [fluorescence NAME]..., [fit], [sweep]. Unknown keys are rejected with the
// file line; a subcommand whose section is missing refuses to run.

struct StructureConfig {
  std::string species;      // resolved species name
  std::string level_label;  // resolved level (keys accept ground/excited too)
  double B_lo_G = 0, B_hi_G = 100;
  double step_G = 0;  // 0: default grid (0.25 G below 50 G, 1 G above)
  bool nuclear_zeeman = false;
  std::optional<StateLabel> crossing_a, crossing_b;
};

struct SlowerScenario {
  std::string species;
  SlowerDesign design;
  SlowingBeam beam;
  double oven_temperature_K = 1773.15;
  double gain = 1.0;
  double v0_mps = 0;  // 0: launch at the design capture velocity
  IntegrationOptions integration;
};

struct PumpScenario {
  std::string species;
  std::vector<PumpBeam> beams;  // detunings already centroid-referenced
  PumpOptions options;
  // sigma-minus admixture probed by the loss summary; 0 skips it.
  double sigma_minus_fraction = 0;
  std::string sigma_minus_repumper;  // beam name, empty for none
};

struct FitScenario {
  std::string model;  // loading | two_body | interspecies | tof
  std::string data_path;
  std::string t_column = "t_s";
  std::string y_column;  // default depends on the model
  std::string species;
  // Synthesis grid, used only when data_path is empty.
  int samples = 200;
  double t_start_s = 0, t_end_s = 10;
  double noise_rel = 0;
  // Ground-truth values for synthesis and fixed constants for the fit.
  double gamma_per_s = 0, tau_s = 0;
  double N0 = 0;
  double beta_cm3_s = 0;
  double V1_cm3 = 0;
  double t1_s = 0, t2_s = 0;
  double nbar_per_cm3 = 0;
  double beta_BF_cm3_s = 0;
  double sigma0_um = 0, temperature_uK = 0;
};

struct SweepScenario {
  std::string target;    // slower_capture | mot_steady
  std::string variable;  // e.g. "slower.detuning_MHz", "trap 53Cr.tau_s"
  double lo = 0, hi = 0;
  int steps = 2;
  std::string species;  // mot_steady: whose steady state
};

struct Scenario {
  std::string path;
  SpeciesTable table;
  std::string default_species;
  std::uint64_t seed = 1;

  std::optional<StructureConfig> structure;
  std::optional<SlowerScenario> slower;
  std::optional<PumpScenario> pump;
  std::optional<MotModel> mot;
  double gradient_G_cm = 18;  // quadrupole gradient holding the reservoir
  TrapIntegrationOptions mot_integration;
  std::optional<Schedule> schedule;
  // Parallel to mot->species; entries without a section have gamma_rad = 0.
  std::vector<FluorescenceModel> fluorescence;
  std::optional<FitScenario> fit;
  std::optional<SweepScenario> sweep;

  const AtomicSpecies& species(const std::string& name) const;
  int trap_index(const std::string& name) const;  // -1 if absent
};

Scenario parse_scenario(const std::string& file_path);

// Beam detunings may be quoted against the level centroids, the closed
// cycling transition, or the repump line out of the first dark ground
// manifold; this returns the centroid-referenced value at zero field.
double centroid_detuning_MHz(const AtomicSpecies& species,
                             const std::string& reference,
                             double quoted_MHz);

}  // namespace crmot
