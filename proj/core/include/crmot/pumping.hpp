#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crmot/field_structure.hpp"
#include "crmot/slower.hpp"
#include "crmot/species.hpp"

namespace crmot {

struct PolarizationMix {
  double f_plus = 1, f_pi = 0, f_minus = 0;
  void validate() const;  // each in [0,1], sum 1 within 1e-12
};

// Detunings are referenced to the centroid-to-centroid frequency of the
// cooling line; hyperfine offsets enter through the dressed-state energies.
// doppler_sign +1 means a counter-propagating beam (detuning grows by k v).
struct PumpBeam {
  std::string name = "beam";
  double detuning_MHz = 0;
  double intensity_mW_cm2 = 0;
  PolarizationMix pol;
  double doppler_sign = 0;
};

struct PumpOptions {
  // Divert decays that land in the dark hyperfine manifold (ground states
  // labelled dark_F) into an accumulator instead of the dynamic populations.
  // Models atoms falling out of the slowing cycle; leave off when a repumper
  // beam should recycle them.
  bool divert_dark = false;
  std::optional<HalfInt> dark_F;  // default: F_max - 1 of the ground manifold
  bool nuclear_zeeman = false;
  double rebuild_field_step_G = 0.05;  // refresh dressed states when B moves more
  double max_rate_dt = 0.2;            // per-substep cap on rate * dt
};

// Ground-manifold occupations in the dressed basis (tracker slot order) plus
// the two loss accumulators. Total is conserved by pumping steps.
struct PopulationVector {
  std::vector<double> p;
  double dark = 0;
  double metastable = 0;

  double total() const;
};

// Multilevel rate-equation pump model on the cooling line of one species.
// Excited states are adiabatically eliminated: each excitation from ground
// state g through excited state e returns to ground states by squared-CG
// branching or leaks to the metastable accumulator with the branching
// probability of the non-radiative decay channels.
class PumpSystem {
 public:
  PumpSystem(const AtomicSpecies& species, std::vector<PumpBeam> beams,
             PumpOptions opts = {});

  int ground_size() const { return ng_; }
  const std::vector<StateLabel>& ground_labels() const { return g_labels_; }
  const std::vector<StateLabel>& excited_labels() const { return e_labels_; }
  int slot_of(const StateLabel& label) const;
  StateLabel stretched_label() const { return stretched_; }

  PopulationVector uniform_start() const;
  double stretched_fraction(const PopulationVector&) const;

  // Transfer rates at one (field, velocity) point, for steady-state checks:
  // dp_g/dt = -excitation[g] p_g + sum_g0 transfer[g0*n+g] p_g0, with
  // to_dark/to_metastable feeding the accumulators (included in excitation).
  struct RateTable {
    int n = 0;
    std::vector<double> excitation;  // total scatter rate out of g
    std::vector<double> transfer;    // g0 -> g return flux rate, row-major
    std::vector<double> to_dark, to_metastable;
  };
  RateTable rates(double B_G, double v_mps);

  // Advances populations by dt at fixed (B, v), subdividing internally so no
  // substep moves more than max_rate_dt worth of any state's population.
  void step(PopulationVector&, double B_G, double v_mps, double dt_s);

  const AtomicSpecies& species() const { return species_; }
  const std::vector<PumpBeam>& beams() const { return beams_; }
  const PumpOptions& options() const { return opts_; }

 private:
  void refresh(double B_G);

  AtomicSpecies species_;
  std::vector<PumpBeam> beams_;
  PumpOptions opts_;
  ManifoldTracker g_track_, e_track_;
  std::vector<StateLabel> g_labels_, e_labels_;
  std::vector<char> is_dark_;
  StateLabel stretched_;
  int ng_ = 0, ne_ = 0;
  double gamma_rad_ = 0, gamma_MHz_ = 0, isat_ = 0, p_leak_ = 0;
  std::vector<double> cg_;  // [q+1][mJ index] ladder coefficients

  double cached_B_;
  std::vector<double> strength_;  // [q+1][g*ne+e]
  std::vector<double> dE_MHz_;    // e minus g dressed energy, [g*ne+e]
  std::vector<double> branch_;    // decay branching e -> g, [e*ng+g]
};

struct PumpRecord {
  double z_m = 0, B_G = 0, stretched = 0, dark = 0, metastable = 0;
};

struct PumpDiagnostics {
  double stretched_entry = 0;
  double stretched_after_rise = 0;  // first sample past the rise zone
  double stretched_exit = 0;
  double dark_exit = 0, metastable_exit = 0;
  std::vector<PumpRecord> records;
};

// Integrates the pump model along a slower trajectory, evaluating B from the
// profile at positions interpolated between trajectory samples.
PopulationVector propagate_along(PumpSystem& system, const Trajectory& traj,
                                 const SlowerProfile& profile,
                                 PopulationVector start,
                                 PumpDiagnostics* diag = nullptr);

// Fractional reduction of the exit stretched-state population caused by a
// sigma-minus admixture f_minus in the slowing beam, relative to the same
// configuration with pure sigma-plus light: 1 - S(f_minus)/S(0). A repumper
// beam, when given, is added to both runs and recycles the dark manifold.
double sigma_minus_loss(const AtomicSpecies& species, const Trajectory& traj,
                        const SlowerProfile& profile, const PumpBeam& slowing,
                        double f_minus,
                        const std::optional<PumpBeam>& repumper,
                        PumpOptions opts = {});

}  // namespace crmot
