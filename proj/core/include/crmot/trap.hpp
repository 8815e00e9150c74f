#pragma once

#include <limits>
#include <string>
#include <vector>

namespace crmot {

// Gaussian cloud with 1/e radii; density f(r) = exp(-(x^2+y^2)/wH^2
// - (z-zc)^2/wV^2), so the volume integral is pi^(3/2) wH^2 wV exactly.
struct CloudShape {
  double w_H_um = 0, w_V_um = 0;
  double center_dz_um = 0;  // vertical offset of the cloud center

  double volume_cm3() const;  // single-cloud effective volume V1
};

// Effective overlap volume (integral fa)(integral fb)/(integral fa fb) in
// cm^3; converts the partner's atom number into its average density seen by
// this cloud. Diverges as the clouds separate.
double overlap_volume_cm3(const CloudShape& a, const CloudShape& b);

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SpeciesTrapParams {
  std::string name = "X";
  double loading_rate_per_s = 0;  // Gamma while MOT light on and oven open
  double tau_s = kInf;            // one-body depump time, all repumpers off
  double d4_share = 127.0 / 169.0;  // fraction of the leak via the D4 channel
  double beta_cm3_s = 0;          // two-body loss coefficient
  double tau_bg_s = kInf;         // background-gas lifetime
  CloudShape cloud;
  double eta_trap = 0.5;      // leak fraction landing magnetically trapped
  double tau_m_open_s = 8;    // reservoir lifetime, oven open
  double tau_m_closed_s = 30; // reservoir lifetime, shutter closed
  double repump_pulse_tau_s = 1e-3;  // reservoir -> ground transfer constant
  // When > 0 the species is clamped: N = hold_number while its light is on,
  // 0 while off. Mirrors treating a partner cloud as a fixed density.
  double hold_number = 0;
};

struct MotModel {
  std::vector<SpeciesTrapParams> species;  // one or two
  double beta_BF_cm3_s = 0;                // interspecies loss coefficient

  void validate() const;
};

enum class EventType {
  MotOn,
  MotOff,
  OvenOpen,
  OvenClose,
  RepumpD4On,
  RepumpD4Off,
  RepumpD3On,
  RepumpD3Off,
  RepumpPulse,  // uses duration_s; implies the D4 repumper during the pulse
};

struct ScheduleEvent {
  double t_s = 0;
  EventType type = EventType::MotOn;
  int species = 0;      // ignored for oven events
  double duration_s = 0;  // RepumpPulse only
};

struct InitialTrapState {
  bool mot_on = true;
  bool repump_d4 = false, repump_d3 = false;
  double N0 = 0, Nm0 = 0;
};

struct Schedule {
  double horizon_s = 10;
  bool oven_open = true;
  std::vector<InitialTrapState> initial;  // one per species
  std::vector<ScheduleEvent> events;      // strictly increasing, in (0, horizon]

  void validate(int n_species) const;
};

struct LoadingCurve {
  std::vector<double> t_s;
  std::vector<std::vector<double>> N;   // [species][sample]
  std::vector<std::vector<double>> Nm;  // [species][sample]
};

struct TrapIntegrationOptions {
  double dt_s = 1e-4;
  double record_dt_s = 1e-3;
};

// RK4 integration of, per species,
//   dN/dt  = Gamma [on] - N leak - N/tau_bg - beta N^2/(2^(3/2) V1)
//            - beta_BF (N_other/Vbar) N + [pulse] Nm/tau_pulse
//   dNm/dt = eta_trap N leak - Nm/tau_m - [pulse] Nm/tau_pulse
// where leak = open_share/tau and open_share counts the D4/D3 channels not
// closed by their repumpers. Events toggle flags at exact times.
LoadingCurve integrate_schedule(const MotModel& model, const Schedule& schedule,
                                TrapIntegrationOptions opts = {});

// Positive root of Gamma - N/tau_tot - beta N^2/(2^(3/2) V1) = 0 for one
// species in a fixed configuration (no interspecies term).
double steady_state_number(const SpeciesTrapParams& s, bool repump_d4,
                           bool repump_d3, bool oven_open);

struct FluorescenceModel {
  double gamma_rad = 0;          // angular linewidth of the cooling line
  double s_bar = 0;              // summed MOT-beam saturation parameter
  double detuning_MHz = 0;
  double linewidth_MHz = 0;
  double cg_avg = 3.0 / 7.0;     // average squared Clebsch-Gordan factor
  double solid_angle_fraction = 0.01;  // Omega / 4 pi
  double efficiency = 1.0;       // detection gain, arbitrary units

  double rate_per_atom() const;
};

double fluorescence_signal(double N, const FluorescenceModel& m);
double atom_number_from_signal(double signal, const FluorescenceModel& m);

// Free-expansion width: sigma(t) = sqrt(sigma0^2 + kB T t^2 / m), in um.
double tof_width_um(double sigma0_um, double temperature_uK, double mass_kg,
                    double t_s);

}  // namespace crmot
