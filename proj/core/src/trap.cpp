#include "crmot/trap.hpp"

#include <algorithm>
#include <cmath>

#include "crmot/errors.hpp"
#include "crmot/units.hpp"

namespace crmot {

using units::pi;

namespace {
constexpr double kSqrt8 = 2.8284271247461903;  // 2^(3/2)
}

double CloudShape::volume_cm3() const {
  if (w_H_um <= 0 || w_V_um <= 0)
    throw ConfigError("cloud radii must be positive");
  const double um3_to_cm3 = 1e-12;
  return std::pow(pi, 1.5) * w_H_um * w_H_um * w_V_um * um3_to_cm3;
}

double overlap_volume_cm3(const CloudShape& a, const CloudShape& b) {
  if (a.w_H_um <= 0 || a.w_V_um <= 0 || b.w_H_um <= 0 || b.w_V_um <= 0)
    throw ConfigError("cloud radii must be positive");
  const double h2 = a.w_H_um * a.w_H_um + b.w_H_um * b.w_H_um;
  const double v2 = a.w_V_um * a.w_V_um + b.w_V_um * b.w_V_um;
  const double dz = a.center_dz_um - b.center_dz_um;
  const double um3_to_cm3 = 1e-12;
  return std::pow(pi, 1.5) * h2 * std::sqrt(v2) * std::exp(dz * dz / v2) *
         um3_to_cm3;
}

void MotModel::validate() const {
  if (species.empty() || species.size() > 2)
    throw ConfigError("trap model needs one or two species");
  for (const SpeciesTrapParams& s : species) {
    if (s.loading_rate_per_s < 0 || s.beta_cm3_s < 0 || beta_BF_cm3_s < 0)
      throw ConfigError("trap rates must be non-negative (" + s.name + ")");
    if (s.tau_s <= 0 || s.tau_bg_s <= 0 || s.tau_m_open_s <= 0 ||
        s.tau_m_closed_s <= 0 || s.repump_pulse_tau_s <= 0)
      throw ConfigError("trap times must be positive (" + s.name + ")");
    if (s.tau_m_open_s > s.tau_m_closed_s)
      throw ConfigError("reservoir lifetime with oven open must not exceed "
                        "the shutter-closed value (" + s.name + ")");
    if (s.d4_share < 0 || s.d4_share > 1)
      throw ConfigError("d4_share must be in [0,1] (" + s.name + ")");
    if (s.eta_trap < 0 || s.eta_trap > 1)
      throw ConfigError("eta_trap must be in [0,1] (" + s.name + ")");
    if (s.hold_number < 0)
      throw ConfigError("hold_number must be non-negative (" + s.name + ")");
    if (s.beta_cm3_s > 0 && (s.cloud.w_H_um <= 0 || s.cloud.w_V_um <= 0))
      throw ConfigError("two-body loss needs positive cloud radii (" +
                        s.name + ")");
  }
  if (species.size() == 2 && beta_BF_cm3_s > 0) {
    for (const SpeciesTrapParams& s : species)
      if (s.cloud.w_H_um <= 0 || s.cloud.w_V_um <= 0)
        throw ConfigError("interspecies loss needs positive cloud radii");
  }
}

void Schedule::validate(int n_species) const {
  if (horizon_s <= 0) throw ConfigError("schedule horizon must be positive");
  if (static_cast<int>(initial.size()) != n_species)
    throw ConfigError("schedule initial states must match the species count");
  for (const InitialTrapState& s : initial)
    if (s.N0 < 0 || s.Nm0 < 0)
      throw ConfigError("initial atom numbers must be non-negative");
  double prev = 0;
  bool first = true;
  for (const ScheduleEvent& e : events) {
    if (!first && e.t_s <= prev)
      throw ConfigError("schedule events out of order: t=" +
                        std::to_string(e.t_s) + " s follows t=" +
                        std::to_string(prev) + " s");
    if (e.t_s <= 0 || e.t_s > horizon_s)
      throw ConfigError("event time " + std::to_string(e.t_s) +
                        " s outside (0, horizon]");
    if (e.type != EventType::OvenOpen && e.type != EventType::OvenClose &&
        (e.species < 0 || e.species >= n_species))
      throw ConfigError("event species index out of range");
    if (e.type == EventType::RepumpPulse && e.duration_s <= 0)
      throw ConfigError("repump pulse needs a positive duration");
    prev = e.t_s;
    first = false;
  }
}

namespace {

struct Flags {
  std::vector<char> mot_on, rd4, rd3;
  std::vector<double> pulse_until;  // absolute end time, -inf if none
  bool oven_open = true;
};

double leak_rate(const SpeciesTrapParams& s, bool rd4, bool rd3, bool pulse) {
  if (s.tau_s == kInf) return 0.0;
  const double open =
      ((rd4 || pulse) ? 0.0 : s.d4_share) + (rd3 ? 0.0 : 1.0 - s.d4_share);
  return open / s.tau_s;
}

}  // namespace

LoadingCurve integrate_schedule(const MotModel& model, const Schedule& sched,
                                TrapIntegrationOptions opts) {
  model.validate();
  const int n = static_cast<int>(model.species.size());
  sched.validate(n);
  if (opts.dt_s <= 0 || opts.record_dt_s <= 0)
    throw ConfigError("integration steps must be positive");

  Flags f;
  f.mot_on.resize(n);
  f.rd4.resize(n);
  f.rd3.resize(n);
  f.pulse_until.assign(n, -kInf);
  f.oven_open = sched.oven_open;
  for (int i = 0; i < n; ++i) {
    f.mot_on[i] = sched.initial[i].mot_on;
    f.rd4[i] = sched.initial[i].repump_d4;
    f.rd3[i] = sched.initial[i].repump_d3;
  }

  // State y = [N_0..N_{n-1}, Nm_0..Nm_{n-1}].
  std::vector<double> y(2 * n);
  for (int i = 0; i < n; ++i) {
    y[i] = sched.initial[i].N0;
    y[n + i] = sched.initial[i].Nm0;
  }

  const double vbar =
      n == 2 ? overlap_volume_cm3(model.species[0].cloud,
                                  model.species[1].cloud)
             : kInf;

  auto apply_hold = [&](std::vector<double>& state) {
    for (int i = 0; i < n; ++i)
      if (model.species[i].hold_number > 0)
        state[i] = f.mot_on[i] ? model.species[i].hold_number : 0.0;
  };

  auto deriv = [&](const std::vector<double>& s, double t,
                   std::vector<double>& d) {
    for (int i = 0; i < n; ++i) {
      const SpeciesTrapParams& sp = model.species[i];
      const bool pulsing = t < f.pulse_until[i];
      const double lk = leak_rate(sp, f.rd4[i], f.rd3[i], pulsing);
      const double Ni = s[i];
      double dN = 0;
      if (sp.hold_number <= 0) {
        if (f.mot_on[i] && f.oven_open) dN += sp.loading_rate_per_s;
        dN -= Ni * lk;
        if (sp.tau_bg_s != kInf) dN -= Ni / sp.tau_bg_s;
        if (sp.beta_cm3_s > 0)
          dN -= sp.beta_cm3_s * Ni * Ni / (kSqrt8 * sp.cloud.volume_cm3());
        if (n == 2 && model.beta_BF_cm3_s > 0)
          dN -= model.beta_BF_cm3_s * (s[1 - i] / vbar) * Ni;
        if (pulsing) dN += s[n + i] / sp.repump_pulse_tau_s;
      }
      d[i] = dN;
      double dM = sp.eta_trap * Ni * lk -
                  s[n + i] / (f.oven_open ? sp.tau_m_open_s : sp.tau_m_closed_s);
      if (pulsing) dM -= s[n + i] / sp.repump_pulse_tau_s;
      d[n + i] = dM;
    }
  };

  // Segment boundaries: event times and pulse ends, then the horizon.
  std::vector<double> edges;
  for (const ScheduleEvent& e : sched.events) {
    edges.push_back(e.t_s);
    if (e.type == EventType::RepumpPulse)
      edges.push_back(std::min(e.t_s + e.duration_s, sched.horizon_s));
  }
  edges.push_back(sched.horizon_s);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  LoadingCurve out;
  out.N.assign(n, {});
  out.Nm.assign(n, {});
  auto record = [&](double t) {
    out.t_s.push_back(t);
    for (int i = 0; i < n; ++i) {
      out.N[i].push_back(y[i]);
      out.Nm[i].push_back(y[n + i]);
    }
  };

  apply_hold(y);
  record(0.0);
  double next_record = opts.record_dt_s;
  double t = 0;
  size_t next_event = 0;
  std::vector<double> k1(2 * n), k2(2 * n), k3(2 * n), k4(2 * n), tmp(2 * n);

  for (double edge : edges) {
    if (edge <= t) continue;
    // Apply events scheduled exactly at the segment start.
    while (next_event < sched.events.size() &&
           sched.events[next_event].t_s <= t + 1e-15) {
      const ScheduleEvent& e = sched.events[next_event++];
      switch (e.type) {
        case EventType::MotOn: f.mot_on[e.species] = true; break;
        case EventType::MotOff: f.mot_on[e.species] = false; break;
        case EventType::OvenOpen: f.oven_open = true; break;
        case EventType::OvenClose: f.oven_open = false; break;
        case EventType::RepumpD4On: f.rd4[e.species] = true; break;
        case EventType::RepumpD4Off: f.rd4[e.species] = false; break;
        case EventType::RepumpD3On: f.rd3[e.species] = true; break;
        case EventType::RepumpD3Off: f.rd3[e.species] = false; break;
        case EventType::RepumpPulse:
          f.pulse_until[e.species] = e.t_s + e.duration_s;
          break;
      }
    }
    apply_hold(y);

    const double span = edge - t;
    const int steps = std::max(1, static_cast<int>(std::ceil(span / opts.dt_s)));
    const double h = span / steps;
    for (int k = 0; k < steps; ++k) {
      deriv(y, t, k1);
      for (int j = 0; j < 2 * n; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
      deriv(tmp, t + 0.5 * h, k2);
      for (int j = 0; j < 2 * n; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
      deriv(tmp, t + 0.5 * h, k3);
      for (int j = 0; j < 2 * n; ++j) tmp[j] = y[j] + h * k3[j];
      deriv(tmp, t + h, k4);
      for (int j = 0; j < 2 * n; ++j)
        y[j] += h * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]) / 6;
      t += h;
      for (int j = 0; j < 2 * n; ++j) {
        if (y[j] < 0) {
          if (y[j] < -1e-6 * (1 + std::abs(y[j])))
            throw NumericError("trap integration drove a number negative; "
                               "reduce dt");
          y[j] = 0;
        }
      }
      apply_hold(y);
      while (next_record <= t + 1e-12 && next_record <= sched.horizon_s) {
        record(next_record);
        next_record += opts.record_dt_s;
      }
    }
    t = edge;
  }
  if (out.t_s.back() < sched.horizon_s) record(sched.horizon_s);
  return out;
}

double steady_state_number(const SpeciesTrapParams& s, bool repump_d4,
                           bool repump_d3, bool oven_open) {
  if (!oven_open) return 0.0;
  const double gamma = s.loading_rate_per_s;
  double inv_tau = leak_rate(s, repump_d4, repump_d3, false);
  if (s.tau_bg_s != kInf) inv_tau += 1.0 / s.tau_bg_s;
  const double a =
      s.beta_cm3_s > 0 ? s.beta_cm3_s / (kSqrt8 * s.cloud.volume_cm3()) : 0.0;
  if (a == 0) {
    if (inv_tau == 0)
      throw ConfigError("steady state undefined without any loss channel");
    return gamma / inv_tau;
  }
  return (-inv_tau + std::sqrt(inv_tau * inv_tau + 4 * a * gamma)) / (2 * a);
}

double FluorescenceModel::rate_per_atom() const {
  const double sc = s_bar * cg_avg;
  const double lor = 2 * detuning_MHz / linewidth_MHz;
  return 0.5 * gamma_rad * sc / (1 + sc + lor * lor) * solid_angle_fraction *
         efficiency;
}

double fluorescence_signal(double N, const FluorescenceModel& m) {
  if (N < 0) throw ConfigError("atom number must be non-negative");
  return N * m.rate_per_atom();
}

double atom_number_from_signal(double signal, const FluorescenceModel& m) {
  if (signal == 0) return 0.0;
  const double r = m.rate_per_atom();
  if (!(r > 0))  // also rejects NaN from an all-zero model
    throw ConfigError("cannot invert a fluorescence model with zero rate");
  return signal / r;
}

double tof_width_um(double sigma0_um, double temperature_uK, double mass_kg,
                    double t_s) {
  if (sigma0_um < 0 || temperature_uK < 0 || mass_kg <= 0 || t_s < 0)
    throw ConfigError("time-of-flight inputs must be non-negative");
  const double s0 = units::um_to_m(sigma0_um);
  const double s2 = s0 * s0 + units::kB * units::uK_to_K(temperature_uK) *
                                  t_s * t_s / mass_kg;
  return units::m_to_um(std::sqrt(s2));
}

}  // namespace crmot
