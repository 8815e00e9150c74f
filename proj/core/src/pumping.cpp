#include "crmot/pumping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crmot/angular.hpp"
#include "crmot/errors.hpp"
#include "crmot/units.hpp"

namespace crmot {

void PolarizationMix::validate() const {
  for (double f : {f_plus, f_pi, f_minus})
    if (!(f >= 0 && f <= 1))
      throw ConfigError("polarization fractions must be in [0,1]");
  if (std::abs(f_plus + f_pi + f_minus - 1.0) > 1e-12)
    throw ConfigError("polarization fractions must sum to 1");
}

double PopulationVector::total() const {
  double s = dark + metastable;
  for (double x : p) s += x;
  return s;
}

PumpSystem::PumpSystem(const AtomicSpecies& species,
                       std::vector<PumpBeam> beams, PumpOptions opts)
    : species_(species),
      beams_(std::move(beams)),
      opts_(opts),
      g_track_(species_.level(species_.cooling.lower), species_.I,
               species_.g_I, FieldOptions{opts_.nuclear_zeeman, 0.25}),
      e_track_(species_.level(species_.cooling.upper), species_.I,
               species_.g_I, FieldOptions{opts_.nuclear_zeeman, 0.25}),
      cached_B_(std::numeric_limits<double>::quiet_NaN()) {
  for (const PumpBeam& b : beams_) {
    if (!(b.intensity_mW_cm2 >= 0))
      throw ConfigError("beam '" + b.name + "' has negative intensity");
    if (!std::isfinite(b.detuning_MHz))
      throw ConfigError("beam '" + b.name + "' has non-finite detuning");
    b.pol.validate();
  }
  if (opts_.rebuild_field_step_G <= 0 || opts_.max_rate_dt <= 0)
    throw ConfigError("pump option steps must be positive");

  for (const EigenState& s : g_track_.current().states)
    g_labels_.push_back(s.label);
  for (const EigenState& s : e_track_.current().states)
    e_labels_.push_back(s.label);
  ng_ = static_cast<int>(g_labels_.size());
  ne_ = static_cast<int>(e_labels_.size());

  const HalfInt Fmax{g_track_.basis().J.twice + species_.I.twice};
  stretched_ = StateLabel{Fmax, Fmax};

  HalfInt dark_F = opts_.dark_F.value_or(HalfInt{Fmax.twice - 2});
  if (opts_.divert_dark) {
    if (species_.I.twice == 0)
      throw ConfigError("no dark hyperfine manifold exists for I = 0");
    bool any = false;
    for (const StateLabel& l : g_labels_) any |= (l.F == dark_F);
    if (!any)
      throw ConfigError("dark manifold F=" + dark_F.str() +
                        " not present in the ground level");
  }
  is_dark_.assign(ng_, 0);
  for (int g = 0; g < ng_; ++g) is_dark_[g] = (g_labels_[g].F == dark_F);

  gamma_rad_ = species_.cooling.gamma_rad();
  gamma_MHz_ = species_.cooling.linewidth_MHz;
  isat_ = species_.cooling.saturation_mW_cm2;
  const double leak = species_.leak_total_per_s();
  p_leak_ = leak / (gamma_rad_ + leak);

  const HalfInt Jg = g_track_.basis().J, Je = e_track_.basis().J;
  cg_.assign(3 * (Jg.twice + 1), 0.0);
  for (int q = -1; q <= 1; ++q)
    for (int tmj = -Jg.twice; tmj <= Jg.twice; tmj += 2) {
      HalfInt mJ{tmj};
      HalfInt mJe = mJ + HalfInt::from_int(q);
      if (std::abs(mJe.twice) > Je.twice) continue;
      cg_[(q + 1) * (Jg.twice + 1) + (tmj + Jg.twice) / 2] =
          clebsch_gordan(Jg, mJ, HalfInt::from_int(1), HalfInt::from_int(q),
                         Je, mJe);
    }
}

int PumpSystem::slot_of(const StateLabel& label) const {
  for (int g = 0; g < ng_; ++g)
    if (g_labels_[g] == label) return g;
  return -1;
}

PopulationVector PumpSystem::uniform_start() const {
  PopulationVector v;
  v.p.assign(ng_, 1.0 / ng_);
  return v;
}

double PumpSystem::stretched_fraction(const PopulationVector& v) const {
  const int s = slot_of(stretched_);
  return s < 0 ? 0.0 : v.p[s];
}

void PumpSystem::refresh(double B_G) {
  const EigenLevels& gl = g_track_.advance(B_G);
  const EigenLevels& el = e_track_.advance(B_G);
  const ProductBasis& gb = g_track_.basis();
  const ProductBasis& eb = e_track_.basis();

  strength_.assign(3 * ng_ * ne_, 0.0);
  dE_MHz_.assign(ng_ * ne_, 0.0);
  branch_.assign(ne_ * ng_, 0.0);

  for (int g = 0; g < ng_; ++g)
    for (int e = 0; e < ne_; ++e) {
      dE_MHz_[g * ne_ + e] =
          el.states[e].energy_MHz - gl.states[g].energy_MHz;
      const int dq2 = el.states[e].mF.twice - gl.states[g].mF.twice;
      if (dq2 != -2 && dq2 != 0 && dq2 != 2) continue;
      const int q = dq2 / 2;
      double amp = 0;
      for (int tmj = -gb.J.twice; tmj <= gb.J.twice; tmj += 2) {
        const double cg = cg_[(q + 1) * (gb.J.twice + 1) + (tmj + gb.J.twice) / 2];
        if (cg == 0) continue;
        HalfInt mJ{tmj};
        HalfInt mJe = mJ + HalfInt::from_int(q);
        for (int tmi = -gb.I.twice; tmi <= gb.I.twice; tmi += 2) {
          HalfInt mI{tmi};
          amp += gl.states[g].amplitudes[gb.index(mJ, mI)] *
                 el.states[e].amplitudes[eb.index(mJe, mI)] * cg;
        }
      }
      const double s = amp * amp;
      strength_[(q + 1) * ng_ * ne_ + g * ne_ + e] = s;
      branch_[e * ng_ + g] += s;
    }
  cached_B_ = B_G;
}

PumpSystem::RateTable PumpSystem::rates(double B_G, double v_mps) {
  if (!(std::abs(B_G - cached_B_) <= opts_.rebuild_field_step_G))
    refresh(B_G);

  RateTable rt;
  rt.n = ng_;
  rt.excitation.assign(ng_, 0.0);
  rt.transfer.assign(ng_ * ng_, 0.0);
  rt.to_dark.assign(ng_, 0.0);
  rt.to_metastable.assign(ng_, 0.0);

  const double doppler_MHz =
      species_.cooling.wavenumber() * v_mps / (2 * units::pi) * 1e-6;

  // Summed bare saturation per ground state: every transition sharing g
  // contributes to the power broadening of all of them.
  std::vector<double> xsum(ng_, 0.0);
  for (const PumpBeam& b : beams_) {
    const double s0 = b.intensity_mW_cm2 / isat_;
    const double fq[3] = {b.pol.f_minus, b.pol.f_pi, b.pol.f_plus};
    for (int qi = 0; qi < 3; ++qi) {
      if (fq[qi] == 0 || s0 == 0) continue;
      for (int g = 0; g < ng_; ++g)
        for (int e = 0; e < ne_; ++e)
          xsum[g] += s0 * fq[qi] * strength_[qi * ng_ * ne_ + g * ne_ + e];
    }
  }

  std::vector<double> R(ng_ * ne_, 0.0);
  for (const PumpBeam& b : beams_) {
    const double s0 = b.intensity_mW_cm2 / isat_;
    const double fq[3] = {b.pol.f_minus, b.pol.f_pi, b.pol.f_plus};
    for (int qi = 0; qi < 3; ++qi) {
      if (fq[qi] == 0 || s0 == 0) continue;
      for (int g = 0; g < ng_; ++g)
        for (int e = 0; e < ne_; ++e) {
          const double x = s0 * fq[qi] * strength_[qi * ng_ * ne_ + g * ne_ + e];
          if (x == 0) continue;
          const double det = b.detuning_MHz + b.doppler_sign * doppler_MHz -
                             dE_MHz_[g * ne_ + e];
          const double lor = 2 * det / gamma_MHz_;
          R[g * ne_ + e] +=
              0.5 * gamma_rad_ * x / (1 + xsum[g] + lor * lor);
        }
    }
  }

  for (int g = 0; g < ng_; ++g)
    for (int e = 0; e < ne_; ++e) {
      const double r = R[g * ne_ + e];
      if (r == 0) continue;
      rt.excitation[g] += r;
      rt.to_metastable[g] += r * p_leak_;
      const double ret = r * (1 - p_leak_);
      for (int g2 = 0; g2 < ng_; ++g2) {
        const double flux = ret * branch_[e * ng_ + g2];
        if (opts_.divert_dark && is_dark_[g2])
          rt.to_dark[g] += flux;
        else
          rt.transfer[g * ng_ + g2] += flux;
      }
    }
  return rt;
}

void PumpSystem::step(PopulationVector& pop, double B_G, double v_mps,
                      double dt_s) {
  if (static_cast<int>(pop.p.size()) != ng_)
    throw ConfigError("population vector size does not match the manifold");
  if (dt_s < 0) throw ConfigError("negative time step");
  if (dt_s == 0) return;

  const RateTable rt = rates(B_G, v_mps);
  double rmax = 0;
  for (double r : rt.excitation) rmax = std::max(rmax, r);
  const int nsub =
      std::max(1, static_cast<int>(std::ceil(rmax * dt_s / opts_.max_rate_dt)));
  const double h = dt_s / nsub;

  std::vector<double> next(ng_);
  for (int k = 0; k < nsub; ++k) {
    double d_dark = 0, d_meta = 0;
    for (int g = 0; g < ng_; ++g) {
      next[g] = pop.p[g] * (1 - h * rt.excitation[g]);
      d_dark += pop.p[g] * rt.to_dark[g];
      d_meta += pop.p[g] * rt.to_metastable[g];
    }
    for (int g0 = 0; g0 < ng_; ++g0) {
      const double pg0 = pop.p[g0];
      if (pg0 == 0) continue;
      const double* row = rt.transfer.data() + g0 * ng_;
      for (int g = 0; g < ng_; ++g) next[g] += h * pg0 * row[g];
    }
    for (int g = 0; g < ng_; ++g) {
      if (next[g] < 0) {
        if (next[g] < -1e-9)
          throw NumericError("pump step drove a population negative; "
                             "reduce the step size");
        next[g] = 0;
      }
    }
    pop.p.swap(next);
    pop.dark += h * d_dark;
    pop.metastable += h * d_meta;
  }
}

PopulationVector propagate_along(PumpSystem& system, const Trajectory& traj,
                                 const SlowerProfile& profile,
                                 PopulationVector start,
                                 PumpDiagnostics* diag) {
  PopulationVector pop = std::move(start);
  const auto& pts = traj.points;
  auto record = [&](double z, double B) {
    if (!diag) return;
    diag->records.push_back({z, B, system.stretched_fraction(pop), pop.dark,
                             pop.metastable});
  };
  if (diag) {
    *diag = PumpDiagnostics{};
    diag->stretched_entry = system.stretched_fraction(pop);
  }
  if (pts.size() < 2) {
    if (diag) {
      record(pts.empty() ? 0.0 : pts.front().z_m,
             pts.empty() ? 0.0 : profile.B(pts.front().z_m));
      diag->stretched_after_rise = diag->stretched_entry;
      diag->stretched_exit = diag->stretched_entry;
      diag->dark_exit = pop.dark;
      diag->metastable_exit = pop.metastable;
    }
    return pop;
  }

  record(pts.front().z_m, profile.B(pts.front().z_m));
  bool rise_done = false;
  const double dB_max = system.options().rebuild_field_step_G;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const TrajectoryPoint& a = pts[i];
    const TrajectoryPoint& b = pts[i + 1];
    const double dt = b.t_s - a.t_s;
    if (dt <= 0) continue;
    const double dB = profile.B(b.z_m) - profile.B(a.z_m);
    const int nsub =
        std::max(1, static_cast<int>(std::ceil(std::abs(dB) / dB_max)));
    for (int k = 0; k < nsub; ++k) {
      const double f = (k + 0.5) / nsub;
      const double z = a.z_m + (b.z_m - a.z_m) * f;
      const double v = a.v_mps + (b.v_mps - a.v_mps) * f;
      system.step(pop, profile.B(z), v, dt / nsub);
    }
    record(b.z_m, profile.B(b.z_m));
    if (!rise_done && b.z_m >= profile.z1) {
      rise_done = true;
      if (diag) diag->stretched_after_rise = system.stretched_fraction(pop);
    }
  }
  if (diag) {
    if (!rise_done) diag->stretched_after_rise = system.stretched_fraction(pop);
    diag->stretched_exit = system.stretched_fraction(pop);
    diag->dark_exit = pop.dark;
    diag->metastable_exit = pop.metastable;
  }
  return pop;
}

double sigma_minus_loss(const AtomicSpecies& species, const Trajectory& traj,
                        const SlowerProfile& profile, const PumpBeam& slowing,
                        double f_minus,
                        const std::optional<PumpBeam>& repumper,
                        PumpOptions opts) {
  if (f_minus < 0 || f_minus + slowing.pol.f_pi > 1)
    throw ConfigError("sigma-minus fraction out of range");

  auto run = [&](double fm) {
    PumpBeam beam = slowing;
    beam.pol.f_minus = fm;
    beam.pol.f_plus = 1 - beam.pol.f_pi - fm;
    std::vector<PumpBeam> beams{beam};
    PumpOptions o = opts;
    if (repumper) {
      beams.push_back(*repumper);
      o.divert_dark = false;  // the repumper recycles the dark manifold
    } else {
      o.divert_dark = species.I.twice > 0;
    }
    PumpSystem system(species, beams, o);
    PopulationVector end =
        propagate_along(system, traj, profile, system.uniform_start());
    return system.stretched_fraction(end);
  };

  const double with = run(f_minus);
  const double without = run(0.0);
  if (without <= 0)
    throw NumericError("baseline propagation left no stretched population");
  return 1.0 - with / without;
}

}  // namespace crmot
