#include <doctest.h>

#include <cmath>
#include <vector>

#include "crmot/errors.hpp"
#include "crmot/estimation.hpp"
#include "crmot/rng.hpp"
#include "crmot/species.hpp"
#include "crmot/trap.hpp"
#include "crmot/units.hpp"

using namespace crmot;

namespace {

constexpr double kSqrt8 = 2.8284271247461903;

SpeciesTrapParams boson_params() {
  SpeciesTrapParams p;
  p.name = "52Cr";
  p.loading_rate_per_s = 1.6e8;
  p.tau_s = 0.045;
  p.beta_cm3_s = 6.25e-10;
  p.cloud = {208.0, 208.0, 0.0};
  return p;
}

}  // namespace

TEST_CASE("gaussian cloud volume matches the analytic integral") {
  CloudShape c{208.0, 208.0, 0.0};
  const double w_cm = 208e-4;
  CHECK(c.volume_cm3() == doctest::Approx(std::pow(units::pi, 1.5) * w_cm *
                                          w_cm * w_cm).epsilon(1e-12));
  CloudShape bad{0.0, 10.0, 0.0};
  CHECK_THROWS_AS(bad.volume_cm3(), ConfigError);
}

TEST_CASE("overlap volume has the closed-form limits") {
  CloudShape a{110.0, 110.0, 0.0};
  // identical concentric clouds: Vbar = 2^(3/2) V1
  CHECK(overlap_volume_cm3(a, a) ==
        doctest::Approx(kSqrt8 * a.volume_cm3()).epsilon(1e-12));

  // vertical offset d rescales by exp(d^2 / (wVa^2 + wVb^2))
  CloudShape b{110.0, 110.0, 60.0};
  const double d_cm = 60e-4, w_cm = 110e-4;
  CHECK(overlap_volume_cm3(a, b) ==
        doctest::Approx(kSqrt8 * a.volume_cm3() *
                        std::exp(d_cm * d_cm / (2 * w_cm * w_cm)))
            .epsilon(1e-12));

  // the pinned experiment geometry
  CloudShape mot52{110.0, 110.0, 0.0};
  CloudShape mot53{150.0, 140.0, 60.0};
  const double v = overlap_volume_cm3(mot52, mot53);
  CHECK(v == doctest::Approx(3.842e-5).epsilon(2e-3));
  CHECK(overlap_volume_cm3(mot53, mot52) == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("overlap volume agrees with monte carlo importance sampling") {
  CloudShape a{110.0, 110.0, 0.0};
  CloudShape b{150.0, 140.0, 60.0};
  // draw from the normalized density of a; then Vbar = V1b / E[fb]
  GaussianRng rng(99);
  const int n = 500000;
  double acc = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal() * 110e-4 / std::sqrt(2.0);
    const double y = rng.normal() * 110e-4 / std::sqrt(2.0);
    const double z = rng.normal() * 110e-4 / std::sqrt(2.0);
    const double dz = (z - 60e-4) / 140e-4;
    acc += std::exp(-(x * x + y * y) / (150e-4 * 150e-4) - dz * dz);
  }
  const double mc = b.volume_cm3() / (acc / n);
  CHECK(overlap_volume_cm3(a, b) == doctest::Approx(mc).epsilon(0.02));
}

TEST_CASE("single-species loading reaches the closed-form steady state") {
  MotModel m;
  m.species = {boson_params()};
  Schedule sch;
  sch.horizon_s = 0.6;
  sch.initial = {InitialTrapState{}};
  LoadingCurve c = integrate_schedule(m, sch);
  REQUIRE(!c.t_s.empty());
  REQUIRE(c.N.size() == 1);
  const double ss = steady_state_number(m.species[0], false, false, true);
  CHECK(ss == doctest::Approx(4.01e6).epsilon(0.01));
  CHECK(c.N[0].back() == doctest::Approx(ss).epsilon(1e-3));
  // monotone approach from an empty trap
  for (size_t i = 1; i < c.N[0].size(); ++i) CHECK(c.N[0][i] >= c.N[0][i - 1] - 1e-6);
}

TEST_CASE("two-body decay follows the closed form after the oven closes") {
  MotModel m;
  m.species = {boson_params()};
  Schedule sch;
  sch.horizon_s = 0.4;
  sch.oven_open = false;
  InitialTrapState init;
  init.N0 = 4e6;
  sch.initial = {init};
  LoadingCurve c = integrate_schedule(m, sch);
  const double V1 = m.species[0].cloud.volume_cm3();
  const double bp = m.species[0].beta_cm3_s / (kSqrt8 * V1);
  for (size_t i = 0; i < c.t_s.size(); ++i) {
    const double expect = two_body_decay_N(c.t_s[i], 4e6, 0.045, bp);
    CHECK(c.N[0][i] == doctest::Approx(expect).epsilon(1e-5));
  }
}

TEST_CASE("interspecies loss reproduces the three-segment closed form") {
  SpeciesTrapParams b;
  b.name = "52Cr";
  b.loading_rate_per_s = 1.2e6;
  b.tau_s = 0.025;
  b.cloud = {110.0, 110.0, 0.0};
  SpeciesTrapParams f;
  f.name = "53Cr";
  f.tau_s = 0.285;
  f.cloud = {150.0, 140.0, 60.0};
  f.hold_number = 4e4;
  MotModel m;
  m.species = {b, f};
  m.beta_BF_cm3_s = 1.8e-9;

  Schedule sch;
  sch.horizon_s = 3.0;
  InitialTrapState ion, ioff;
  ioff.mot_on = false;
  sch.initial = {ion, ioff};
  sch.events = {{1.5, EventType::MotOn, 1, 0.0}, {2.0, EventType::MotOff, 1, 0.0}};
  LoadingCurve c = integrate_schedule(m, sch);

  const double nbar = 4e4 / overlap_volume_cm3(b.cloud, f.cloud);
  const double extra = m.beta_BF_cm3_s * nbar;
  for (size_t i = 0; i < c.t_s.size(); ++i) {
    const double expect =
        interspecies_N(c.t_s[i], 1.5, 2.0, 1.2e6, 0.025, extra);
    CHECK(c.N[0][i] == doctest::Approx(expect).epsilon(2e-4));
  }
  // the held species is clamped while on, empty while off
  for (size_t i = 0; i < c.t_s.size(); ++i) {
    const double t = c.t_s[i];
    if (t > 1.5 && t < 2.0 - 1e-9)
      CHECK(c.N[1][i] == doctest::Approx(4e4).epsilon(1e-12));
    if (t < 1.5 - 1e-9 || t > 2.0 + 1e-3) CHECK(c.N[1][i] == 0.0);
  }
}

TEST_CASE("metastable reservoir bookkeeping conserves atoms") {
  SpeciesTrapParams p;
  p.name = "53Cr";
  p.loading_rate_per_s = 1e6;
  p.tau_s = 0.1;
  p.eta_trap = 1.0;  // every leaked atom lands in the reservoir
  p.tau_m_open_s = 1e12;
  p.tau_m_closed_s = 1e12;
  MotModel m;
  m.species = {p};
  Schedule sch;
  sch.horizon_s = 0.2;
  sch.initial = {InitialTrapState{}};
  LoadingCurve c = integrate_schedule(m, sch);
  const size_t last = c.t_s.size() - 1;
  CHECK(c.N[0][last] + c.Nm[0][last] ==
        doctest::Approx(1e6 * c.t_s[last]).epsilon(1e-4));
}

TEST_CASE("a repump pulse dumps the reservoir into the trap") {
  SpeciesTrapParams p;
  p.name = "53Cr";
  p.loading_rate_per_s = 0;
  p.tau_s = 0.5;
  p.tau_m_open_s = 8;
  p.tau_m_closed_s = 30;
  p.repump_pulse_tau_s = 1e-3;
  MotModel m;
  m.species = {p};
  Schedule sch;
  sch.horizon_s = 0.1;
  InitialTrapState init;
  init.Nm0 = 1e6;
  sch.initial = {init};
  sch.events = {{0.05, EventType::RepumpPulse, 0, 0.01}};
  TrapIntegrationOptions opts;
  opts.dt_s = 1e-5;
  opts.record_dt_s = 1e-4;
  LoadingCurve c = integrate_schedule(m, sch, opts);
  // before the pulse the trap stays empty and the reservoir barely decays
  size_t i_pre = 0, i_post = 0;
  for (size_t i = 0; i < c.t_s.size(); ++i) {
    if (c.t_s[i] <= 0.0499) i_pre = i;
    if (c.t_s[i] <= 0.0601) i_post = i;
  }
  CHECK(c.N[0][i_pre] == doctest::Approx(0.0));
  CHECK(c.Nm[0][i_pre] == doctest::Approx(1e6).epsilon(0.01));
  // transfer is ~complete after 10 pulse time constants
  CHECK(c.Nm[0][i_post] < 1e6 * 1e-3);
  CHECK(c.N[0][i_post] == doctest::Approx(1e6).epsilon(0.03));
}

TEST_CASE("repumpers close their leak channels") {
  SpeciesTrapParams p = boson_params();
  p.beta_cm3_s = 0;
  // d4 repumped: only the d3 share of the leak remains
  const double ss_d4 = steady_state_number(p, true, false, true);
  CHECK(ss_d4 == doctest::Approx(p.loading_rate_per_s * p.tau_s /
                                 (1 - p.d4_share)).epsilon(1e-9));
  // both repumped with no other loss channel: no steady state exists
  CHECK_THROWS_AS(steady_state_number(p, true, true, true), ConfigError);
  CHECK(steady_state_number(p, false, false, false) == doctest::Approx(0.0));
}

TEST_CASE("integration converges under time-step halving") {
  MotModel m;
  m.species = {boson_params()};
  Schedule sch;
  sch.horizon_s = 0.1;
  sch.initial = {InitialTrapState{}};
  TrapIntegrationOptions coarse, fine;
  coarse.dt_s = 2e-4;
  fine.dt_s = 1e-4;
  LoadingCurve a = integrate_schedule(m, sch, coarse);
  LoadingCurve d = integrate_schedule(m, sch, fine);
  CHECK(a.N[0].back() == doctest::Approx(d.N[0].back()).epsilon(0.005));
}

TEST_CASE("model validation rejects inconsistent parameters") {
  MotModel m;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m.species = {boson_params()};
  m.species[0].eta_trap = 1.5;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m.species[0].eta_trap = 0.5;
  m.species[0].beta_cm3_s = 1e-10;
  m.species[0].cloud.w_H_um = 0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
}

TEST_CASE("schedules must be ordered and in range") {
  Schedule sch;
  sch.horizon_s = 2.0;
  sch.initial = {InitialTrapState{}};
  sch.events = {{1.5, EventType::MotOff, 0, 0.0}, {1.0, EventType::MotOn, 0, 0.0}};
  try {
    sch.validate(1);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("1.0") != std::string::npos);
    CHECK(msg.find("1.5") != std::string::npos);
  }
  sch.events = {{2.5, EventType::MotOn, 0, 0.0}};
  CHECK_THROWS_AS(sch.validate(1), ConfigError);
  sch.events = {{1.0, EventType::RepumpPulse, 0, 0.0}};
  CHECK_THROWS_AS(sch.validate(1), ConfigError);
  sch.events = {{1.0, EventType::MotOn, 3, 0.0}};
  CHECK_THROWS_AS(sch.validate(1), ConfigError);
  sch.events.clear();
  sch.validate(1);
}

TEST_CASE("fluorescence signal inverts back to the atom number") {
  FluorescenceModel fm;
  fm.gamma_rad = 2 * units::pi * 5.02e6;
  fm.linewidth_MHz = 5.02;
  fm.s_bar = 13.6;
  fm.detuning_MHz = -10.0;
  CHECK(fm.rate_per_atom() > 0);
  const double sig = fluorescence_signal(2.5e6, fm);
  CHECK(atom_number_from_signal(sig, fm) == doctest::Approx(2.5e6).epsilon(1e-12));
  FluorescenceModel dead;
  CHECK_THROWS_AS(atom_number_from_signal(1.0, dead), ConfigError);
}

TEST_CASE("free expansion width grows like sqrt(sigma0^2 + kT t^2 / m)") {
  const double mass = 51.9405062 * units::amu;
  CHECK(tof_width_um(110.0, 100.0, mass, 0.0) == doctest::Approx(110.0));
  const double t = 0.003;
  const double grow2 = units::kB * 100e-6 / mass * t * t * 1e12;  // um^2
  CHECK(tof_width_um(110.0, 100.0, mass, t) ==
        doctest::Approx(std::sqrt(110.0 * 110.0 + grow2)).epsilon(1e-12));
}
