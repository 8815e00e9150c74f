#include <doctest.h>

#include <cmath>
#include <vector>

#include "crmot/pumping.hpp"
#include "crmot/slower.hpp"
#include "crmot/species.hpp"
#include "crmot/units.hpp"

using namespace crmot;

namespace {

const SpeciesTable& table() {
  static SpeciesTable t = load_species_table(default_species_file());
  return t;
}

PumpBeam sigma_plus(double detuning_MHz, double intensity = 42.6) {
  PumpBeam b;
  b.name = "slowing";
  b.detuning_MHz = detuning_MHz;
  b.intensity_mW_cm2 = intensity;
  b.pol = {1, 0, 0};
  b.doppler_sign = 1;
  return b;
}

}  // namespace

TEST_CASE("polarization mixes are validated") {
  PolarizationMix ok{0.5, 0.25, 0.25};
  ok.validate();
  PolarizationMix bad{0.5, 0.25, 0.3};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  PolarizationMix neg{1.2, -0.2, 0.0};
  CHECK_THROWS_AS(neg.validate(), ConfigError);
}

TEST_CASE("spin-zero stretched state reduces to the two-level formula") {
  const AtomicSpecies& b = table().get("52Cr");
  const double delta = -20.0;
  PumpSystem sys(b, {sigma_plus(delta)});
  CHECK(sys.ground_size() == 7);
  const int slot = sys.slot_of(sys.stretched_label());
  REQUIRE(slot >= 0);

  auto rt = sys.rates(0.0, 0.0);
  const double gamma = b.cooling.gamma_rad();
  const double gamma_MHz = b.cooling.linewidth_MHz;
  const double s = 42.6 / 8.52;  // stretched line strength is exactly 1
  const double d = 2 * delta / gamma_MHz;
  const double expected = 0.5 * gamma * s / (1 + s + d * d);
  CHECK(rt.excitation[slot] == doctest::Approx(expected).epsilon(1e-10));

  // doppler term shifts the detuning by k v / 2 pi
  const double v = 100.0;
  const double dopp = b.cooling.wavenumber() * v / (2 * units::pi) * 1e-6;
  const double d2 = 2 * (delta + dopp) / gamma_MHz;
  auto rt2 = sys.rates(0.0, v);
  CHECK(rt2.excitation[slot] ==
        doctest::Approx(0.5 * gamma * s / (1 + s + d2 * d2)).epsilon(1e-10));
}

TEST_CASE("rate table conserves outgoing flux") {
  const AtomicSpecies& f = table().get("53Cr");
  PumpBeam beam = sigma_plus(-147.3);
  beam.pol = {0.5, 0.3, 0.2};
  PumpOptions po;
  po.divert_dark = true;
  PumpSystem sys(f, {beam}, po);
  CHECK(sys.ground_size() == 28);
  auto rt = sys.rates(12.0, 150.0);
  for (int g = 0; g < rt.n; ++g) {
    double back = rt.to_dark[g] + rt.to_metastable[g];
    for (int g2 = 0; g2 < rt.n; ++g2) back += rt.transfer[g * rt.n + g2];
    CHECK(back == doctest::Approx(rt.excitation[g]).epsilon(1e-12));
  }
}

TEST_CASE("pump steps conserve total population") {
  const AtomicSpecies& f = table().get("53Cr");
  PumpBeam beam = sigma_plus(-147.3);
  beam.pol = {0.8, 0.1, 0.1};
  PumpOptions po;
  po.divert_dark = true;
  PumpSystem sys(f, {beam}, po);
  PopulationVector pop = sys.uniform_start();
  CHECK(pop.total() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pop.p.size() == 28);
  for (double p : pop.p) CHECK(p == doctest::Approx(1.0 / 28).epsilon(1e-12));

  double B = 0.5;
  for (int i = 0; i < 200; ++i) {
    sys.step(pop, B, 200.0, 2e-7);
    B += 0.4;
    CHECK(pop.total() == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(pop.dark > 0);
  CHECK(pop.metastable > 0);
}

TEST_CASE("a short step matches the explicit rate derivative") {
  const AtomicSpecies& f = table().get("53Cr");
  PumpSystem sys(f, {sigma_plus(-147.3)});
  PopulationVector pop = sys.uniform_start();
  auto rt = sys.rates(5.0, 180.0);
  const double h = 1e-10;  // small enough that one explicit substep is exact
  PopulationVector next = pop;
  sys.step(next, 5.0, 180.0, h);
  for (int g = 0; g < rt.n; ++g) {
    double dpdt = -rt.excitation[g] * pop.p[g];
    for (int g0 = 0; g0 < rt.n; ++g0)
      dpdt += rt.transfer[g0 * rt.n + g] * pop.p[g0];
    CHECK(next.p[g] - pop.p[g] == doctest::Approx(h * dpdt).epsilon(1e-6));
  }
}

TEST_CASE("pi light at zero field keeps the mF symmetry") {
  const AtomicSpecies& f = table().get("53Cr");
  PumpBeam beam;
  beam.name = "pi";
  beam.detuning_MHz = -10;
  beam.intensity_mW_cm2 = 10;
  beam.pol = {0, 1, 0};
  PumpSystem sys(f, {beam});
  PopulationVector pop = sys.uniform_start();
  for (int i = 0; i < 50; ++i) sys.step(pop, 0.0, 0.0, 1e-6);
  const auto& labels = sys.ground_labels();
  for (size_t i = 0; i < labels.size(); ++i) {
    const StateLabel mirror{labels[i].F, -labels[i].mF};
    const int j = sys.slot_of(mirror);
    REQUIRE(j >= 0);
    CHECK(pop.p[i] == doctest::Approx(pop.p[j]).epsilon(1e-9));
  }
}

TEST_CASE("the boson is pumped into the stretched state across the rise zone") {
  const AtomicSpecies& b = table().get("52Cr");
  SlowerProfile prof = make_slower_profile(b);
  SlowingBeam sb;
  sb.detuning_MHz = prof.detuning_MHz;
  Trajectory tr = integrate_trajectory(prof.design_capture_velocity() - 2.0,
                                       prof, sb);
  REQUIRE(tr.captured);
  PumpSystem sys(b, {sigma_plus(-450.0)});
  PumpDiagnostics diag;
  PopulationVector end =
      propagate_along(sys, tr, prof, sys.uniform_start(), &diag);
  CHECK(diag.stretched_entry == doctest::Approx(1.0 / 7).epsilon(1e-9));
  CHECK(diag.stretched_after_rise > 0.9);
  // ~2e4 scatters over the full slower leak ~1e-1 into the D states
  CHECK(diag.stretched_exit > 0.8);
  CHECK(end.total() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(diag.metastable_exit < 0.2);
  REQUIRE(!diag.records.empty());
  CHECK(diag.records.back().z_m > 0.89);
}

TEST_CASE("sigma-minus admixture loss is zero at zero admixture") {
  const AtomicSpecies& f = table().get("53Cr");
  SlowerProfile prof = make_slower_profile(f);
  SlowingBeam sb;
  sb.detuning_MHz = prof.detuning_MHz;
  Trajectory tr = integrate_trajectory(prof.design_capture_velocity() - 2.0,
                                       prof, sb);
  REQUIRE(tr.captured);
  PumpBeam slowing = sigma_plus(-147.3);
  CHECK(sigma_minus_loss(f, tr, prof, slowing, 0.0, std::nullopt) ==
        doctest::Approx(0.0));
  const double loss = sigma_minus_loss(f, tr, prof, slowing, 0.10, std::nullopt);
  CHECK(loss > 0.0);
  CHECK(loss < 1.0);
}
