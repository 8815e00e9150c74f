#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "crmot/errors.hpp"
#include "crmot/scenario.hpp"

using namespace crmot;

namespace {

std::string scenario_path(const std::string& name) {
  return std::string(CRMOT_SCENARIO_DIR) + "/" + name;
}

// Writes text to a temp scenario file and parses it.
Scenario parse_text(const std::string& text) {
  static int counter = 0;
  const std::string path =
      "/tmp/crmot_test_" + std::to_string(counter++) + ".scn";
  std::ofstream os(path);
  os << text;
  os.close();
  try {
    Scenario sc = parse_scenario(path);
    std::remove(path.c_str());
    return sc;
  } catch (...) {
    std::remove(path.c_str());
    throw;
  }
}

const std::string kRun = "[run]\nspecies = 52Cr\nseed = 9\n";
// parse() rejects scenarios with no work section, so tests that only poke at
// [run] level state append a minimal one.
const std::string kRunOnly =
    kRun + "[structure]\nspecies = 53Cr\nlevel = ground\n";

}  // namespace

TEST_CASE("every shipped scenario parses") {
  for (const char* name :
       {"slower.scn", "structure_53.scn", "pump_52.scn", "pump_53.scn",
        "pump_53_repump.scn", "boson_mot.scn", "fermion_mot.scn",
        "dual_overlap.scn", "dual_small.scn", "two_body_decay.scn",
        "tof.scn", "sweep_slower.scn", "sweep_mot.scn"}) {
    CAPTURE(name);
    CHECK_NOTHROW(parse_scenario(scenario_path(name)));
  }
}

TEST_CASE("shipped scenarios carry the intended content") {
  Scenario slow = parse_scenario(scenario_path("slower.scn"));
  REQUIRE(slow.slower.has_value());
  CHECK(slow.slower->design.detuning_MHz == doctest::Approx(-450.0));
  CHECK(slow.slower->design.B_max_G == doctest::Approx(460.0));
  CHECK(slow.slower->oven_temperature_K == doctest::Approx(1773.15));
  CHECK(slow.default_species == "52Cr");

  Scenario st = parse_scenario(scenario_path("structure_53.scn"));
  REQUIRE(st.structure.has_value());
  CHECK(st.structure->species == "53Cr");
  CHECK(st.structure->level_label == "7P4");
  REQUIRE(st.structure->crossing_a.has_value());
  CHECK(st.structure->crossing_a->F.twice == 11);
  CHECK(st.structure->crossing_b->mF.twice == 7);

  Scenario dual = parse_scenario(scenario_path("dual_overlap.scn"));
  REQUIRE(dual.mot.has_value());
  REQUIRE(dual.mot->species.size() == 2);
  CHECK(dual.mot->beta_BF_cm3_s == doctest::Approx(1.8e-9));
  CHECK(dual.trap_index("53Cr") == 1);
  CHECK(dual.trap_index("50Cr") == -1);
  REQUIRE(dual.schedule.has_value());
  REQUIRE(dual.schedule->events.size() == 2);
  CHECK(dual.schedule->events[0].type == EventType::MotOn);
  CHECK(dual.schedule->events[0].species == 1);
  REQUIRE(dual.fit.has_value());
  CHECK(dual.fit->model == "interspecies");
  CHECK(dual.fit->y_column == "N");

  Scenario ferm = parse_scenario(scenario_path("fermion_mot.scn"));
  REQUIRE(ferm.schedule.has_value());
  REQUIRE(ferm.schedule->events.size() == 1);
  CHECK(ferm.schedule->events[0].type == EventType::RepumpPulse);
  CHECK(ferm.schedule->events[0].duration_s == doctest::Approx(0.01));
  REQUIRE(ferm.fluorescence.size() == 1);
  CHECK(ferm.fluorescence[0].gamma_rad > 0);
  CHECK(ferm.fluorescence[0].cg_avg == doctest::Approx(0.4));

  Scenario pump = parse_scenario(scenario_path("pump_53_repump.scn"));
  REQUIRE(pump.pump.has_value());
  REQUIRE(pump.pump->beams.size() == 2);
  CHECK(pump.pump->options.divert_dark == false);
  CHECK(pump.pump->sigma_minus_repumper == "repump");
  CHECK(pump.pump->sigma_minus_fraction == doctest::Approx(0.10));
}

TEST_CASE("beam detunings convert to the centroid reference") {
  Scenario sc = parse_text(kRunOnly);
  const AtomicSpecies& b = sc.species("52Cr");
  const AtomicSpecies& f = sc.species("53Cr");
  // spin zero: every reference coincides
  CHECK(centroid_detuning_MHz(b, "centroid", -450.0) == doctest::Approx(-450.0));
  CHECK(centroid_detuning_MHz(b, "cycling", -450.0) == doctest::Approx(-450.0));
  // cycling: quoted against |F=9/2> -> |F'=11/2>, offset -73.5 - (-376.19775)
  CHECK(centroid_detuning_MHz(f, "cycling", -450.0) ==
        doctest::Approx(-450.0 + 302.69775).epsilon(1e-10));
  // dark repump line: |F=7/2> -> |F'=9/2>, offset -6.125 - 0
  CHECK(centroid_detuning_MHz(f, "dark", -456.0) ==
        doctest::Approx(-462.125).epsilon(1e-10));
  CHECK_THROWS_AS(centroid_detuning_MHz(f, "sideways", 0.0), ConfigError);

  // zero-detuning references give the bare transition frequencies, so their
  // difference is the repump-to-cycling splitting
  const double cyc0 = centroid_detuning_MHz(f, "cycling", 0.0);
  const double rep0 = centroid_detuning_MHz(f, "dark", 0.0);
  CHECK(rep0 - cyc0 == doctest::Approx(-308.82275).epsilon(1e-10));
  // shipped slower beams: laser offset = splitting + (-456 - -450)
  const double cyc = centroid_detuning_MHz(f, "cycling", -450.0);
  const double rep = centroid_detuning_MHz(f, "dark", -456.0);
  CHECK(rep - cyc == doctest::Approx(-314.82275).epsilon(1e-10));
}

TEST_CASE("empty and unknown input is rejected with guidance") {
  CHECK_THROWS_WITH_AS(parse_text(""), doctest::Contains("[run]"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_text(kRun + "[nonsense]\nx = 1\n"),
                       doctest::Contains("nonsense"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_text(kRun + "[slower]\ndetuning_MHz = -450\ntypo_key = 3\n"),
      doctest::Contains("typo_key"), ConfigError);
  CHECK_THROWS_AS(parse_text("[slower]\ndetuning_MHz = -450\n"), ConfigError);
}

TEST_CASE("run section controls species and seed") {
  Scenario sc = parse_text(kRunOnly);
  CHECK(sc.seed == 9);
  CHECK(sc.default_species == "52Cr");
  CHECK_THROWS_AS(parse_text("[run]\nspecies = 54Cr\n"), ConfigError);
  CHECK_THROWS_AS(sc.species("54Cr"), ConfigError);
}

TEST_CASE("orphan sections need their parents") {
  CHECK_THROWS_AS(parse_text(kRun + "[mot]\ngradient_G_cm = 18\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_text(kRun + "[schedule]\nhorizon_s = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_text(kRun +
                 "[beam slowing]\ndetuning_MHz = -450\nintensity_mW_cm2 = 40\n"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_text(kRun + "[fluorescence 52Cr]\ns_bar = 10\ndetuning_MHz = -10\n"),
      ConfigError);
}

TEST_CASE("schedule events are parsed and validated from text") {
  const std::string base = kRun +
      "[trap 52Cr]\nloading_rate_per_s = 1e6\ntau_s = 0.05\n"
      "[trap 53Cr]\nloading_rate_per_s = 1e5\ntau_s = 0.285\n";
  Scenario ok = parse_text(base +
      "[schedule]\nhorizon_s = 3\n"
      "event = 1.0 mot_off 53Cr\n"
      "event = 1.5 oven_close\n"
      "event = 2.0 repump_pulse 53Cr 0.01\n");
  REQUIRE(ok.schedule.has_value());
  REQUIRE(ok.schedule->events.size() == 3);
  CHECK(ok.schedule->events[1].type == EventType::OvenClose);
  CHECK(ok.schedule->events[2].duration_s == doctest::Approx(0.01));

  // out-of-order events name both timestamps
  try {
    parse_text(base + "[schedule]\nhorizon_s = 3\n"
                      "event = 2.0 mot_off 53Cr\nevent = 1.0 mot_on 53Cr\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("1.0") != std::string::npos);
    CHECK(msg.find("2.0") != std::string::npos);
  }

  // two traps: species-scoped verbs need the species token
  CHECK_THROWS_AS(parse_text(base + "[schedule]\nhorizon_s = 3\n"
                                    "event = 1.0 mot_off\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_text(base + "[schedule]\nhorizon_s = 3\n"
                                    "event = 1.0 mot_off 54Cr\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_text(base + "[schedule]\nhorizon_s = 3\n"
                                    "event = 1.0 dance 53Cr\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_text(base + "[schedule]\nhorizon_s = 3\n"
                                    "event = 1.0 oven_close 53Cr\n"),
                  ConfigError);

  // one trap: the species token may be dropped
  Scenario single = parse_text(
      kRun + "[trap 52Cr]\nloading_rate_per_s = 1e6\ntau_s = 0.05\n"
             "[schedule]\nhorizon_s = 1\nevent = 0.5 mot_off\n");
  CHECK(single.schedule->events[0].species == 0);
}

TEST_CASE("trap sections reject unknown species and duplicates") {
  CHECK_THROWS_AS(parse_text(kRun + "[trap 54Cr]\nloading_rate_per_s = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_text(kRun + "[trap 52Cr]\ntau_s = 1\n[trap 52Cr]\ntau_s = 2\n"),
      ConfigError);
}

TEST_CASE("structure section resolves level aliases and crossing labels") {
  Scenario g = parse_text(kRun + "[structure]\nspecies = 53Cr\nlevel = ground\n");
  CHECK(g.structure->level_label == "7S3");
  Scenario e = parse_text(kRun + "[structure]\nspecies = 53Cr\nlevel = excited\n");
  CHECK(e.structure->level_label == "7P4");
  Scenario lit = parse_text(kRun + "[structure]\nspecies = 53Cr\nlevel = 5D4\n");
  CHECK(lit.structure->level_label == "5D4");
  CHECK_THROWS_AS(
      parse_text(kRun + "[structure]\nspecies = 53Cr\nlevel = 9Z9\n"),
      ConfigError);
  // crossing labels come in pairs
  CHECK_THROWS_AS(parse_text(kRun + "[structure]\nspecies = 53Cr\n"
                                    "level = excited\ncrossing_a = 11/2:11/2\n"),
                  ConfigError);
}

TEST_CASE("pump section needs at least one beam and unique names") {
  const std::string slower = "[slower]\ndetuning_MHz = -450\n";
  CHECK_THROWS_AS(parse_text(kRun + slower + "[pump]\nspecies = 52Cr\n"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_text(kRun + slower +
                 "[pump]\nspecies = 52Cr\n"
                 "[beam a]\ndetuning_MHz = -450\nintensity_mW_cm2 = 40\n"
                 "[beam a]\ndetuning_MHz = -440\nintensity_mW_cm2 = 40\n"),
      ConfigError);
  // sigma_minus_repumper must name a declared beam
  CHECK_THROWS_AS(
      parse_text(kRun + slower +
                 "[pump]\nspecies = 52Cr\nsigma_minus_repumper = ghost\n"
                 "[beam a]\ndetuning_MHz = -450\nintensity_mW_cm2 = 40\n"),
      ConfigError);
}

TEST_CASE("fit section fills defaults from the trap") {
  Scenario sc = parse_text(
      kRun +
      "[trap 52Cr]\nloading_rate_per_s = 1.6e8\ntau_s = 0.045\n"
      "beta_cm3_s = 6.25e-10\nw_H_um = 208\nw_V_um = 208\n"
      "[mot]\ngradient_G_cm = 18\n"
      "[fit]\nmodel = two_body\nN0 = 4e6\n");
  REQUIRE(sc.fit.has_value());
  CHECK(sc.fit->tau_s == doctest::Approx(0.045));
  CHECK(sc.fit->beta_cm3_s == doctest::Approx(6.25e-10));
  CHECK(sc.fit->V1_cm3 == doctest::Approx(5.0107e-5).epsilon(1e-4));
  CHECK(sc.fit->y_column == "N");
  CHECK(sc.fit->species == "52Cr");
  CHECK_THROWS_AS(parse_text(kRun + "[fit]\nmodel = astrology\n"), ConfigError);
}

TEST_CASE("sweep section validates target and variable") {
  Scenario sw = parse_text(kRun +
      "[slower]\ndetuning_MHz = -450\n"
      "[sweep]\ntarget = slower_capture\nvariable = slower.B_max_G\n"
      "lo = 300\nhi = 500\nsteps = 5\n");
  REQUIRE(sw.sweep.has_value());
  CHECK(sw.sweep->steps == 5);
  CHECK_THROWS_AS(parse_text(kRun +
      "[sweep]\ntarget = slower_capture\nvariable = slower.B_max_G\n"
      "lo = 1\nhi = 2\n"), ConfigError);  // no [slower]
  CHECK_THROWS_AS(parse_text(kRun + "[slower]\ndetuning_MHz = -450\n"
      "[sweep]\ntarget = slower_capture\nvariable = slower.nope\n"
      "lo = 1\nhi = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_text(kRun + "[slower]\ndetuning_MHz = -450\n"
      "[sweep]\ntarget = slower_capture\nvariable = slower.B_max_G\n"
      "lo = 2\nhi = 1\nsteps = 3\n"), ConfigError);
}
