#include "crmot/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "crmot/errors.hpp"
#include "crmot/kvfile.hpp"
#include "crmot/units.hpp"

namespace crmot {

const AtomicSpecies& Scenario::species(const std::string& name) const {
  return table.get(name.empty() ? default_species : name);
}

int Scenario::trap_index(const std::string& name) const {
  if (!mot) return -1;
  for (size_t i = 0; i < mot->species.size(); ++i)
    if (mot->species[i].name == name) return static_cast<int>(i);
  return -1;
}

double centroid_detuning_MHz(const AtomicSpecies& species,
                             const std::string& reference,
                             double quoted_MHz) {
  if (reference == "centroid") return quoted_MHz;
  const Level& g = species.level(species.cooling.lower);
  const Level& e = species.level(species.cooling.upper);
  const HalfInt Fg_max = g.J + species.I;
  const HalfInt Fe_max = e.J + species.I;
  if (reference == "cycling") {
    return quoted_MHz + zero_field_energy_MHz(e, species.I, Fe_max) -
           zero_field_energy_MHz(g, species.I, Fg_max);
  }
  if (reference == "dark") {
    const HalfInt Fd = Fg_max - HalfInt::from_int(1);
    const HalfInt Fe = std::min(Fd + HalfInt::from_int(1), Fe_max);
    return quoted_MHz + zero_field_energy_MHz(e, species.I, Fe) -
           zero_field_energy_MHz(g, species.I, Fd);
  }
  throw ConfigError("beam reference must be centroid, cycling, or dark, not '" +
                    reference + "'");
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string resolve_species_file(const KvSection* run,
                                 const std::string& scenario_path) {
  if (!run) return default_species_file();
  const auto value = run->get("species_file");
  if (!value) return default_species_file();
  std::filesystem::path p = *value;
  if (p.is_absolute()) return p.string();
  const std::filesystem::path beside =
      std::filesystem::path(scenario_path).parent_path() / p;
  if (std::filesystem::exists(beside)) return beside.string();
  const std::filesystem::path bundled =
      std::filesystem::path(default_species_file()).parent_path() / p;
  if (std::filesystem::exists(bundled)) return bundled.string();
  throw ConfigError("species_file '" + *value + "' not found beside '" +
                    scenario_path + "' or in the bundled data directory");
}

StructureConfig parse_structure(const KvSection& sec, const Scenario& sc) {
  sec.expect_keys({"species", "level", "B_lo_G", "B_hi_G", "step_G",
                   "nuclear_zeeman", "crossing_a", "crossing_b"});
  StructureConfig out;
  out.species = sec.get_string("species", sc.default_species);
  const AtomicSpecies& sp = sc.table.get(out.species);
  std::string level = sec.get_string("level", "excited");
  if (level == "ground") level = sp.cooling.lower;
  else if (level == "excited") level = sp.cooling.upper;
  sp.level(level);  // validates the label
  out.level_label = level;
  out.B_lo_G = sec.get_double("B_lo_G", 0);
  out.B_hi_G = sec.get_double("B_hi_G", 100);
  if (!(out.B_hi_G > out.B_lo_G))
    throw ConfigError("[structure] needs B_hi_G > B_lo_G");
  out.step_G = sec.get_double("step_G", 0);
  if (out.step_G < 0) throw ConfigError("[structure] step_G must be >= 0");
  out.nuclear_zeeman = sec.get_bool("nuclear_zeeman", false);
  const auto ca = sec.get("crossing_a"), cb = sec.get("crossing_b");
  if (ca.has_value() != cb.has_value())
    throw ConfigError("[structure] crossing_a and crossing_b go together");
  if (ca) {
    out.crossing_a = parse_state_label(*ca);
    out.crossing_b = parse_state_label(*cb);
  }
  return out;
}

SlowerScenario parse_slower(const KvSection& sec, const Scenario& sc) {
  sec.expect_keys({"species", "B_max_G", "B_min_G", "detuning_MHz",
                   "rise_length_m", "return_length_m", "total_length_m",
                   "eta", "s0", "oven_temperature_C", "gain", "v0_mps",
                   "dz_m", "v_floor_mps", "t_max_s", "record_every"});
  SlowerScenario out;
  out.species = sec.get_string("species", sc.default_species);
  sc.table.get(out.species);
  out.design.B_max_G = sec.get_double("B_max_G", out.design.B_max_G);
  out.design.B_min_G = sec.get_double("B_min_G", out.design.B_min_G);
  out.design.detuning_MHz =
      sec.get_double("detuning_MHz", out.design.detuning_MHz);
  out.design.rise_length_m =
      sec.get_double("rise_length_m", out.design.rise_length_m);
  out.design.return_length_m =
      sec.get_double("return_length_m", out.design.return_length_m);
  out.design.total_length_m =
      sec.get_double("total_length_m", out.design.total_length_m);
  out.design.eta = sec.get_double("eta", out.design.eta);
  out.beam.detuning_MHz = out.design.detuning_MHz;
  out.beam.s0 = sec.get_double("s0", out.beam.s0);
  if (out.beam.s0 <= 0) throw ConfigError("[slower] s0 must be positive");
  out.oven_temperature_K =
      units::celsius_to_K(sec.get_double("oven_temperature_C", 1500));
  if (out.oven_temperature_K <= 0)
    throw ConfigError("[slower] oven temperature must be above absolute zero");
  out.gain = sec.get_double("gain", 1.0);
  if (out.gain < 1) throw ConfigError("[slower] gain must be >= 1");
  out.v0_mps = sec.get_double("v0_mps", 0);
  if (out.v0_mps < 0) throw ConfigError("[slower] v0_mps must be >= 0");
  out.integration.dz_m = sec.get_double("dz_m", out.integration.dz_m);
  out.integration.v_floor_mps =
      sec.get_double("v_floor_mps", out.integration.v_floor_mps);
  out.integration.t_max_s = sec.get_double("t_max_s", out.integration.t_max_s);
  out.integration.record_every = static_cast<int>(
      sec.get_int("record_every", out.integration.record_every));
  if (out.integration.dz_m <= 0 || out.integration.v_floor_mps <= 0 ||
      out.integration.t_max_s <= 0 || out.integration.record_every < 1)
    throw ConfigError("[slower] integration knobs must be positive");
  return out;
}

PumpBeam parse_beam(const KvSection& sec, const AtomicSpecies& sp) {
  sec.expect_keys({"detuning_MHz", "reference", "intensity_mW_cm2", "f_plus",
                   "f_pi", "f_minus", "doppler_sign"});
  PumpBeam b;
  b.name = sec.name.substr(std::string("beam ").size());
  const std::string ref = sec.get_string("reference", "centroid");
  b.detuning_MHz =
      centroid_detuning_MHz(sp, ref, sec.require_double("detuning_MHz"));
  b.intensity_mW_cm2 = sec.require_double("intensity_mW_cm2");
  if (b.intensity_mW_cm2 < 0)
    throw ConfigError("[" + sec.name + "] intensity must be >= 0");
  b.pol.f_plus = sec.get_double("f_plus", 1);
  b.pol.f_pi = sec.get_double("f_pi", 0);
  b.pol.f_minus = sec.get_double("f_minus", 0);
  b.pol.validate();
  b.doppler_sign = sec.get_double("doppler_sign", 0);
  if (b.doppler_sign != 0 && std::abs(b.doppler_sign) != 1)
    throw ConfigError("[" + sec.name + "] doppler_sign must be -1, 0, or 1");
  return b;
}

PumpScenario parse_pump(const KvSection& sec,
                        const std::vector<const KvSection*>& beam_secs,
                        const Scenario& sc) {
  sec.expect_keys({"species", "divert_dark", "dark_F", "nuclear_zeeman",
                   "rebuild_field_step_G", "max_rate_dt",
                   "sigma_minus_fraction", "sigma_minus_repumper"});
  PumpScenario out;
  out.species = sec.get_string("species", sc.default_species);
  const AtomicSpecies& sp = sc.table.get(out.species);
  out.options.divert_dark = sec.get_bool("divert_dark", sp.I.twice > 0);
  if (const auto dark = sec.get("dark_F"))
    out.options.dark_F = parse_half_int(*dark);
  out.options.nuclear_zeeman = sec.get_bool("nuclear_zeeman", false);
  out.options.rebuild_field_step_G = sec.get_double(
      "rebuild_field_step_G", out.options.rebuild_field_step_G);
  out.options.max_rate_dt =
      sec.get_double("max_rate_dt", out.options.max_rate_dt);
  if (out.options.rebuild_field_step_G <= 0 || out.options.max_rate_dt <= 0)
    throw ConfigError("[pump] step controls must be positive");
  out.sigma_minus_fraction = sec.get_double("sigma_minus_fraction", 0);
  if (out.sigma_minus_fraction < 0 || out.sigma_minus_fraction > 1)
    throw ConfigError("[pump] sigma_minus_fraction must lie in [0,1]");
  out.sigma_minus_repumper = sec.get_string("sigma_minus_repumper", "");

  for (const KvSection* bs : beam_secs) out.beams.push_back(parse_beam(*bs, sp));
  if (out.beams.empty())
    throw ConfigError("[pump] needs at least one [beam NAME] section");
  std::set<std::string> names;
  for (const auto& b : out.beams)
    if (!names.insert(b.name).second)
      throw ConfigError("duplicate beam name '" + b.name + "'");
  if (!out.sigma_minus_repumper.empty() &&
      !names.count(out.sigma_minus_repumper))
    throw ConfigError("[pump] sigma_minus_repumper names no [beam] section: '" +
                      out.sigma_minus_repumper + "'");
  return out;
}

SpeciesTrapParams parse_trap(const KvSection& sec, InitialTrapState& init,
                             const Scenario& sc) {
  sec.expect_keys({"loading_rate_per_s", "tau_s", "d4_share", "beta_cm3_s",
                   "tau_bg_s", "w_H_um", "w_V_um", "center_dz_um", "eta_trap",
                   "tau_m_open_s", "tau_m_closed_s", "repump_pulse_tau_s",
                   "hold_number", "mot_on", "repump_d4", "repump_d3", "N0",
                   "Nm0"});
  SpeciesTrapParams p;
  p.name = sec.name.substr(std::string("trap ").size());
  sc.table.get(p.name);  // trap names are species names
  p.loading_rate_per_s = sec.get_double("loading_rate_per_s", 0);
  p.tau_s = sec.get_double("tau_s", p.tau_s);
  p.d4_share = sec.get_double("d4_share", p.d4_share);
  p.beta_cm3_s = sec.get_double("beta_cm3_s", 0);
  p.tau_bg_s = sec.get_double("tau_bg_s", p.tau_bg_s);
  p.cloud.w_H_um = sec.get_double("w_H_um", 0);
  p.cloud.w_V_um = sec.get_double("w_V_um", 0);
  p.cloud.center_dz_um = sec.get_double("center_dz_um", 0);
  p.eta_trap = sec.get_double("eta_trap", p.eta_trap);
  p.tau_m_open_s = sec.get_double("tau_m_open_s", p.tau_m_open_s);
  p.tau_m_closed_s = sec.get_double("tau_m_closed_s", p.tau_m_closed_s);
  p.repump_pulse_tau_s =
      sec.get_double("repump_pulse_tau_s", p.repump_pulse_tau_s);
  p.hold_number = sec.get_double("hold_number", 0);
  init.mot_on = sec.get_bool("mot_on", true);
  init.repump_d4 = sec.get_bool("repump_d4", false);
  init.repump_d3 = sec.get_bool("repump_d3", false);
  init.N0 = sec.get_double("N0", 0);
  init.Nm0 = sec.get_double("Nm0", 0);
  if (init.N0 < 0 || init.Nm0 < 0)
    throw ConfigError("[" + sec.name + "] initial numbers must be >= 0");
  return p;
}

EventType parse_event_verb(const std::string& verb, bool& needs_species,
                           bool& needs_duration) {
  needs_species = true;
  needs_duration = false;
  if (verb == "mot_on") return EventType::MotOn;
  if (verb == "mot_off") return EventType::MotOff;
  if (verb == "repump_d4_on") return EventType::RepumpD4On;
  if (verb == "repump_d4_off") return EventType::RepumpD4Off;
  if (verb == "repump_d3_on") return EventType::RepumpD3On;
  if (verb == "repump_d3_off") return EventType::RepumpD3Off;
  if (verb == "repump_pulse") {
    needs_duration = true;
    return EventType::RepumpPulse;
  }
  needs_species = false;
  if (verb == "oven_open") return EventType::OvenOpen;
  if (verb == "oven_close") return EventType::OvenClose;
  throw ConfigError("unknown schedule verb '" + verb + "'");
}

Schedule parse_schedule(const KvSection* sec, const Scenario& sc,
                        std::vector<InitialTrapState> initial) {
  Schedule out;
  out.initial = std::move(initial);
  if (!sec) return out;
  sec->expect_keys({"horizon_s", "oven_open", "event"});
  out.horizon_s = sec->get_double("horizon_s", out.horizon_s);
  out.oven_open = sec->get_bool("oven_open", true);
  for (const KvEntry* e : sec->all("event")) {
    const std::vector<std::string> tok = split_ws(e->value);
    const std::string where =
        sc.path + ":" + std::to_string(e->line) + ": event";
    if (tok.size() < 2) throw ConfigError(where + " needs '<t> <verb> ...'");
    ScheduleEvent ev;
    ev.t_s = parse_double(tok[0], where + " time");
    bool needs_species = false, needs_duration = false;
    ev.type = parse_event_verb(tok[1], needs_species, needs_duration);
    size_t next = 2;
    if (needs_species) {
      if (next < tok.size() && sc.trap_index(tok[next]) >= 0) {
        ev.species = sc.trap_index(tok[next]);
        ++next;
      } else if (sc.mot && sc.mot->species.size() == 1) {
        ev.species = 0;
      } else {
        throw ConfigError(where + " '" + tok[1] +
                          "' needs a species name when several are trapped");
      }
    }
    if (needs_duration) {
      if (next >= tok.size())
        throw ConfigError(where + " repump_pulse needs a duration");
      ev.duration_s = parse_double(tok[next], where + " duration");
      ++next;
    }
    if (next != tok.size())
      throw ConfigError(where + " has trailing tokens after '" +
                        tok[next] + "'");
    out.events.push_back(ev);
  }
  return out;
}

FluorescenceModel parse_fluorescence(const KvSection& sec,
                                     const AtomicSpecies& sp) {
  sec.expect_keys({"s_bar", "detuning_MHz", "solid_angle_fraction",
                   "efficiency", "cg_avg"});
  FluorescenceModel m;
  m.gamma_rad = sp.cooling.gamma_rad();
  m.linewidth_MHz = sp.cooling.linewidth_MHz;
  m.s_bar = sec.require_double("s_bar");
  m.detuning_MHz = sec.require_double("detuning_MHz");
  m.solid_angle_fraction =
      sec.get_double("solid_angle_fraction", m.solid_angle_fraction);
  m.efficiency = sec.get_double("efficiency", m.efficiency);
  m.cg_avg = sec.get_double("cg_avg", m.cg_avg);
  if (m.s_bar <= 0 || m.solid_angle_fraction <= 0 || m.efficiency <= 0 ||
      m.cg_avg <= 0)
    throw ConfigError("[" + sec.name + "] parameters must be positive");
  return m;
}

FitScenario parse_fit(const KvSection& sec, const Scenario& sc) {
  sec.expect_keys({"model", "data", "t_column", "y_column", "species",
                   "samples", "t_start_s", "t_end_s", "noise_rel",
                   "gamma_per_s", "tau_s", "N0", "beta_cm3_s", "V1_cm3",
                   "t1_s", "t2_s", "nbar_per_cm3", "beta_BF_cm3_s",
                   "sigma0_um", "temperature_uK"});
  FitScenario f;
  f.model = sec.require("model");
  if (f.model != "loading" && f.model != "two_body" &&
      f.model != "interspecies" && f.model != "tof")
    throw ConfigError(
        "[fit] model must be loading, two_body, interspecies, or tof");
  f.data_path = sec.get_string("data", "");
  if (!f.data_path.empty()) {
    std::filesystem::path p = f.data_path;
    if (!p.is_absolute())
      f.data_path =
          (std::filesystem::path(sc.path).parent_path() / p).string();
  }
  f.t_column = sec.get_string("t_column", f.t_column);
  f.y_column =
      sec.get_string("y_column", f.model == "tof" ? "sigma_um" : "N");
  f.species = sec.get_string("species", sc.default_species);
  sc.table.get(f.species);
  f.samples = static_cast<int>(sec.get_int("samples", f.samples));
  f.t_start_s = sec.get_double("t_start_s", f.t_start_s);
  f.t_end_s = sec.get_double("t_end_s", f.t_end_s);
  f.noise_rel = sec.get_double("noise_rel", 0);
  if (f.data_path.empty()) {
    if (f.samples < 5) throw ConfigError("[fit] needs samples >= 5");
    if (!(f.t_end_s > f.t_start_s) || f.t_start_s < 0)
      throw ConfigError("[fit] needs 0 <= t_start_s < t_end_s");
    if (f.noise_rel < 0) throw ConfigError("[fit] noise_rel must be >= 0");
  }

  const int ti = sc.trap_index(f.species);
  const SpeciesTrapParams* trap = ti >= 0 ? &sc.mot->species[ti] : nullptr;
  f.gamma_per_s =
      sec.get_double("gamma_per_s", trap ? trap->loading_rate_per_s : 0);
  f.tau_s = sec.get_double("tau_s", trap ? trap->tau_s : 0);
  f.N0 = sec.get_double("N0", 0);
  f.beta_cm3_s = sec.get_double("beta_cm3_s", trap ? trap->beta_cm3_s : 0);
  f.V1_cm3 = sec.get_double(
      "V1_cm3", trap && trap->cloud.w_H_um > 0 ? trap->cloud.volume_cm3() : 0);
  f.t1_s = sec.get_double("t1_s", 0);
  f.t2_s = sec.get_double("t2_s", 0);
  f.nbar_per_cm3 = sec.get_double("nbar_per_cm3", 0);
  f.beta_BF_cm3_s =
      sec.get_double("beta_BF_cm3_s", sc.mot ? sc.mot->beta_BF_cm3_s : 0);
  f.sigma0_um = sec.get_double("sigma0_um", 0);
  f.temperature_uK = sec.get_double("temperature_uK", 0);
  return f;
}

SweepScenario parse_sweep(const KvSection& sec, const Scenario& sc) {
  sec.expect_keys({"target", "variable", "lo", "hi", "steps", "species"});
  SweepScenario w;
  w.target = sec.require("target");
  if (w.target != "slower_capture" && w.target != "mot_steady")
    throw ConfigError("[sweep] target must be slower_capture or mot_steady");
  w.variable = sec.require("variable");
  w.lo = sec.require_double("lo");
  w.hi = sec.require_double("hi");
  w.steps = static_cast<int>(sec.get_int("steps", 11));
  if (w.steps < 1) throw ConfigError("[sweep] steps must be >= 1");
  if (w.steps > 1 && !(w.hi > w.lo))
    throw ConfigError("[sweep] needs hi > lo when steps > 1");
  if (w.target == "slower_capture") {
    if (!sc.slower)
      throw ConfigError("[sweep] slower_capture needs a [slower] section");
    static const std::set<std::string> ok = {
        "slower.B_max_G", "slower.B_min_G", "slower.detuning_MHz",
        "slower.eta", "slower.s0", "slower.rise_length_m",
        "slower.total_length_m"};
    if (!ok.count(w.variable))
      throw ConfigError("[sweep] unknown slower variable '" + w.variable + "'");
  } else {
    if (!sc.mot || sc.mot->species.empty())
      throw ConfigError("[sweep] mot_steady needs a [trap NAME] section");
    w.species = sec.get_string("species", sc.mot->species.front().name);
    if (sc.trap_index(w.species) < 0)
      throw ConfigError("[sweep] species '" + w.species + "' has no trap");
    const std::string prefix = "trap " + w.species + ".";
    static const std::set<std::string> ok = {"loading_rate_per_s", "tau_s",
                                             "tau_bg_s", "beta_cm3_s"};
    if (w.variable.rfind(prefix, 0) != 0 ||
        !ok.count(w.variable.substr(prefix.size())))
      throw ConfigError("[sweep] variable must look like '" + prefix +
                        "tau_s' for target mot_steady");
  }
  return w;
}

}  // namespace

Scenario parse_scenario(const std::string& file_path) {
  const KvFile kv = KvFile::parse_file(file_path);
  if (kv.sections.empty())
    throw ConfigError(file_path +
                      ": empty scenario; needs [run] plus at least one of "
                      "[structure], [slower], [pump], [trap NAME], [fit], "
                      "[sweep]");

  Scenario sc;
  sc.path = file_path;

  for (const KvSection& s : kv.sections) {
    const bool known =
        s.name == "run" || s.name == "structure" || s.name == "slower" ||
        s.name == "pump" || s.name == "mot" || s.name == "schedule" ||
        s.name == "fit" || s.name == "sweep" ||
        s.name.rfind("beam ", 0) == 0 || s.name.rfind("trap ", 0) == 0 ||
        s.name.rfind("fluorescence ", 0) == 0;
    if (!known)
      throw ConfigError(file_path + ":" + std::to_string(s.line) +
                        ": unknown section [" + s.name + "]");
  }

  const KvSection* run = kv.find("run");
  if (!run)
    throw ConfigError(file_path + ": missing [run] section");
  run->expect_keys({"species_file", "species", "seed"});
  sc.table = load_species_table(resolve_species_file(run, file_path));
  sc.default_species = run->get_string("species", sc.table.species.empty()
                                                      ? ""
                                                      : sc.table.species[0].name);
  sc.table.get(sc.default_species);
  const long long seed = run->get_int("seed", 1);
  if (seed < 0) throw ConfigError("[run] seed must be >= 0");
  sc.seed = static_cast<std::uint64_t>(seed);

  // Traps before schedule/fit/sweep: they reference trap names and defaults.
  const auto trap_secs = kv.with_prefix("trap");
  if (!trap_secs.empty()) {
    MotModel mot;
    std::vector<InitialTrapState> initial;
    for (const KvSection* ts : trap_secs) {
      InitialTrapState init;
      mot.species.push_back(parse_trap(*ts, init, sc));
      initial.push_back(init);
    }
    if (mot.species.size() > 2)
      throw ConfigError("at most two [trap NAME] sections are supported");
    for (size_t i = 1; i < mot.species.size(); ++i)
      if (mot.species[i].name == mot.species[0].name)
        throw ConfigError("duplicate [trap " + mot.species[0].name + "]");
    if (const KvSection* m = kv.find("mot")) {
      m->expect_keys({"beta_BF_cm3_s", "gradient_G_cm", "dt_s",
                      "record_dt_s"});
      mot.beta_BF_cm3_s = m->get_double("beta_BF_cm3_s", 0);
      sc.gradient_G_cm = m->get_double("gradient_G_cm", sc.gradient_G_cm);
      if (sc.gradient_G_cm <= 0)
        throw ConfigError("[mot] gradient_G_cm must be positive");
      sc.mot_integration.dt_s =
          m->get_double("dt_s", sc.mot_integration.dt_s);
      sc.mot_integration.record_dt_s =
          m->get_double("record_dt_s", sc.mot_integration.record_dt_s);
      if (sc.mot_integration.dt_s <= 0 || sc.mot_integration.record_dt_s <= 0)
        throw ConfigError("[mot] step sizes must be positive");
    }
    mot.validate();
    sc.mot = std::move(mot);
    sc.schedule = parse_schedule(kv.find("schedule"), sc, std::move(initial));
    sc.schedule->validate(static_cast<int>(sc.mot->species.size()));

    sc.fluorescence.resize(sc.mot->species.size());
    for (const KvSection* fs : kv.with_prefix("fluorescence")) {
      const std::string name =
          fs->name.substr(std::string("fluorescence ").size());
      const int idx = sc.trap_index(name);
      if (idx < 0)
        throw ConfigError("[" + fs->name + "] names no [trap " + name + "]");
      sc.fluorescence[idx] =
          parse_fluorescence(*fs, sc.table.get(name));
    }
  } else {
    for (const char* orphan : {"mot", "schedule"})
      if (kv.find(orphan))
        throw ConfigError("[" + std::string(orphan) +
                          "] needs at least one [trap NAME] section");
    if (!kv.with_prefix("fluorescence").empty())
      throw ConfigError("[fluorescence NAME] needs a matching [trap NAME]");
  }

  if (const KvSection* s = kv.find("structure"))
    sc.structure = parse_structure(*s, sc);
  if (const KvSection* s = kv.find("slower")) sc.slower = parse_slower(*s, sc);

  const auto beam_secs = kv.with_prefix("beam");
  if (const KvSection* s = kv.find("pump")) {
    sc.pump = parse_pump(*s, beam_secs, sc);
  } else if (!beam_secs.empty()) {
    throw ConfigError("[" + beam_secs.front()->name +
                      "] needs a [pump] section");
  }

  if (const KvSection* s = kv.find("fit")) sc.fit = parse_fit(*s, sc);
  if (const KvSection* s = kv.find("sweep")) sc.sweep = parse_sweep(*s, sc);

  if (!sc.structure && !sc.slower && !sc.pump && !sc.mot && !sc.fit &&
      !sc.sweep)
    throw ConfigError(file_path +
                      ": scenario has only a [run] section; needs at least "
                      "one of [structure], [slower], [pump], [trap NAME], "
                      "[fit], [sweep]");
  return sc;
}

}  // namespace crmot
