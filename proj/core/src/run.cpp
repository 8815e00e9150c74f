#include "crmot/run.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include "crmot/csv.hpp"
#include "crmot/errors.hpp"
#include "crmot/estimation.hpp"
#include "crmot/rng.hpp"
#include "crmot/scenario.hpp"

namespace crmot {

namespace {

std::string fmt(double v) { return CsvWriter::format(v); }

void cmd_structure(const Scenario& sc, std::uint64_t seed, std::ostream& os,
                   bool summary, std::ostream& log) {
  if (!sc.structure)
    throw ConfigError("structure run needs a [structure] section");
  const StructureConfig& c = *sc.structure;
  const AtomicSpecies& sp = sc.table.get(c.species);
  FieldOptions fo;
  fo.nuclear_zeeman = c.nuclear_zeeman;

  std::vector<double> grid;
  if (c.step_G > 0) {
    for (double b = c.B_lo_G; b <= c.B_hi_G + 1e-9 * c.step_G; b += c.step_G)
      grid.push_back(b);
  } else {
    grid = default_field_grid(c.B_lo_G, c.B_hi_G);
  }

  CsvWriter w(os);
  w.comment("seed=" + std::to_string(seed));
  if (c.crossing_a) {
    const auto cross = find_crossing(sp, c.level_label, *c.crossing_a,
                                     *c.crossing_b, c.B_lo_G, c.B_hi_G, fo);
    std::ostringstream line;
    line << "crossing " << c.crossing_a->compact() << " x "
         << c.crossing_b->compact();
    if (cross)
      line << " B_G=" << fmt(cross->B_G) << " gap_MHz=" << fmt(cross->gap_MHz)
           << " true_crossing=" << (cross->true_crossing ? 1 : 0);
    else
      line << " none in [" << fmt(c.B_lo_G) << "," << fmt(c.B_hi_G) << "] G";
    w.comment(line.str());
    if (summary) log << line.str() << "\n";
  }
  w.header({"B_G", "state_label", "energy_MHz"});
  for (const EigenLevels& lv : eigenlevels(sp, c.level_label, grid, fo))
    for (const EigenState& st : lv.states)
      w.row_text({fmt(lv.B_G), st.label.compact(), fmt(st.energy_MHz)});
}

void cmd_slower(const Scenario& sc, std::uint64_t seed, std::ostream& os,
                bool summary, std::ostream& log) {
  if (!sc.slower) throw ConfigError("slower run needs a [slower] section");
  const SlowerScenario& s = *sc.slower;
  const AtomicSpecies& sp = sc.table.get(s.species);
  const SlowerProfile profile = make_slower_profile(sp, s.design);
  const double v0 =
      s.v0_mps > 0 ? s.v0_mps : profile.design_capture_velocity();
  const Trajectory traj =
      integrate_trajectory(v0, profile, s.beam, s.integration);

  CsvWriter w(os);
  w.comment("seed=" + std::to_string(seed));
  w.header({"z_m", "v_mps", "t_s", "scatter_rate"});
  for (const TrajectoryPoint& p : traj.points)
    w.row({p.z_m, p.v_mps, p.t_s, p.scatter_rate_per_s});

  if (summary) {
    const double vc = capture_velocity(profile, s.beam, s.integration);
    const BeamSource src =
        make_beam_source(sp, s.oven_temperature_K, s.gain);
    log << "V_c_mps = " << fmt(vc) << "\n"
        << "design_V_c_mps = " << fmt(profile.design_capture_velocity())
        << "\n"
        << "exit_v_mps = " << fmt(traj.exit_velocity_mps) << "\n"
        << "captured = " << (traj.captured ? 1 : 0) << "\n"
        << "capture_fraction = " << fmt(capture_fraction(src, vc)) << "\n";
  }
}

void cmd_pump(const Scenario& sc, std::uint64_t seed, std::ostream& os,
              bool summary, std::ostream& log) {
  if (!sc.pump) throw ConfigError("pump run needs a [pump] section");
  if (!sc.slower)
    throw ConfigError("pump run needs a [slower] section for the trajectory");
  const PumpScenario& pc = *sc.pump;
  const SlowerScenario& s = *sc.slower;
  // Trajectory and field profile are built for the pumped species.
  const AtomicSpecies& sp = sc.table.get(pc.species);
  const SlowerProfile profile = make_slower_profile(sp, s.design);
  const double v0 =
      s.v0_mps > 0 ? s.v0_mps : profile.design_capture_velocity();
  const Trajectory traj =
      integrate_trajectory(v0, profile, s.beam, s.integration);

  PumpSystem system(sp, pc.beams, pc.options);
  PumpDiagnostics diag;
  propagate_along(system, traj, profile, system.uniform_start(), &diag);

  CsvWriter w(os);
  w.comment("seed=" + std::to_string(seed));
  w.header({"z_m", "B_G", "stretched", "dark", "metastable"});
  for (const PumpRecord& r : diag.records)
    w.row({r.z_m, r.B_G, r.stretched, r.dark, r.metastable});

  if (summary) {
    log << "stretched_entry = " << fmt(diag.stretched_entry) << "\n"
        << "stretched_after_rise = " << fmt(diag.stretched_after_rise) << "\n"
        << "stretched_exit = " << fmt(diag.stretched_exit) << "\n"
        << "dark_exit = " << fmt(diag.dark_exit) << "\n"
        << "metastable_exit = " << fmt(diag.metastable_exit) << "\n";
    if (pc.sigma_minus_fraction > 0) {
      std::optional<PumpBeam> repumper;
      const PumpBeam* slowing = nullptr;
      for (const PumpBeam& b : pc.beams) {
        if (b.name == pc.sigma_minus_repumper) repumper = b;
        else if (!slowing) slowing = &b;
      }
      if (!slowing)
        throw ConfigError("sigma_minus loss needs a non-repumper beam");
      log << "sigma_minus_loss = "
          << fmt(sigma_minus_loss(sp, traj, profile, *slowing,
                                  pc.sigma_minus_fraction, repumper,
                                  pc.options))
          << "\n";
    }
  }
}

void cmd_mot(const Scenario& sc, std::uint64_t seed, std::ostream& os,
             bool summary, std::ostream& log) {
  if (!sc.mot || !sc.schedule)
    throw ConfigError("mot run needs at least one [trap NAME] section");
  const MotModel& model = *sc.mot;
  const LoadingCurve curve =
      integrate_schedule(model, *sc.schedule, sc.mot_integration);

  const size_t n = model.species.size();
  std::vector<std::string> cols = {"t_s"};
  for (const auto& p : model.species) cols.push_back("N_" + p.name);
  for (const auto& p : model.species) cols.push_back("Nm_" + p.name);
  std::vector<size_t> lit;
  for (size_t i = 0; i < n; ++i)
    if (sc.fluorescence[i].gamma_rad > 0) {
      cols.push_back("signal_" + model.species[i].name);
      lit.push_back(i);
    }

  CsvWriter w(os);
  w.comment("seed=" + std::to_string(seed));
  w.header(cols);
  std::vector<double> row(cols.size());
  for (size_t k = 0; k < curve.t_s.size(); ++k) {
    size_t j = 0;
    row[j++] = curve.t_s[k];
    for (size_t i = 0; i < n; ++i) row[j++] = curve.N[i][k];
    for (size_t i = 0; i < n; ++i) row[j++] = curve.Nm[i][k];
    for (size_t i : lit)
      row[j++] = fluorescence_signal(curve.N[i][k], sc.fluorescence[i]);
    w.row(row);
  }

  if (summary) {
    for (size_t i = 0; i < n; ++i) {
      const auto& p = model.species[i];
      const auto& init = sc.schedule->initial[i];
      log << "N_" << p.name << "_final = " << fmt(curve.N[i].back()) << "\n"
          << "Nm_" << p.name << "_final = " << fmt(curve.Nm[i].back()) << "\n"
          << "N_" << p.name << "_steady = "
          << fmt(steady_state_number(p, init.repump_d4, init.repump_d3,
                                     sc.schedule->oven_open))
          << "\n";
    }
  }
}

std::vector<double> fit_time_grid(const FitScenario& f) {
  std::vector<double> t(f.samples);
  for (int i = 0; i < f.samples; ++i)
    t[i] = f.t_start_s +
           (f.t_end_s - f.t_start_s) * i / static_cast<double>(f.samples - 1);
  return t;
}

void synthesize_fit_data(const FitScenario& f, const AtomicSpecies& sp,
                         std::vector<double>& t, std::vector<double>& y) {
  t = fit_time_grid(f);
  y.resize(t.size());
  if (f.model == "loading") {
    if (f.gamma_per_s <= 0 || f.tau_s <= 0)
      throw ConfigError("loading synthesis needs gamma_per_s and tau_s");
    for (size_t i = 0; i < t.size(); ++i)
      y[i] = loading_N(t[i], f.gamma_per_s, f.tau_s);
  } else if (f.model == "two_body") {
    if (f.N0 <= 0 || f.tau_s <= 0 || f.V1_cm3 <= 0 || f.beta_cm3_s < 0)
      throw ConfigError("two_body synthesis needs N0, tau_s, V1_cm3");
    const double bp = f.beta_cm3_s / (2.8284271247461903 * f.V1_cm3);
    for (size_t i = 0; i < t.size(); ++i)
      y[i] = two_body_decay_N(t[i], f.N0, f.tau_s, bp);
  } else if (f.model == "interspecies") {
    if (f.gamma_per_s <= 0 || f.tau_s <= 0 || f.nbar_per_cm3 <= 0 ||
        !(f.t1_s < f.t2_s) || f.t1_s < f.t_start_s || f.t2_s > f.t_end_s)
      throw ConfigError(
          "interspecies synthesis needs gamma_per_s, tau_s, nbar_per_cm3, "
          "and t_start_s <= t1_s < t2_s <= t_end_s");
    for (size_t i = 0; i < t.size(); ++i)
      y[i] = interspecies_N(t[i], f.t1_s, f.t2_s, f.gamma_per_s, f.tau_s,
                            f.beta_BF_cm3_s * f.nbar_per_cm3);
  } else {  // tof
    if (f.temperature_uK <= 0 || f.sigma0_um < 0)
      throw ConfigError("tof synthesis needs temperature_uK and sigma0_um");
    for (size_t i = 0; i < t.size(); ++i)
      y[i] = tof_width_um(f.sigma0_um, f.temperature_uK, sp.mass_kg(), t[i]);
  }
}

void cmd_fit(const Scenario& sc, std::uint64_t seed, std::ostream& os,
             bool summary, std::ostream& log) {
  if (!sc.fit) throw ConfigError("fit run needs a [fit] section or --model");
  const FitScenario& f = *sc.fit;
  const AtomicSpecies& sp = sc.table.get(f.species);

  std::vector<double> t, y;
  if (!f.data_path.empty()) {
    const CsvTable table = read_numeric_csv_file(f.data_path);
    t = table.column(f.t_column);
    y = table.column(f.y_column);
  } else {
    synthesize_fit_data(f, sp, t, y);
    if (f.noise_rel > 0) {
      GaussianRng rng(seed);
      apply_multiplicative_noise(y, f.noise_rel, rng);
    }
  }

  FitResult r;
  if (f.model == "loading") {
    r = fit_linear_loading(t, y);
  } else if (f.model == "two_body") {
    if (f.V1_cm3 <= 0)
      throw ConfigError("two_body fit needs V1_cm3 (or a trap cloud)");
    r = fit_two_body_decay(t, y, f.V1_cm3);
  } else if (f.model == "interspecies") {
    if (f.gamma_per_s <= 0 || f.tau_s <= 0 || f.nbar_per_cm3 <= 0 ||
        !(f.t1_s < f.t2_s))
      throw ConfigError(
          "interspecies fit needs gamma_per_s, tau_s, nbar_per_cm3, t1_s, "
          "t2_s");
    r = fit_interspecies(t, y, f.t1_s, f.t2_s, f.nbar_per_cm3, f.gamma_per_s,
                         f.tau_s);
  } else {
    r = fit_tof_temperature(t, y, sp.mass_kg());
  }

  os << "{\n"
     << "  \"model\": \"" << f.model << "\",\n"
     << "  \"seed\": " << seed << ",\n"
     << "  \"n_points\": " << t.size() << ",\n"
     << "  \"converged\": " << (r.converged ? "true" : "false") << ",\n"
     << "  \"iterations\": " << r.iterations << ",\n"
     << "  \"rss\": " << fmt(r.rss) << ",\n"
     << "  \"parameters\": [\n";
  for (size_t i = 0; i < r.names.size(); ++i)
    os << "    {\"name\": \"" << r.names[i] << "\", \"estimate\": "
       << fmt(r.estimate[i]) << ", \"half_width\": " << fmt(r.half_width[i])
       << "}" << (i + 1 < r.names.size() ? "," : "") << "\n";
  os << "  ]\n}\n";

  if (summary)
    for (size_t i = 0; i < r.names.size(); ++i)
      log << r.names[i] << " = " << fmt(r.estimate[i]) << " +- "
          << fmt(r.half_width[i]) << "\n";
}

void apply_slower_variable(SlowerScenario& s, const std::string& var,
                           double v) {
  if (var == "slower.B_max_G") s.design.B_max_G = v;
  else if (var == "slower.B_min_G") s.design.B_min_G = v;
  else if (var == "slower.detuning_MHz") {
    s.design.detuning_MHz = v;
    s.beam.detuning_MHz = v;
  } else if (var == "slower.eta") s.design.eta = v;
  else if (var == "slower.s0") s.beam.s0 = v;
  else if (var == "slower.rise_length_m") s.design.rise_length_m = v;
  else if (var == "slower.total_length_m") s.design.total_length_m = v;
  else throw ConfigError("unknown sweep variable '" + var + "'");
}

void cmd_sweep(const Scenario& sc, std::uint64_t seed, std::ostream& os,
               bool summary, std::ostream& log) {
  if (!sc.sweep) throw ConfigError("sweep run needs a [sweep] section");
  const SweepScenario& w = *sc.sweep;
  std::vector<double> values(w.steps);
  for (int i = 0; i < w.steps; ++i)
    values[i] = w.steps == 1
                    ? w.lo
                    : w.lo + (w.hi - w.lo) * i / double(w.steps - 1);

  CsvWriter out(os);
  out.comment("seed=" + std::to_string(seed));
  out.comment("variable=" + w.variable);

  if (w.target == "slower_capture") {
    const AtomicSpecies& sp = sc.table.get(sc.slower->species);
    auto point = [&](double v) {
      SlowerScenario s = *sc.slower;
      apply_slower_variable(s, w.variable, v);
      const SlowerProfile profile = make_slower_profile(sp, s.design);
      const double vc = capture_velocity(profile, s.beam, s.integration);
      const Trajectory traj =
          integrate_trajectory(vc, profile, s.beam, s.integration);
      const BeamSource src =
          make_beam_source(sp, s.oven_temperature_K, s.gain);
      return std::vector<double>{v, vc, traj.exit_velocity_mps,
                                 capture_fraction(src, vc)};
    };
    // Grid points are independent; rows land in grid order regardless of
    // which finishes first.
    std::vector<std::future<std::vector<double>>> jobs;
    jobs.reserve(values.size());
    for (double v : values)
      jobs.push_back(std::async(std::launch::async, point, v));
    out.header({"value", "V_c_mps", "exit_v_mps", "capture_fraction"});
    for (auto& j : jobs) out.row(j.get());
  } else {
    const int idx = sc.trap_index(w.species);
    const SpeciesTrapParams& base = sc.mot->species[idx];
    const InitialTrapState& init = sc.schedule->initial[idx];
    const std::string key = w.variable.substr(w.variable.rfind('.') + 1);
    out.header({"value", "N_steady"});
    for (double v : values) {
      SpeciesTrapParams p = base;
      if (key == "loading_rate_per_s") p.loading_rate_per_s = v;
      else if (key == "tau_s") p.tau_s = v;
      else if (key == "tau_bg_s") p.tau_bg_s = v;
      else p.beta_cm3_s = v;
      out.row({v, steady_state_number(p, init.repump_d4, init.repump_d3,
                                      sc.schedule->oven_open)});
    }
  }
  if (summary)
    log << "sweep rows = " << values.size() << "\n";
}

Scenario scenario_for(const RunRequest& req) {
  if (!req.scenario_path.empty()) {
    Scenario sc = parse_scenario(req.scenario_path);
    if (!req.fit_model.empty() || !req.fit_data.empty()) {
      if (!sc.fit) sc.fit.emplace();
      if (!req.fit_model.empty()) sc.fit->model = req.fit_model;
      if (!req.fit_data.empty()) sc.fit->data_path = req.fit_data;
      if (sc.fit->y_column.empty())
        sc.fit->y_column = sc.fit->model == "tof" ? "sigma_um" : "N";
      if (sc.fit->species.empty()) sc.fit->species = sc.default_species;
    }
    return sc;
  }
  if (req.subcommand != "fit")
    throw ConfigError(req.subcommand + " needs --scenario");
  if (req.fit_model.empty() || req.fit_data.empty())
    throw ConfigError("fit without --scenario needs both --model and --data");
  Scenario sc;
  sc.path = "<cli>";
  sc.table = load_species_table(default_species_file());
  sc.default_species = sc.table.species.front().name;
  FitScenario f;
  f.model = req.fit_model;
  f.data_path = req.fit_data;
  f.species = sc.default_species;
  f.y_column = f.model == "tof" ? "sigma_um" : "N";
  sc.fit = f;
  return sc;
}

}  // namespace

void run_subcommand(const RunRequest& req, std::ostream& fallback_out,
                    std::ostream& log) {
  const Scenario sc = scenario_for(req);
  if (sc.fit && (sc.fit->model != "loading" && sc.fit->model != "two_body" &&
                 sc.fit->model != "interspecies" && sc.fit->model != "tof"))
    throw ConfigError("fit model must be loading, two_body, interspecies, "
                      "or tof, not '" + sc.fit->model + "'");
  const std::uint64_t seed = req.seed.value_or(sc.seed);

  std::ofstream file;
  std::ostream* os = &fallback_out;
  if (!req.out_path.empty()) {
    file.open(req.out_path);
    if (!file) throw ConfigError("cannot write to '" + req.out_path + "'");
    os = &file;
  }

  if (req.subcommand == "structure")
    cmd_structure(sc, seed, *os, req.summary, log);
  else if (req.subcommand == "slower")
    cmd_slower(sc, seed, *os, req.summary, log);
  else if (req.subcommand == "pump")
    cmd_pump(sc, seed, *os, req.summary, log);
  else if (req.subcommand == "mot")
    cmd_mot(sc, seed, *os, req.summary, log);
  else if (req.subcommand == "fit")
    cmd_fit(sc, seed, *os, req.summary, log);
  else if (req.subcommand == "sweep")
    cmd_sweep(sc, seed, *os, req.summary, log);
  else
    throw ConfigError("unknown subcommand '" + req.subcommand + "'");

  if (os == &file && !file.good())
    throw ConfigError("write to '" + req.out_path + "' failed");
}

}  // namespace crmot
