#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "crmot/errors.hpp"
#include "crmot/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"chromium slower / MOT model runner: CSV out, scenario in"};
  app.require_subcommand(1);

  crmot::RunRequest req;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", req.scenario_path, "scenario file");
    cmd->add_option("--out", req.out_path, "output file (default stdout)");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& v) { req.seed = v; },
        "override the scenario seed");
    cmd->add_flag("--summary", req.summary, "print summary lines to stdout");
    return cmd;
  };

  add_common(app.add_subcommand(
      "structure", "field-dressed hyperfine levels: B_G,state_label,energy_MHz"));
  add_common(app.add_subcommand(
                 "slower", "slowing trajectory: z_m,v_mps,t_s,scatter_rate"))
      ->add_flag("--capture", req.summary,
                 "print the capture velocity and captured flux fraction");
  add_common(app.add_subcommand(
      "pump", "populations along the slower: z_m,B_G,stretched,dark,metastable"));
  add_common(app.add_subcommand(
      "mot", "trap loading curves: t_s,N_*,Nm_*,signal_*"));
  CLI::App* fit = add_common(app.add_subcommand(
      "fit", "least-squares parameter estimate, plain-text record"));
  fit->add_option("--model", req.fit_model,
                  "loading | two_body | interspecies | tof");
  fit->add_option("--data", req.fit_data, "input CSV (overrides the scenario)");
  add_common(app.add_subcommand(
      "sweep", "grid scan of one variable, one CSV row per point"));

  CLI11_PARSE(app, argc, argv);
  req.subcommand = app.get_subcommands().front()->get_name();

  try {
    crmot::run_subcommand(req, std::cout, std::cout);
  } catch (const crmot::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const crmot::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
