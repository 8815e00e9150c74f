#include <benchmark/benchmark.h>

#include <vector>

#include "crmot/estimation.hpp"
#include "crmot/field_structure.hpp"
#include "crmot/pumping.hpp"
#include "crmot/slower.hpp"
#include "crmot/species.hpp"
#include "crmot/trap.hpp"

using namespace crmot;

namespace {

const SpeciesTable& table() {
  static SpeciesTable t = load_species_table(default_species_file());
  return t;
}

}  // namespace

static void BM_DenseDiagonalization(benchmark::State& state) {
  const AtomicSpecies& f = table().get("53Cr");
  const Level& lvl = f.level("7P4");
  for (auto _ : state)
    benchmark::DoNotOptimize(dense_eigenvalues(lvl, f.I, f.g_I, 25.0, false));
}
BENCHMARK(BM_DenseDiagonalization);

static void BM_TrackedLevelGrid(benchmark::State& state) {
  const AtomicSpecies& f = table().get("53Cr");
  std::vector<double> grid;
  for (double b = 0; b <= 40.0; b += 0.5) grid.push_back(b);
  for (auto _ : state)
    benchmark::DoNotOptimize(eigenlevels(f, "7P4", grid));
}
BENCHMARK(BM_TrackedLevelGrid);

static void BM_PumpRateTable(benchmark::State& state) {
  const AtomicSpecies& f = table().get("53Cr");
  PumpBeam beam;
  beam.detuning_MHz = -147.3;
  beam.intensity_mW_cm2 = 42.6;
  beam.pol = {0.9, 0.0, 0.1};
  beam.doppler_sign = 1;
  PumpSystem sys(f, {beam});
  double B = 0.0;
  for (auto _ : state) {
    B += 0.06;  // forces the dressed-state refresh path every call
    if (B > 400.0) B = 0.0;
    benchmark::DoNotOptimize(sys.rates(B, 200.0));
  }
}
BENCHMARK(BM_PumpRateTable);

static void BM_SlowerTrajectory(benchmark::State& state) {
  const AtomicSpecies& b = table().get("52Cr");
  SlowerProfile prof = make_slower_profile(b);
  SlowingBeam beam;
  beam.detuning_MHz = prof.detuning_MHz;
  const double v0 = prof.design_capture_velocity() - 5.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_trajectory(v0, prof, beam));
}
BENCHMARK(BM_SlowerTrajectory);

static void BM_MotSchedule(benchmark::State& state) {
  SpeciesTrapParams p;
  p.name = "52Cr";
  p.loading_rate_per_s = 1.6e8;
  p.tau_s = 0.045;
  p.beta_cm3_s = 6.25e-10;
  p.cloud = {208.0, 208.0, 0.0};
  MotModel m;
  m.species = {p};
  Schedule sch;
  sch.horizon_s = 0.3;
  sch.initial = {InitialTrapState{}};
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_schedule(m, sch));
}
BENCHMARK(BM_MotSchedule);

static void BM_LoadingFit(benchmark::State& state) {
  std::vector<double> t(200), y(200);
  for (int i = 0; i < 200; ++i) {
    t[i] = 0.3 * i / 199.0;
    y[i] = loading_N(t[i], 1.6e8, 0.045);
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_linear_loading(t, y));
}
BENCHMARK(BM_LoadingFit);

BENCHMARK_MAIN();
