#include "crmot/species.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "crmot/errors.hpp"
#include "crmot/kvfile.hpp"
#include "crmot/units.hpp"

namespace crmot {

const DecayChannel* Level::decay_to(const std::string& label) const {
  for (const auto& d : decays)
    if (d.to == label) return &d;
  return nullptr;
}

double TransitionLine::gamma_rad() const {
  return 2.0 * units::pi * units::MHz_to_Hz(linewidth_MHz);
}

double TransitionLine::wavenumber() const {
  return 2.0 * units::pi / wavelength_m();
}

const Level& AtomicSpecies::level(const std::string& label) const {
  for (const auto& l : levels)
    if (l.label == label) return l;
  throw ConfigError(name + ": no level '" + label + "'");
}

double AtomicSpecies::mass_kg() const { return units::u_to_kg(mass_u); }

double AtomicSpecies::leak_total_per_s() const {
  const Level& upper = level(cooling.upper);
  double total = 0;
  for (const auto& d : upper.decays)
    if (d.to != cooling.lower) total += d.rate_per_s;
  return total;
}

const AtomicSpecies& SpeciesTable::get(const std::string& name) const {
  for (const auto& s : species)
    if (s.name == name) return s;
  throw ConfigError("species table has no entry '" + name + "'");
}

bool SpeciesTable::has(const std::string& name) const {
  for (const auto& s : species)
    if (s.name == name) return true;
  return false;
}

namespace {

void check_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw ConfigError(what + " is not finite");
}

HalfInt parse_spin(const std::string& text, const std::string& context) {
  // accepts "0", "3", "3/2"
  auto slash = text.find('/');
  if (slash == std::string::npos) {
    long long v = parse_int(text, context);
    if (v < 0) throw ConfigError(context + ": negative spin");
    return HalfInt::from_int(static_cast<int>(v));
  }
  long long num = parse_int(text.substr(0, slash), context);
  long long den = parse_int(text.substr(slash + 1), context);
  if (den != 2 || num < 0)
    throw ConfigError(context + ": malformed spin '" + text + "'");
  return HalfInt{static_cast<int>(num)};
}

std::string spin_str(HalfInt v) { return v.str(); }

Level parse_level(const KvSection& sec, const std::string& species_name) {
  sec.expect_keys({"J", "g_J", "A_MHz", "B_MHz", "decay", "hyperfine_gap_MHz"});
  Level lv;
  auto space = sec.name.rfind(' ');
  lv.label = sec.name.substr(space + 1);
  lv.J = parse_spin(sec.require("J"), "[" + sec.name + "] J");
  lv.g_J = sec.require_double("g_J");
  lv.A_MHz = sec.get_double("A_MHz", 0.0);
  lv.B_MHz = sec.get_double("B_MHz", 0.0);
  lv.hyperfine_gap_MHz = sec.get_double("hyperfine_gap_MHz", 0.0);
  check_finite(lv.g_J, species_name + " " + lv.label + " g_J");
  check_finite(lv.A_MHz, species_name + " " + lv.label + " A_MHz");
  check_finite(lv.B_MHz, species_name + " " + lv.label + " B_MHz");
  for (const KvEntry* e : sec.all("decay")) {
    std::istringstream in(e->value);
    DecayChannel ch;
    if (!(in >> ch.to >> ch.rate_per_s) || !(in >> std::ws).eof())
      throw ConfigError("[" + sec.name + "] line " + std::to_string(e->line) +
                        ": decay wants '<level> <rate_per_s>'");
    if (!(ch.rate_per_s >= 0) || !std::isfinite(ch.rate_per_s))
      throw ConfigError("[" + sec.name + "]: negative or non-finite decay rate");
    lv.decays.push_back(ch);
  }
  return lv;
}

}  // namespace

SpeciesTable load_species_table(const std::string& path) {
  KvFile file = KvFile::parse_file(path);
  SpeciesTable table;

  for (const KvSection* sp : file.with_prefix("species")) {
    sp->expect_keys({"mass_u", "nuclear_spin", "abundance", "g_I",
                     "reference_species", "reference_lower_F",
                     "reference_upper_F", "reference_offset_MHz"});
    AtomicSpecies s;
    s.name = sp->name.substr(std::string("species ").size());
    s.mass_u = sp->require_double("mass_u");
    s.I = parse_spin(sp->require("nuclear_spin"), "[" + sp->name + "] nuclear_spin");
    s.abundance = sp->require_double("abundance");
    s.g_I = sp->get_double("g_I", 0.0);
    s.reference_species = sp->get_string("reference_species", s.name);
    s.reference_offset_MHz = sp->get_double("reference_offset_MHz", 0.0);
    if (auto f = sp->get("reference_lower_F"))
      s.reference_lower_F = parse_spin(*f, "[" + sp->name + "] reference_lower_F");
    if (auto f = sp->get("reference_upper_F"))
      s.reference_upper_F = parse_spin(*f, "[" + sp->name + "] reference_upper_F");

    check_finite(s.mass_u, s.name + " mass");
    check_finite(s.abundance, s.name + " abundance");
    check_finite(s.g_I, s.name + " g_I");
    if (s.mass_u <= 0) throw ConfigError(s.name + ": non-positive mass");
    if (s.abundance <= 0 || s.abundance >= 1)
      throw ConfigError(s.name + ": abundance must be a fraction in (0,1)");

    for (const KvSection* lv : file.with_prefix("level " + s.name))
      s.levels.push_back(parse_level(*lv, s.name));
    if (s.levels.empty()) throw ConfigError(s.name + ": no levels");

    const KvSection& line = file.require_section("line " + s.name + " cooling");
    line.expect_keys({"lower", "upper", "wavelength_nm", "linewidth_MHz",
                      "saturation_mW_cm2"});
    s.cooling.lower = line.require("lower");
    s.cooling.upper = line.require("upper");
    s.cooling.wavelength_nm = line.require_double("wavelength_nm");
    s.cooling.linewidth_MHz = line.require_double("linewidth_MHz");
    s.cooling.saturation_mW_cm2 = line.require_double("saturation_mW_cm2");
    if (s.cooling.wavelength_nm <= 0 || s.cooling.linewidth_MHz <= 0 ||
        s.cooling.saturation_mW_cm2 <= 0)
      throw ConfigError(s.name + ": cooling line parameters must be positive");

    const Level& lower = s.level(s.cooling.lower);
    const Level& upper = s.level(s.cooling.upper);
    if (upper.J.twice != lower.J.twice + 2)
      throw ConfigError(s.name + ": cooling line is not a J -> J+1 transition");
    for (const auto& lv : s.levels)
      for (const auto& d : lv.decays)
        s.level(d.to);  // destination must exist

    // The radiative channel on the cooling line must agree with the quoted
    // linewidth; a mismatch means the data file is internally inconsistent.
    const DecayChannel* rad = upper.decay_to(s.cooling.lower);
    if (!rad) throw ConfigError(s.name + ": upper cooling level lacks decay to lower");
    if (std::abs(rad->rate_per_s - s.cooling.gamma_rad()) > 0.01 * s.cooling.gamma_rad())
      throw ConfigError(s.name + ": cooling decay rate disagrees with linewidth");

    table.species.push_back(std::move(s));
  }

  if (table.species.empty()) throw ConfigError(path + ": no [species ...] sections");
  for (size_t i = 0; i < table.species.size(); ++i)
    for (size_t j = i + 1; j < table.species.size(); ++j) {
      if (table.species[i].name == table.species[j].name)
        throw ConfigError("duplicate species " + table.species[i].name);
      if (table.species[i].mass_u == table.species[j].mass_u)
        throw ConfigError("species with identical masses");
    }
  for (const auto& s : table.species)
    if (!table.has(s.reference_species))
      throw ConfigError(s.name + ": unknown reference_species " + s.reference_species);
  return table;
}

void save_species_table(const SpeciesTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  auto num = [](double v) { return format_double_exact(v); };
  for (const auto& s : table.species) {
    out << "[species " << s.name << "]\n";
    out << "mass_u = " << num(s.mass_u) << "\n";
    out << "nuclear_spin = " << spin_str(s.I) << "\n";
    out << "abundance = " << num(s.abundance) << "\n";
    out << "g_I = " << num(s.g_I) << "\n";
    if (s.reference_species != s.name) {
      out << "reference_species = " << s.reference_species << "\n";
      out << "reference_lower_F = " << spin_str(s.reference_lower_F) << "\n";
      out << "reference_upper_F = " << spin_str(s.reference_upper_F) << "\n";
      out << "reference_offset_MHz = " << num(s.reference_offset_MHz) << "\n";
    }
    out << "\n";
    for (const auto& lv : s.levels) {
      out << "[level " << s.name << " " << lv.label << "]\n";
      out << "J = " << spin_str(lv.J) << "\n";
      out << "g_J = " << num(lv.g_J) << "\n";
      if (lv.A_MHz != 0) out << "A_MHz = " << num(lv.A_MHz) << "\n";
      if (lv.B_MHz != 0) out << "B_MHz = " << num(lv.B_MHz) << "\n";
      if (lv.hyperfine_gap_MHz != 0)
        out << "hyperfine_gap_MHz = " << num(lv.hyperfine_gap_MHz) << "\n";
      for (const auto& d : lv.decays)
        out << "decay = " << d.to << " " << num(d.rate_per_s) << "\n";
      out << "\n";
    }
    out << "[line " << s.name << " cooling]\n";
    out << "lower = " << s.cooling.lower << "\n";
    out << "upper = " << s.cooling.upper << "\n";
    out << "wavelength_nm = " << num(s.cooling.wavelength_nm) << "\n";
    out << "linewidth_MHz = " << num(s.cooling.linewidth_MHz) << "\n";
    out << "saturation_mW_cm2 = " << num(s.cooling.saturation_mW_cm2) << "\n";
    out << "\n";
  }
  if (!out) throw ConfigError("write failed: " + path);
}

std::string default_species_file() {
#ifdef CRMOT_SOURCE_DATA_DIR
  return std::string(CRMOT_SOURCE_DATA_DIR) + "/chromium.dat";
#else
  return "chromium.dat";
#endif
}

}  // namespace crmot
