#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crmot/half_integer.hpp"
#include "crmot/species.hpp"

namespace crmot {

// Adiabatic state identity: the zero-field |F, mF> this state connects to.
// mF is exact at any field; F is a label carried along the adiabatic branch.
struct StateLabel {
  HalfInt F, mF;
  bool operator==(const StateLabel&) const = default;
  std::string str() const;      // "F=9/2,mF=-7/2"
  std::string compact() const;  // "9/2:-7/2", comma-free for CSV cells
};

StateLabel parse_state_label(const std::string& text);

struct EigenState {
  StateLabel label;
  HalfInt mF;
  double energy_MHz = 0;           // hyperfine + Zeeman, relative to level centroid
  std::vector<double> amplitudes;  // over the |mJ, mI> product basis (full dim)
};

// One field point. Slot order is fixed when labels are assigned at zero field
// and is preserved along any tracked sequence, so slot i means the same
// adiabatic state at every grid point.
struct EigenLevels {
  double B_G = 0;
  std::vector<EigenState> states;

  const EigenState& by_label(const StateLabel&) const;
  int slot_of(const StateLabel&) const;  // -1 if absent
};

struct FieldOptions {
  bool nuclear_zeeman = false;   // include -g_I mu_N B mI
  double track_step_G = 0.25;    // max field step for adiabatic tracking
};

// Maps (mJ, mI) to an index in the product basis of a level.
struct ProductBasis {
  HalfInt J, I;
  int dim() const { return (J.twice + 1) * (I.twice + 1); }
  int index(HalfInt mJ, HalfInt mI) const {
    return ((mJ.twice + J.twice) / 2) * (I.twice + 1) + (mI.twice + I.twice) / 2;
  }
};

// Diagonalizes the intermediate-field Hamiltonian block by block in mF and
// carries adiabatic labels continuously from B = 0. advance() subdivides its
// own steps as needed; it throws NumericError if states cannot be followed
// unambiguously even at the minimum step.
class ManifoldTracker {
 public:
  ManifoldTracker(const Level& level, HalfInt I, double g_I,
                  FieldOptions opts = {});

  void reset();  // back to B = 0 with fresh zero-field labels
  const EigenLevels& advance(double B_G);
  const EigenLevels& current() const { return now_; }
  const ProductBasis& basis() const { return basis_; }

 private:
  struct Block {
    HalfInt mF;
    std::vector<int> idx;              // product-basis indices in this block
    std::vector<double> hf;            // hyperfine part, row-major idx x idx
    std::vector<double> zeeman_slope;  // diagonal dE/dB in MHz/G
  };

  void solve_blocks(double B_G, std::vector<std::vector<double>>& evals,
                    std::vector<std::vector<double>>& evecs) const;
  bool try_hop(double B_G);
  void step_to(double B_G);

  Level level_;
  HalfInt I_;
  double g_I_;
  FieldOptions opts_;
  ProductBasis basis_;
  std::vector<Block> blocks_;
  std::vector<int> slot_block_;   // slot -> block index
  std::vector<int> slot_within_;  // slot -> eigenvector column inside block
  EigenLevels now_;
};

// Landé expression for the zero-field hyperfine energy of |F> (MHz).
double zero_field_energy_MHz(const Level& level, HalfInt I, HalfInt F);

// Tracked eigenlevels along a strictly monotone field grid. Grids that do not
// start at zero are reached by an internal walk from B = 0 so labels always
// mean zero-field continuity.
std::vector<EigenLevels> eigenlevels(const AtomicSpecies& species,
                                     const std::string& level_label,
                                     const std::vector<double>& B_grid_G,
                                     FieldOptions opts = {});

// Grid with 0.25 G steps where |B| < 50 G and 1 G steps beyond.
std::vector<double> default_field_grid(double B_lo_G, double B_hi_G);

// Eigenvalues of the full dense matrix (no block decomposition), ascending.
// Exists so tests can cross-check the blocked solver against brute force.
std::vector<double> dense_eigenvalues(const Level& level, HalfInt I, double g_I,
                                      double B_G, bool nuclear_zeeman);

// Relative strength of the electric-dipole transition g -> e for polarization
// q in {-1, 0, +1}: the squared coherent sum of amplitude products weighted by
// <Jg mJ; 1 q | Je mJ+q>. Normalized so the stretched sigma+ transition gives
// exactly 1. Both states must come from the same field value.
double transition_strength(const EigenState& g, const ProductBasis& gb,
                           const EigenState& e, const ProductBasis& eb, int q);

struct CrossingReport {
  double B_G = 0;
  double gap_MHz = 0;  // 0 for states of different mF (true crossing)
  bool true_crossing = false;
};

// Locates where two adiabatically labelled states of one level become
// degenerate inside [B_lo, B_hi]. Different mF: exact crossing, bisected to
// 1e-3 G. Same mF: minimum-gap point of the avoided crossing. Returns nullopt
// when the range holds no crossing (not an error).
std::optional<CrossingReport> find_crossing(const AtomicSpecies& species,
                                            const std::string& level_label,
                                            const StateLabel& a,
                                            const StateLabel& b,
                                            double B_lo_G, double B_hi_G,
                                            FieldOptions opts = {});

}  // namespace crmot
