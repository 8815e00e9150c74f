#include "crmot/field_structure.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "crmot/angular.hpp"
#include "crmot/errors.hpp"
#include "crmot/units.hpp"

namespace crmot {
namespace {

constexpr double kMuB_MHz_G = units::mu_B_Hz_per_G * 1e-6;
constexpr double kMuN_MHz_G = units::mu_N / units::h * 1e-4 * 1e-6;

// <mJ2 mI2 | I.J | mJ1 mI1> in the product basis. I.J conserves mF, so only
// the diagonal and the mJ+-1, mI-+1 flip-flop terms survive.
double ij_element(HalfInt J, HalfInt I, HalfInt mJ1, HalfInt mI1, HalfInt mJ2,
                  HalfInt mI2) {
  const double j = J.value(), i = I.value();
  const double a = mJ1.value(), b = mI1.value();
  if (mJ1 == mJ2 && mI1 == mI2) return a * b;
  if (mJ2.twice == mJ1.twice + 2 && mI2.twice == mI1.twice - 2)
    return 0.5 * std::sqrt((j - a) * (j + a + 1)) *
           std::sqrt((i + b) * (i - b + 1));
  if (mJ2.twice == mJ1.twice - 2 && mI2.twice == mI1.twice + 2)
    return 0.5 * std::sqrt((j + a) * (j - a + 1)) *
           std::sqrt((i - b) * (i + b + 1));
  return 0.0;
}

bool quadrupole_defined(HalfInt J, HalfInt I) {
  return J.twice >= 2 && I.twice >= 2;
}

// A * I.J + quadrupole term over the given product-basis rows.
Eigen::MatrixXd hyperfine_matrix(const Level& lv, HalfInt I,
                                 const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd ij(n, n);
  auto qn = [&](int flat) {
    HalfInt mJ{2 * (flat / (I.twice + 1)) - lv.J.twice};
    HalfInt mI{2 * (flat % (I.twice + 1)) - I.twice};
    return std::pair{mJ, mI};
  };
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      auto [mJ1, mI1] = qn(idx[c]);
      auto [mJ2, mI2] = qn(idx[r]);
      ij(r, c) = ij_element(lv.J, I, mJ1, mI1, mJ2, mI2);
    }
  Eigen::MatrixXd h = lv.A_MHz * ij;
  if (lv.B_MHz != 0 && quadrupole_defined(lv.J, I)) {
    const double j = lv.J.value(), i = I.value();
    const double denom = 2 * i * (2 * i - 1) * j * (2 * j - 1);
    h += lv.B_MHz *
         (3.0 * (ij * ij) + 1.5 * ij -
          i * (i + 1) * j * (j + 1) * Eigen::MatrixXd::Identity(n, n)) /
         denom;
  }
  return h;
}

double zeeman_slope_MHz_G(const Level& lv, double g_I, bool nuclear, HalfInt mJ,
                          HalfInt mI) {
  double s = lv.g_J * kMuB_MHz_G * mJ.value();
  if (nuclear) s -= g_I * kMuN_MHz_G * mI.value();
  return s;
}

}  // namespace

std::string StateLabel::str() const {
  return "F=" + F.str() + ",mF=" + mF.str();
}

std::string StateLabel::compact() const { return F.str() + ":" + mF.str(); }

StateLabel parse_state_label(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  std::string fs, ms;
  if (s.rfind("F=", 0) == 0) {
    auto comma = s.find(",mF=");
    if (comma == std::string::npos)
      throw ConfigError("bad state label '" + text + "' (want F=...,mF=...)");
    fs = s.substr(2, comma - 2);
    ms = s.substr(comma + 4);
  } else {
    auto colon = s.find(':');
    if (colon == std::string::npos)
      throw ConfigError("bad state label '" + text + "' (want F:mF)");
    fs = s.substr(0, colon);
    ms = s.substr(colon + 1);
  }
  return StateLabel{parse_half_int(fs), parse_half_int(ms)};
}

int EigenLevels::slot_of(const StateLabel& label) const {
  for (size_t i = 0; i < states.size(); ++i)
    if (states[i].label == label) return static_cast<int>(i);
  return -1;
}

const EigenState& EigenLevels::by_label(const StateLabel& label) const {
  int i = slot_of(label);
  if (i < 0) throw ConfigError("no state labelled " + label.str());
  return states[i];
}

double zero_field_energy_MHz(const Level& lv, HalfInt I, HalfInt F) {
  if (F.twice < std::abs(lv.J.twice - I.twice) || F.twice > lv.J.twice + I.twice)
    throw ConfigError("F=" + F.str() + " outside |J-I|..J+I for level " +
                      lv.label);
  const double j = lv.J.value(), i = I.value(), f = F.value();
  const double K = f * (f + 1) - i * (i + 1) - j * (j + 1);
  double e = 0.5 * lv.A_MHz * K;
  if (lv.B_MHz != 0 && quadrupole_defined(lv.J, I))
    e += lv.B_MHz * (1.5 * K * (K + 1) - 2 * i * (i + 1) * j * (j + 1)) /
         (2 * i * (2 * i - 1) * 2 * j * (2 * j - 1));
  return e;
}

ManifoldTracker::ManifoldTracker(const Level& level, HalfInt I, double g_I,
                                 FieldOptions opts)
    : level_(level), I_(I), g_I_(g_I), opts_(opts), basis_{level.J, I} {
  if (opts_.track_step_G <= 0)
    throw ConfigError("track_step_G must be positive");
  std::map<int, std::vector<int>> by_mF;  // twice(mF) -> basis indices
  for (int tmj = -level_.J.twice; tmj <= level_.J.twice; tmj += 2)
    for (int tmi = -I_.twice; tmi <= I_.twice; tmi += 2) {
      HalfInt mJ{tmj}, mI{tmi};
      by_mF[tmj + tmi].push_back(basis_.index(mJ, mI));
    }
  for (auto& [tmf, idx] : by_mF) {
    Block b;
    b.mF = HalfInt{tmf};
    b.idx = idx;
    Eigen::MatrixXd hf = hyperfine_matrix(level_, I_, idx);
    b.hf.assign(hf.data(), hf.data() + hf.size());  // column-major, symmetric
    for (int flat : idx) {
      HalfInt mJ{2 * (flat / (I_.twice + 1)) - level_.J.twice};
      HalfInt mI{2 * (flat % (I_.twice + 1)) - I_.twice};
      b.zeeman_slope.push_back(
          zeeman_slope_MHz_G(level_, g_I_, opts_.nuclear_zeeman, mJ, mI));
    }
    blocks_.push_back(std::move(b));
  }
  reset();
}

void ManifoldTracker::solve_blocks(
    double B_G, std::vector<std::vector<double>>& evals,
    std::vector<std::vector<double>>& evecs) const {
  evals.assign(blocks_.size(), {});
  evecs.assign(blocks_.size(), {});
  for (size_t b = 0; b < blocks_.size(); ++b) {
    const Block& blk = blocks_[b];
    const int n = static_cast<int>(blk.idx.size());
    Eigen::MatrixXd m =
        Eigen::Map<const Eigen::MatrixXd>(blk.hf.data(), n, n);
    for (int d = 0; d < n; ++d) m(d, d) += B_G * blk.zeeman_slope[d];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
      throw NumericError("eigensolver failed for level " + level_.label);
    evals[b].assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
    evecs[b].assign(es.eigenvectors().data(),
                    es.eigenvectors().data() + n * n);  // column-major
  }
}

void ManifoldTracker::reset() {
  std::vector<std::vector<double>> evals, evecs;
  solve_blocks(0.0, evals, evecs);

  struct Slot {
    StateLabel label;
    int block, col;
    double energy;
  };
  std::vector<Slot> slots;
  for (size_t b = 0; b < blocks_.size(); ++b) {
    const Block& blk = blocks_[b];
    const int n = static_cast<int>(blk.idx.size());
    // F values compatible with this mF, paired with their zero-field energies.
    std::vector<std::pair<double, HalfInt>> lande;
    const int f_lo =
        std::max(std::abs(blk.mF.twice), std::abs(level_.J.twice - I_.twice));
    for (int tf = f_lo; tf <= level_.J.twice + I_.twice; tf += 2)
      lande.emplace_back(zero_field_energy_MHz(level_, I_, HalfInt{tf}),
                         HalfInt{tf});
    if (static_cast<int>(lande.size()) != n)
      throw NumericError("mF block size mismatch in level " + level_.label);
    std::sort(lande.begin(), lande.end(),
              [](const auto& x, const auto& y) {
                return x.first != y.first ? x.first < y.first
                                          : x.second < y.second;
              });
    double scale = 1.0;
    for (const auto& [e, f] : lande) scale = std::max(scale, std::abs(e));
    for (int c = 0; c < n; ++c) {
      if (std::abs(evals[b][c] - lande[c].first) > 1e-6 * scale)
        throw NumericError("zero-field eigenvalues disagree with the F-state "
                           "energies for level " + level_.label);
      slots.push_back(
          {StateLabel{lande[c].second, blk.mF}, static_cast<int>(b), c,
           evals[b][c]});
    }
  }
  std::sort(slots.begin(), slots.end(), [](const Slot& x, const Slot& y) {
    if (x.label.F != y.label.F) return x.label.F < y.label.F;
    return x.label.mF < y.label.mF;
  });

  now_.B_G = 0;
  now_.states.assign(slots.size(), {});
  slot_block_.resize(slots.size());
  slot_within_.resize(slots.size());
  for (size_t s = 0; s < slots.size(); ++s) {
    const Slot& sl = slots[s];
    const Block& blk = blocks_[sl.block];
    const int n = static_cast<int>(blk.idx.size());
    slot_block_[s] = sl.block;
    slot_within_[s] = sl.col;
    EigenState& st = now_.states[s];
    st.label = sl.label;
    st.mF = sl.label.mF;
    st.energy_MHz = sl.energy;
    st.amplitudes.assign(basis_.dim(), 0.0);
    // Deterministic sign: largest-magnitude component positive.
    const double* col = evecs[sl.block].data() + n * sl.col;
    int peak = 0;
    for (int r = 1; r < n; ++r)
      if (std::abs(col[r]) > std::abs(col[peak])) peak = r;
    const double sign = col[peak] < 0 ? -1.0 : 1.0;
    for (int r = 0; r < n; ++r) st.amplitudes[blk.idx[r]] = sign * col[r];
  }
}

bool ManifoldTracker::try_hop(double B_G) {
  std::vector<std::vector<double>> evals, evecs;
  solve_blocks(B_G, evals, evecs);

  std::vector<EigenState> next(now_.states.size());
  for (size_t b = 0; b < blocks_.size(); ++b) {
    const Block& blk = blocks_[b];
    const int n = static_cast<int>(blk.idx.size());
    std::vector<int> slots;
    for (size_t s = 0; s < slot_block_.size(); ++s)
      if (slot_block_[s] == static_cast<int>(b))
        slots.push_back(static_cast<int>(s));
    // Overlaps between current slot vectors and the new eigenvector columns.
    struct Cand {
      double aover;
      double over;
      int si, col;
    };
    std::vector<Cand> cands;
    for (int si = 0; si < n; ++si) {
      const EigenState& prev = now_.states[slots[si]];
      for (int c = 0; c < n; ++c) {
        const double* col = evecs[b].data() + n * c;
        double o = 0;
        for (int r = 0; r < n; ++r) o += prev.amplitudes[blk.idx[r]] * col[r];
        cands.push_back({std::abs(o), o, si, c});
      }
    }
    std::sort(cands.begin(), cands.end(),
              [](const Cand& x, const Cand& y) { return x.aover > y.aover; });
    std::vector<bool> si_used(n, false), col_used(n, false);
    int assigned = 0;
    for (const Cand& c : cands) {
      if (si_used[c.si] || col_used[c.col]) continue;
      if (c.aover <= 0.5) return false;  // ambiguous, caller refines the step
      si_used[c.si] = true;
      col_used[c.col] = true;
      ++assigned;
      const int slot = slots[c.si];
      EigenState& st = next[slot];
      st.label = now_.states[slot].label;
      st.mF = blk.mF;
      st.energy_MHz = evals[b][c.col];
      st.amplitudes.assign(basis_.dim(), 0.0);
      const double* col = evecs[b].data() + n * c.col;
      const double sign = c.over < 0 ? -1.0 : 1.0;
      for (int r = 0; r < n; ++r) st.amplitudes[blk.idx[r]] = sign * col[r];
    }
    if (assigned != n) return false;
  }
  now_.B_G = B_G;
  now_.states = std::move(next);
  return true;
}

void ManifoldTracker::step_to(double B_G) {
  while (now_.B_G != B_G) {
    double target = B_G;
    while (!try_hop(target)) {
      target = 0.5 * (now_.B_G + target);
      if (std::abs(target - now_.B_G) < 1e-6)
        throw NumericError(
            "adiabatic tracking is ambiguous near B = " +
            std::to_string(now_.B_G) + " G for level " + level_.label +
            "; states are degenerate within the same mF block");
    }
  }
}

const EigenLevels& ManifoldTracker::advance(double B_G) {
  const double from = now_.B_G;
  if (B_G == from) return now_;
  const int n =
      std::max(1, static_cast<int>(
                      std::ceil(std::abs(B_G - from) / opts_.track_step_G)));
  for (int k = 1; k <= n; ++k)
    step_to(k == n ? B_G : from + (B_G - from) * k / n);
  return now_;
}

std::vector<EigenLevels> eigenlevels(const AtomicSpecies& species,
                                     const std::string& level_label,
                                     const std::vector<double>& B_grid_G,
                                     FieldOptions opts) {
  if (B_grid_G.empty()) throw ConfigError("empty field grid");
  for (size_t k = 1; k < B_grid_G.size(); ++k) {
    const bool up = B_grid_G[1] > B_grid_G[0];
    if (up ? (B_grid_G[k] <= B_grid_G[k - 1])
           : (B_grid_G[k] >= B_grid_G[k - 1]))
      throw ConfigError("field grid must be strictly monotone");
  }
  ManifoldTracker tracker(species.level(level_label), species.I, species.g_I,
                          opts);
  std::vector<EigenLevels> out;
  out.reserve(B_grid_G.size());
  for (double b : B_grid_G) out.push_back(tracker.advance(b));
  return out;
}

std::vector<double> default_field_grid(double B_lo_G, double B_hi_G) {
  if (!(B_lo_G < B_hi_G)) throw ConfigError("need B_lo < B_hi");
  std::vector<double> grid{B_lo_G};
  double b = B_lo_G;
  while (b < B_hi_G - 1e-9) {
    b += std::abs(b) < 50.0 ? 0.25 : 1.0;
    grid.push_back(std::min(b, B_hi_G));
  }
  return grid;
}

std::vector<double> dense_eigenvalues(const Level& level, HalfInt I, double g_I,
                                      double B_G, bool nuclear_zeeman) {
  const ProductBasis basis{level.J, I};
  const int dim = basis.dim();
  std::vector<int> all(dim);
  for (int k = 0; k < dim; ++k) all[k] = k;
  Eigen::MatrixXd h = hyperfine_matrix(level, I, all);
  for (int tmj = -level.J.twice; tmj <= level.J.twice; tmj += 2)
    for (int tmi = -I.twice; tmi <= I.twice; tmi += 2) {
      HalfInt mJ{tmj}, mI{tmi};
      const int k = basis.index(mJ, mI);
      h(k, k) += B_G * zeeman_slope_MHz_G(level, g_I, nuclear_zeeman, mJ, mI);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success)
    throw NumericError("dense eigensolver failed for level " + level.label);
  return std::vector<double>(es.eigenvalues().data(),
                             es.eigenvalues().data() + dim);
}

double transition_strength(const EigenState& g, const ProductBasis& gb,
                           const EigenState& e, const ProductBasis& eb,
                           int q) {
  if (q < -1 || q > 1) throw ConfigError("polarization q must be -1, 0, or +1");
  if (gb.I != eb.I)
    throw ConfigError("transition between levels of different nuclear spin");
  if (e.mF.twice != g.mF.twice + 2 * q) return 0.0;
  double sum = 0;
  for (int tmj = -gb.J.twice; tmj <= gb.J.twice; tmj += 2) {
    HalfInt mJ{tmj};
    HalfInt mJe = mJ + HalfInt::from_int(q);
    if (std::abs(mJe.twice) > eb.J.twice) continue;
    for (int tmi = -gb.I.twice; tmi <= gb.I.twice; tmi += 2) {
      HalfInt mI{tmi};
      const double ag = g.amplitudes[gb.index(mJ, mI)];
      if (ag == 0) continue;
      const double ae = e.amplitudes[eb.index(mJe, mI)];
      if (ae == 0) continue;
      sum += ag * ae *
             clebsch_gordan(gb.J, mJ, HalfInt::from_int(1),
                            HalfInt::from_int(q), eb.J, mJe);
    }
  }
  return sum * sum;
}

std::optional<CrossingReport> find_crossing(const AtomicSpecies& species,
                                            const std::string& level_label,
                                            const StateLabel& a,
                                            const StateLabel& b,
                                            double B_lo_G, double B_hi_G,
                                            FieldOptions opts) {
  if (a == b) throw ConfigError("crossing needs two distinct states");
  if (!(B_lo_G < B_hi_G)) throw ConfigError("need B_lo < B_hi");

  ManifoldTracker tracker(species.level(level_label), species.I, species.g_I,
                          opts);
  tracker.advance(B_lo_G);
  const int sa = tracker.current().slot_of(a);
  const int sb = tracker.current().slot_of(b);
  if (sa < 0) throw ConfigError("no state labelled " + a.str() + " in level " +
                                level_label);
  if (sb < 0) throw ConfigError("no state labelled " + b.str() + " in level " +
                                level_label);
  auto gap_of = [&](const EigenLevels& lv) {
    return lv.states[sa].energy_MHz - lv.states[sb].energy_MHz;
  };
  const bool same_mF = a.mF == b.mF;
  const double step = opts.track_step_G;
  const double tol_G = 1e-3;

  // Walk the range keeping a snapshot one step back so refinement can restart
  // from a labelled state.
  struct Sample {
    double B, d;
  };
  std::vector<Sample> recent;  // last three samples
  ManifoldTracker snap_m2 = tracker, snap_m1 = tracker;
  recent.push_back({B_lo_G, gap_of(tracker.current())});

  double B = B_lo_G;
  while (B < B_hi_G) {
    B = std::min(B + step, B_hi_G);
    snap_m2 = snap_m1;
    snap_m1 = tracker;
    tracker.advance(B);
    const double d = gap_of(tracker.current());
    recent.push_back({B, d});
    if (recent.size() > 3) recent.erase(recent.begin());
    const Sample& prev = recent[recent.size() - 2];

    if (!same_mF) {
      if (prev.d == 0)
        return CrossingReport{prev.B, 0.0, true};
      if ((prev.d > 0) != (d > 0)) {
        // Bisect from the snapshot at the left edge of the bracket.
        double lo = prev.B, hi_ = B, dlo = prev.d;
        while (hi_ - lo > tol_G) {
          const double mid = 0.5 * (lo + hi_);
          ManifoldTracker t = snap_m1;
          t.advance(mid);
          const double dm = gap_of(t.current());
          if (dm == 0) return CrossingReport{mid, 0.0, true};
          if ((dm > 0) == (dlo > 0))
            lo = mid;
          else
            hi_ = mid;
        }
        return CrossingReport{0.5 * (lo + hi_), 0.0, true};
      }
      if (d == 0 && B >= B_hi_G) return CrossingReport{B, 0.0, true};
    } else if (recent.size() == 3) {
      const Sample& s0 = recent[0];
      const Sample& s1 = recent[1];
      const Sample& s2 = recent[2];
      if (std::abs(s1.d) < std::abs(s0.d) && std::abs(s1.d) <= std::abs(s2.d)) {
        // Interior minimum of the avoided-crossing gap; golden-free ternary
        // search restarting each probe from the bracket-left snapshot.
        double lo = s0.B, hi_ = s2.B;
        auto probe = [&](double x) {
          ManifoldTracker t = snap_m2;
          t.advance(x);
          return std::abs(gap_of(t.current()));
        };
        while (hi_ - lo > tol_G) {
          const double m1 = lo + (hi_ - lo) / 3;
          const double m2 = hi_ - (hi_ - lo) / 3;
          if (probe(m1) < probe(m2))
            hi_ = m2;
          else
            lo = m1;
        }
        const double bc = 0.5 * (lo + hi_);
        return CrossingReport{bc, probe(bc), false};
      }
    }
  }
  return std::nullopt;
}

}  // namespace crmot
