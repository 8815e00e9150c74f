#pragma once

#include <functional>
#include <string>
#include <vector>

#include "crmot/rng.hpp"

namespace crmot {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> estimate;
  std::vector<double> half_width;  // 1-sigma from the residual curvature
  double rss = 0;
  bool converged = false;
  int iterations = 0;

  double get(const std::string& name) const;
};

using CurveModel =
    std::function<double(double x, const std::vector<double>& p)>;

struct CurveFitOptions {
  int max_iterations = 400;
  double rel_tol = 1e-14;            // accepted-improvement stopping threshold
  std::vector<double> lower, upper;  // optional box bounds, per parameter
};

// Levenberg-Marquardt with a numeric Jacobian. Parameters are scaled
// internally by |p0| so disparate magnitudes (1e8 vs 1e-9) are handled; the
// run is deterministic for identical inputs. Non-convergence is reported in
// the flag, never thrown.
FitResult fit_curve(const std::vector<double>& x, const std::vector<double>& y,
                    const CurveModel& model, std::vector<double> p0,
                    std::vector<std::string> names, CurveFitOptions opts = {});

// Closed-form curve models shared by the fits and synthetic-data generation.
double loading_N(double t, double gamma, double tau);
// beta_prime is the per-atom pair rate beta / (2^(3/2) V1).
double two_body_decay_N(double t, double N0, double tau, double beta_prime);
// Loading interrupted by an extra one-body rate during [t1, t2].
double interspecies_N(double t, double t1, double t2, double gamma, double tau,
                      double extra_rate);

// N(t) = Gamma tau (1 - e^(-t/tau)) -> (gamma_per_s, tau_s).
FitResult fit_linear_loading(const std::vector<double>& t_s,
                             const std::vector<double>& N);

// Decay with one- and two-body losses -> (tau_s, beta_cm3_s, N0).
FitResult fit_two_body_decay(const std::vector<double>& t_s,
                             const std::vector<double>& N, double V1_cm3);

// One-parameter fit of the loading dip caused by a partner cloud of average
// density nbar during [t1, t2]; gamma and tau come from a prior fit of the
// uncoupled segment -> (beta_BF_cm3_s).
FitResult fit_interspecies(const std::vector<double>& t_s,
                           const std::vector<double>& N, double t1_s,
                           double t2_s, double nbar_partner_cm3, double gamma,
                           double tau);

// sigma^2 linear in t^2; closed-form regression -> (sigma0_um,
// temperature_uK).
FitResult fit_tof_temperature(const std::vector<double>& t_s,
                              const std::vector<double>& sigma_um,
                              double mass_kg);

// y_i *= (1 + sigma_rel * normal()); the seeded generator makes runs
// reproducible.
void apply_multiplicative_noise(std::vector<double>& y, double sigma_rel,
                                GaussianRng& rng);

}  // namespace crmot
