#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "crmot/errors.hpp"
#include "crmot/estimation.hpp"
#include "crmot/rng.hpp"
#include "crmot/trap.hpp"
#include "crmot/units.hpp"

using namespace crmot;

namespace {

constexpr double kSqrt8 = 2.8284271247461903;

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

// RK4 oracle for dN/dt = -N/tau - bp N^2 (+ extra one-body rate in [t1,t2])
double ode_decay(double t_end, double N0, double tau, double bp) {
  double N = N0, t = 0;
  const double h = t_end / 20000;
  auto f = [&](double n) { return -n / tau - bp * n * n; };
  for (int i = 0; i < 20000; ++i) {
    const double k1 = f(N), k2 = f(N + 0.5 * h * k1), k3 = f(N + 0.5 * h * k2),
                 k4 = f(N + h * k3);
    N += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
  }
  return N;
}

double ode_interspecies(double t_end, double t1, double t2, double gamma,
                        double tau, double extra) {
  // segment-wise RK4 so the rate discontinuities sit on segment edges
  double N = 0;
  auto run = [&](double a, double b, double rate) {
    if (b <= a) return;
    const int steps = 20000;
    const double h = (b - a) / steps;
    auto f = [&](double n) { return gamma - n / tau - rate * n; };
    for (int i = 0; i < steps; ++i) {
      const double k1 = f(N), k2 = f(N + 0.5 * h * k1),
                   k3 = f(N + 0.5 * h * k2), k4 = f(N + h * k3);
      N += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
  };
  run(0.0, std::min(t_end, t1), 0.0);
  run(t1, std::min(t_end, t2), extra);
  run(t2, t_end, 0.0);
  return N;
}

}  // namespace

TEST_CASE("closed-form curves match an independent ode integration") {
  const double tau = 0.05, bp = 5e-6, N0 = 4e6;
  for (double t : {0.01, 0.1, 0.3}) {
    CHECK(two_body_decay_N(t, N0, tau, bp) ==
          doctest::Approx(ode_decay(t, N0, tau, bp)).epsilon(1e-8));
  }
  // pure exponential and pure algebraic limits
  CHECK(two_body_decay_N(0.1, N0, tau, 0.0) ==
        doctest::Approx(N0 * std::exp(-2.0)).epsilon(1e-12));

  const double gamma = 1.2e6, extra = 12.0;
  for (double t : {0.5, 1.7, 2.4, 3.0}) {
    CHECK(interspecies_N(t, 1.5, 2.0, gamma, 0.025, extra) ==
          doctest::Approx(ode_interspecies(t, 1.5, 2.0, gamma, 0.025, extra))
              .epsilon(1e-6));
  }
  // continuity at the segment boundaries
  for (double tb : {1.5, 2.0}) {
    CHECK(interspecies_N(tb - 1e-9, 1.5, 2.0, gamma, 0.025, extra) ==
          doctest::Approx(interspecies_N(tb + 1e-9, 1.5, 2.0, gamma, 0.025,
                                         extra)).epsilon(1e-6));
  }
  CHECK(loading_N(0.09, 2e6, 0.045) ==
        doctest::Approx(2e6 * 0.045 * (1 - std::exp(-2.0))).epsilon(1e-12));
}

TEST_CASE("levenberg-marquardt recovers parameters of disparate magnitude") {
  auto model = [](double t, const std::vector<double>& p) {
    return p[0] * (1.0 - std::exp(-t / p[1]));
  };
  const std::vector<double> t = linspace(0.0, 0.3, 60);
  std::vector<double> y(t.size());
  for (size_t i = 0; i < t.size(); ++i) y[i] = model(t[i], {7.2e6, 0.045});
  FitResult r = fit_curve(t, y, model, {1e6, 0.2}, {"amp", "tau"});
  CHECK(r.converged);
  CHECK(r.get("amp") == doctest::Approx(7.2e6).epsilon(1e-8));
  CHECK(r.get("tau") == doctest::Approx(0.045).epsilon(1e-8));
  CHECK(r.rss < 1e-6);
  CHECK(r.iterations > 0);
  CHECK_THROWS_AS(r.get("nope"), ConfigError);
  REQUIRE(r.half_width.size() == 2);
  // perfect data leaves essentially zero residual curvature width
  CHECK(r.half_width[0] < 1.0);
}

TEST_CASE("box bounds clamp the search") {
  auto model = [](double t, const std::vector<double>& p) { return p[0] * t; };
  const std::vector<double> t = linspace(0.0, 1.0, 20);
  std::vector<double> y(t.size());
  for (size_t i = 0; i < t.size(); ++i) y[i] = 3.0 * t[i];
  CurveFitOptions opts;
  opts.lower = {5.0};
  opts.upper = {10.0};
  FitResult r = fit_curve(t, y, model, {7.0}, {"slope"}, opts);
  CHECK(r.estimate[0] == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("noiseless loading fit round trips to 1e-4") {
  const double gamma = 1.6e8, tau = 0.045;
  const std::vector<double> t = linspace(0.0, 0.3, 200);
  std::vector<double> N(t.size());
  for (size_t i = 0; i < t.size(); ++i) N[i] = loading_N(t[i], gamma, tau);
  FitResult r = fit_linear_loading(t, N);
  CHECK(r.converged);
  CHECK(r.get("gamma_per_s") == doctest::Approx(gamma).epsilon(1e-6));
  CHECK(r.get("tau_s") == doctest::Approx(tau).epsilon(1e-6));
}

TEST_CASE("noisy loading fit stays within a few percent") {
  const double gamma = 1.6e8, tau = 0.045;
  const std::vector<double> t = linspace(1e-4, 0.3, 200);
  std::vector<double> N(t.size());
  for (size_t i = 0; i < t.size(); ++i) N[i] = loading_N(t[i], gamma, tau);
  GaussianRng rng(11);
  apply_multiplicative_noise(N, 0.05, rng);
  FitResult r = fit_linear_loading(t, N);
  CHECK(r.converged);
  CHECK(r.get("gamma_per_s") == doctest::Approx(gamma).epsilon(0.05));
  CHECK(r.get("tau_s") == doctest::Approx(tau).epsilon(0.05));
  CHECK(r.get("gamma_per_s") != doctest::Approx(gamma).epsilon(1e-9));
}

TEST_CASE("two-body fit recovers beta in physical units") {
  const double V1 = 5.0107e-5, beta = 6.25e-10, tau = 0.045, N0 = 4e6;
  const double bp = beta / (kSqrt8 * V1);
  const std::vector<double> t = linspace(0.0, 0.4, 200);
  std::vector<double> N(t.size());
  for (size_t i = 0; i < t.size(); ++i) N[i] = two_body_decay_N(t[i], N0, tau, bp);
  FitResult r = fit_two_body_decay(t, N, V1);
  CHECK(r.converged);
  CHECK(r.get("beta_cm3_s") == doctest::Approx(beta).epsilon(1e-4));
  CHECK(r.get("tau_s") == doctest::Approx(tau).epsilon(1e-4));
  CHECK(r.get("N0") == doctest::Approx(N0).epsilon(1e-4));
}

TEST_CASE("interspecies fit recovers the cross coefficient") {
  const double gamma = 1.2e6, tau = 0.025, nbar = 1.04e9, beta_BF = 1.8e-9;
  const std::vector<double> t = linspace(0.0, 3.0, 300);
  std::vector<double> N(t.size());
  for (size_t i = 0; i < t.size(); ++i)
    N[i] = interspecies_N(t[i], 1.5, 2.0, gamma, tau, beta_BF * nbar);
  FitResult r = fit_interspecies(t, N, 1.5, 2.0, nbar, gamma, tau);
  CHECK(r.converged);
  CHECK(r.get("beta_BF_cm3_s") == doctest::Approx(beta_BF).epsilon(1e-6));

  CHECK_THROWS_AS(fit_interspecies(t, N, 2.0, 1.5, nbar, gamma, tau),
                  ConfigError);
  CHECK_THROWS_AS(fit_interspecies(t, N, 1.5, 2.0, 0.0, gamma, tau),
                  ConfigError);
}

TEST_CASE("time-of-flight regression is exact on exact data") {
  const double mass = 52.9406481 * units::amu;
  const std::vector<double> t = linspace(0.0, 0.005, 10);
  std::vector<double> s(t.size());
  for (size_t i = 0; i < t.size(); ++i) s[i] = tof_width_um(110.0, 100.0, mass, t[i]);
  FitResult r = fit_tof_temperature(t, s, mass);
  CHECK(r.converged);
  CHECK(r.iterations == 0);  // closed form, no iteration
  CHECK(r.get("temperature_uK") == doctest::Approx(100.0).epsilon(1e-10));
  CHECK(r.get("sigma0_um") == doctest::Approx(110.0).epsilon(1e-10));
}

TEST_CASE("fits reject malformed curves") {
  CHECK_THROWS_AS(fit_linear_loading({0.0, 0.1}, {1.0}), ConfigError);
  CHECK_THROWS_AS(fit_linear_loading({0.2, 0.1, 0.3}, {1.0, 2.0, 3.0}),
                  ConfigError);
}

TEST_CASE("multiplicative noise is seed-deterministic") {
  std::vector<double> a(50, 100.0), b(50, 100.0), c(50, 100.0);
  GaussianRng r1(3), r2(3), r3(4);
  apply_multiplicative_noise(a, 0.05, r1);
  apply_multiplicative_noise(b, 0.05, r2);
  apply_multiplicative_noise(c, 0.05, r3);
  CHECK(a == b);
  CHECK(a != c);
  double mean = 0;
  for (double v : a) mean += v;
  CHECK(mean / a.size() == doctest::Approx(100.0).epsilon(0.05));
}
