#include "crmot/estimation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "crmot/errors.hpp"
#include "crmot/units.hpp"

namespace crmot {

namespace {
constexpr double kInfD = std::numeric_limits<double>::infinity();
constexpr double kSqrt8 = 2.8284271247461903;
}

double FitResult::get(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return estimate[i];
  throw ConfigError("fit result has no parameter '" + name + "'");
}

FitResult fit_curve(const std::vector<double>& x, const std::vector<double>& y,
                    const CurveModel& model, std::vector<double> p0,
                    std::vector<std::string> names, CurveFitOptions opts) {
  const int m = static_cast<int>(x.size());
  const int n = static_cast<int>(p0.size());
  if (m != static_cast<int>(y.size()))
    throw ConfigError("x and y lengths differ");
  if (n == 0 || names.size() != p0.size())
    throw ConfigError("parameter names must match the initial guess");
  if (m < n) throw ConfigError("fewer data points than parameters");
  const bool bounded = !opts.lower.empty() || !opts.upper.empty();
  if (bounded && (opts.lower.size() != p0.size() ||
                  opts.upper.size() != p0.size()))
    throw ConfigError("bounds must cover every parameter");

  // Work in scaled coordinates theta = p / scale so steps are O(1).
  std::vector<double> scale(n);
  for (int j = 0; j < n; ++j)
    scale[j] = std::abs(p0[j]) > 0 ? std::abs(p0[j]) : 1.0;

  auto clamp = [&](Eigen::VectorXd& th) {
    if (!bounded) return;
    for (int j = 0; j < n; ++j) {
      const double lo = opts.lower[j] / scale[j];
      const double hi = opts.upper[j] / scale[j];
      th[j] = std::min(std::max(th[j], lo), hi);
    }
  };
  auto params = [&](const Eigen::VectorXd& th) {
    std::vector<double> p(n);
    for (int j = 0; j < n; ++j) p[j] = th[j] * scale[j];
    return p;
  };
  auto residuals = [&](const Eigen::VectorXd& th, Eigen::VectorXd& r) {
    const std::vector<double> p = params(th);
    for (int i = 0; i < m; ++i) r[i] = model(x[i], p) - y[i];
    return r.squaredNorm();
  };

  Eigen::VectorXd theta(n);
  for (int j = 0; j < n; ++j) theta[j] = p0[j] / scale[j];
  clamp(theta);

  Eigen::VectorXd r(m), rtry(m);
  double rss = residuals(theta, r);
  if (!std::isfinite(rss))
    throw ConfigError("model is non-finite at the initial guess");

  FitResult out;
  out.names = std::move(names);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  Eigen::MatrixXd J(m, n);

  for (; iter < opts.max_iterations; ++iter) {
    // Central-difference Jacobian in scaled coordinates.
    for (int j = 0; j < n; ++j) {
      const double h = 1e-6 * std::max(std::abs(theta[j]), 1.0);
      Eigen::VectorXd tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      Eigen::VectorXd rp(m), rm(m);
      residuals(tp, rp);
      residuals(tm, rm);
      J.col(j) = (rp - rm) / (2 * h);
    }
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;

    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd A = JtJ;
      for (int j = 0; j < n; ++j)
        A(j, j) += lambda * std::max(JtJ(j, j), 1e-12);
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= 10;
        continue;
      }
      Eigen::VectorXd cand = theta + step;
      clamp(cand);
      const double rss_try = residuals(cand, rtry);
      if (std::isfinite(rss_try) && rss_try < rss) {
        const double gain = rss - rss_try;
        theta = cand;
        r = rtry;
        rss = rss_try;
        lambda = std::max(lambda / 3, 1e-12);
        accepted = true;
        if (gain <= opts.rel_tol * std::max(rss, 1e-300) ||
            step.norm() < 1e-12)
          converged = true;
        break;
      }
      lambda *= 10;
      if (lambda > 1e14) break;
    }
    if (!accepted) {
      // No descent direction left: either converged to a minimum or stuck.
      converged = converged || (g.norm() <= 1e-8 * std::max(1.0, rss));
      break;
    }
    if (converged) break;
  }

  out.rss = rss;
  out.converged = converged;
  out.iterations = iter + 1;
  out.estimate = params(theta);
  out.half_width.assign(n, kInfD);
  if (m > n) {
    // Final Jacobian for the curvature-based confidence half-widths.
    for (int j = 0; j < n; ++j) {
      const double h = 1e-6 * std::max(std::abs(theta[j]), 1.0);
      Eigen::VectorXd tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      Eigen::VectorXd rp(m), rm(m);
      residuals(tp, rp);
      residuals(tm, rm);
      J.col(j) = (rp - rm) / (2 * h);
    }
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(JtJ);
    if (lu.isInvertible()) {
      const Eigen::MatrixXd cov = lu.inverse() * (rss / (m - n));
      for (int j = 0; j < n; ++j)
        if (cov(j, j) >= 0)
          out.half_width[j] = std::sqrt(cov(j, j)) * scale[j];
    }
  }
  return out;
}

double loading_N(double t, double gamma, double tau) {
  return gamma * tau * (1 - std::exp(-t / tau));
}

double two_body_decay_N(double t, double N0, double tau, double beta_prime) {
  const double e = std::exp(-t / tau);
  return N0 * e / (1 + beta_prime * N0 * tau * (1 - e));
}

double interspecies_N(double t, double t1, double t2, double gamma, double tau,
                      double extra_rate) {
  if (t <= t1) return loading_N(t, gamma, tau);
  const double n1 = loading_N(t1, gamma, tau);
  const double inv_tau2 = 1 / tau + extra_rate;
  const double tau2 = 1 / inv_tau2;
  if (t <= t2)
    return gamma * tau2 + (n1 - gamma * tau2) * std::exp(-(t - t1) / tau2);
  const double n2 =
      gamma * tau2 + (n1 - gamma * tau2) * std::exp(-(t2 - t1) / tau2);
  return gamma * tau + (n2 - gamma * tau) * std::exp(-(t - t2) / tau);
}

namespace {

void check_curve(const std::vector<double>& t, const std::vector<double>& y,
                 size_t min_points) {
  if (t.size() != y.size()) throw ConfigError("time and value lengths differ");
  if (t.size() < min_points)
    throw ConfigError("need at least " + std::to_string(min_points) +
                      " data points");
  for (size_t i = 1; i < t.size(); ++i)
    if (t[i] <= t[i - 1]) throw ConfigError("time axis must increase");
}

}  // namespace

FitResult fit_linear_loading(const std::vector<double>& t,
                             const std::vector<double>& N) {
  check_curve(t, N, 4);
  double n_end = 0;
  const size_t tail = std::max<size_t>(1, N.size() / 10);
  for (size_t i = N.size() - tail; i < N.size(); ++i) n_end += N[i];
  n_end /= tail;
  double tau0 = t.back() / 3;
  for (size_t i = 0; i < N.size(); ++i)
    if (N[i] >= 0.632 * n_end && t[i] > 0) {
      tau0 = t[i];
      break;
    }
  const double gamma0 = n_end / std::max(tau0, 1e-12);

  CurveFitOptions opts;
  opts.lower = {0, 1e-12};
  opts.upper = {kInfD, kInfD};
  return fit_curve(
      t, N, [](double tt, const std::vector<double>& p) {
        return loading_N(tt, p[0], p[1]);
      },
      {gamma0, tau0}, {"gamma_per_s", "tau_s"}, opts);
}

FitResult fit_two_body_decay(const std::vector<double>& t,
                             const std::vector<double>& N, double V1_cm3) {
  check_curve(t, N, 5);
  if (V1_cm3 <= 0) throw ConfigError("V1 must be positive");
  const double n0 = std::max(N.front(), 1e-12);
  // Tail gives the one-body time, the initial slope the pair rate.
  const size_t a = (3 * t.size()) / 4, b = t.size() - 1;
  double tau0 = t.back() / 3;
  if (N[a] > 0 && N[b] > 0 && N[a] > N[b])
    tau0 = (t[b] - t[a]) / std::log(N[a] / N[b]);
  tau0 = std::max(tau0, 1e-9);
  const double slope0 = (N[1] - N[0]) / (t[1] - t[0]);
  double bp0 = (-slope0 - n0 / tau0) / (n0 * n0);
  bp0 = std::max(bp0, 1e-4 / (n0 * tau0));

  CurveFitOptions opts;
  opts.lower = {1e-12, 0, 0};
  opts.upper = {kInfD, kInfD, kInfD};
  FitResult fit = fit_curve(
      t, N, [](double tt, const std::vector<double>& p) {
        return two_body_decay_N(tt, p[2], p[0], p[1]);
      },
      {tau0, bp0, n0}, {"tau_s", "beta_prime_per_s", "N0"}, opts);

  // Report beta itself; the per-atom rate maps linearly through the volume.
  const double f = kSqrt8 * V1_cm3;
  fit.names[1] = "beta_cm3_s";
  fit.estimate[1] *= f;
  fit.half_width[1] *= f;
  return fit;
}

FitResult fit_interspecies(const std::vector<double>& t,
                           const std::vector<double>& N, double t1, double t2,
                           double nbar, double gamma, double tau) {
  check_curve(t, N, 4);
  if (!(t1 < t2)) throw ConfigError("need t1 < t2");
  if (t1 < t.front() || t2 > t.back())
    throw ConfigError("coupling window outside the data range");
  if (nbar <= 0 || gamma <= 0 || tau <= 0)
    throw ConfigError("nbar, gamma, tau must be positive");

  std::vector<double> ts, ns;
  double n_min = kInfD;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t1) continue;
    ts.push_back(t[i]);
    ns.push_back(N[i]);
    if (t[i] <= t2) n_min = std::min(n_min, N[i]);
  }
  if (ts.size() < 3)
    throw ConfigError("too few points past t1 for the interspecies fit");
  double r0 = 1e-3 / tau;
  if (n_min > 0 && std::isfinite(n_min))
    r0 = std::max(gamma / n_min - 1 / tau, r0);

  CurveFitOptions opts;
  opts.lower = {0};
  opts.upper = {kInfD};
  FitResult fit = fit_curve(
      ts, ns, [&](double tt, const std::vector<double>& p) {
        return interspecies_N(tt, t1, t2, gamma, tau, p[0] * nbar);
      },
      {r0 / nbar}, {"beta_BF_cm3_s"}, opts);
  return fit;
}

FitResult fit_tof_temperature(const std::vector<double>& t,
                              const std::vector<double>& sigma_um,
                              double mass_kg) {
  if (t.size() != sigma_um.size())
    throw ConfigError("time and width lengths differ");
  if (t.size() < 3) throw ConfigError("need at least 3 time points");
  if (mass_kg <= 0) throw ConfigError("mass must be positive");

  // Linear regression of sigma^2 (um^2) against t^2 (s^2).
  const int m = static_cast<int>(t.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    const double x = t[i] * t[i];
    const double y = sigma_um[i] * sigma_um[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = m * sxx - sx * sx;
  if (det <= 0) throw ConfigError("degenerate time grid for the TOF fit");
  const double slope = (m * sxy - sx * sy) / det;   // um^2 / s^2
  const double icept = (sy * sxx - sx * sxy) / det;  // um^2

  double rss = 0;
  for (int i = 0; i < m; ++i) {
    const double x = t[i] * t[i];
    const double y = sigma_um[i] * sigma_um[i];
    const double e = y - (icept + slope * x);
    rss += e * e;
  }
  const double sig2 = m > 2 ? rss / (m - 2) : 0;
  const double var_slope = sig2 * m / det;
  const double var_icept = sig2 * sxx / det;

  // slope = kB T / m in um^2/s^2; convert to kelvin then microkelvin.
  const double to_T_uK = mass_kg / units::kB * 1e-12 * 1e6;
  const double T_uK = slope * to_T_uK;
  const double sigma0 = std::sqrt(std::max(icept, 0.0));

  FitResult out;
  out.names = {"sigma0_um", "temperature_uK"};
  out.estimate = {sigma0, T_uK};
  out.half_width = {sigma0 > 0 ? std::sqrt(var_icept) / (2 * sigma0) : kInfD,
                    std::sqrt(var_slope) * to_T_uK};
  out.rss = rss;
  out.converged = true;
  out.iterations = 0;
  return out;
}

void apply_multiplicative_noise(std::vector<double>& y, double sigma_rel,
                                GaussianRng& rng) {
  if (sigma_rel < 0) throw ConfigError("noise level must be non-negative");
  for (double& v : y) v *= 1 + sigma_rel * rng.normal();
}

}  // namespace crmot
