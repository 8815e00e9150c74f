#include "crmot/angular.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "crmot/errors.hpp"

namespace crmot {
namespace {

// Largest factorial needed is (j1+j2+j3+1)! with twice-values; 64 covers
// j-sums up to 31, far beyond the manifolds handled here.
constexpr int kMaxFact = 64;

const std::array<double, kMaxFact + 1>& factorials() {
  static const auto table = [] {
    std::array<double, kMaxFact + 1> f{};
    f[0] = 1.0;
    for (int i = 1; i <= kMaxFact; ++i) f[i] = f[i - 1] * i;
    return f;
  }();
  return table;
}

double fact(int n) {
  if (n < 0 || n > kMaxFact) throw NumericError("factorial argument out of table range");
  return factorials()[n];
}

bool triangle_ok(int tj1, int tj2, int tj3) {
  return tj3 >= std::abs(tj1 - tj2) && tj3 <= tj1 + tj2 && (tj1 + tj2 + tj3) % 2 == 0;
}

}  // namespace

double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3,
                HalfInt m1, HalfInt m2, HalfInt m3) {
  const int tj1 = j1.twice, tj2 = j2.twice, tj3 = j3.twice;
  const int tm1 = m1.twice, tm2 = m2.twice, tm3 = m3.twice;

  if (tj1 < 0 || tj2 < 0 || tj3 < 0) throw ConfigError("wigner3j: negative j");
  if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tj3 + tm3) % 2)
    throw ConfigError("wigner3j: m not of same integer/half-integer kind as j");
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3)
    throw ConfigError("wigner3j: |m| exceeds j");

  if (tm1 + tm2 + tm3 != 0) return 0.0;
  if (!triangle_ok(tj1, tj2, tj3)) return 0.0;

  // Racah's single-sum formula. All factorial arguments below are true
  // integers once the selection rules above hold.
  auto f2 = [&](int twice) { return fact(twice / 2); };

  const double delta = std::sqrt(
      f2(tj1 + tj2 - tj3) * f2(tj1 - tj2 + tj3) * f2(-tj1 + tj2 + tj3) /
      f2(tj1 + tj2 + tj3 + 2));

  const double norm = std::sqrt(
      f2(tj1 + tm1) * f2(tj1 - tm1) * f2(tj2 + tm2) * f2(tj2 - tm2) *
      f2(tj3 + tm3) * f2(tj3 - tm3));

  const int kmin = std::max({0, (tj2 - tj3 - tm1) / 2, (tj1 - tj3 + tm2) / 2});
  const int kmax = std::min({(tj1 + tj2 - tj3) / 2, (tj1 - tm1) / 2, (tj2 + tm2) / 2});

  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    double term = fact(k) *
                  f2(tj1 + tj2 - tj3 - 2 * k) *
                  f2(tj1 - tm1 - 2 * k) *
                  f2(tj2 + tm2 - 2 * k) *
                  f2(tj3 - tj2 + tm1 + 2 * k) *
                  f2(tj3 - tj1 - tm2 + 2 * k);
    sum += (k % 2 ? -1.0 : 1.0) / term;
  }

  const int phase_tw = tj1 - tj2 - tm3;  // exponent j1-j2-m3, guaranteed integer
  const double phase = (phase_tw / 2) % 2 ? -1.0 : 1.0;
  return phase * delta * norm * sum;
}

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2,
                      HalfInt J, HalfInt M) {
  if (m1.twice + m2.twice != M.twice) return 0.0;
  const double three_j = wigner3j(j1, j2, J, m1, m2, -M);
  const int phase_tw = j1.twice - j2.twice + M.twice;
  const double phase = (phase_tw / 2) % 2 ? -1.0 : 1.0;
  return phase * std::sqrt(J.twice + 1.0) * three_j;
}

double wigner3j(double j1, double j2, double j3,
                double m1, double m2, double m3) {
  return wigner3j(HalfInt::from_double(j1), HalfInt::from_double(j2),
                  HalfInt::from_double(j3), HalfInt::from_double(m1),
                  HalfInt::from_double(m2), HalfInt::from_double(m3));
}

double clebsch_gordan(double j1, double m1, double j2, double m2,
                      double J, double M) {
  return clebsch_gordan(HalfInt::from_double(j1), HalfInt::from_double(m1),
                        HalfInt::from_double(j2), HalfInt::from_double(m2),
                        HalfInt::from_double(J), HalfInt::from_double(M));
}

double average_cg_squared(HalfInt Jg, HalfInt Je) {
  double sum = 0.0;
  int count = 0;
  for (int tm = -Jg.twice; tm <= Jg.twice; tm += 2) {
    for (int tq = -2; tq <= 2; tq += 2) {
      ++count;
      const int tme = tm + tq;
      if (std::abs(tme) > Je.twice) continue;
      double cg = clebsch_gordan(Jg, HalfInt{tm}, HalfInt::from_int(1),
                                 HalfInt{tq}, Je, HalfInt{tme});
      sum += cg * cg;
    }
  }
  return sum / count;
}

}  // namespace crmot
